//! Neighborhood search with growing exchange chains.
//!
//! For every chain length and chain start the engine repeatedly prepares the
//! exchange-chain superposition around the incumbent, applies a random number
//! of Grover iterations and measures. Strict improvements replace the
//! incumbent and send the chain length back to 1.
//!
//! Two bookkeeping modes exist. The literal mode follows the original loop
//! exactly: the per-spec counters `k` and `l` only advance on success, so an
//! improvement-free neighborhood is sampled until the global budget is gone.
//! The cleaned mode counts every draw against the per-spec cap `K`, grows the
//! per-spec round counter on failures and resets it on success.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grover::{original_upper, GroverRoundModel, DEFAULT_LAMBDA};
use crate::instance::TspInstance;
use crate::neighborhood::{max_chain_length, ExchangeChainSpec, NeighborhoodCache};
use crate::record::{Incumbent, Measurement, RoundEvent, RunRecord};
use crate::tour::Tour;

/// Which size `N` the per-spec cap and the global budget are expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeBinding {
    /// `N = n`: cap `min(n², n^l)`, budget `5 n³`.
    #[default]
    Nodes,
    /// `N = n²`, the number of decision variables.
    Variables,
}

/// Chain starts scanned for every chain length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartRange {
    /// `i = 1, …, N − 1`, as the loop counter runs; taken modulo `n`.
    #[default]
    Pseudocode,
    /// `i = 1, …, n − 2`, excluding both ends.
    Interior,
    /// Every timestep `0, …, n − 1`.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LkConfig {
    /// Chain length limit; `None` means `⌊n/2⌋`.
    #[serde(default)]
    pub l_max: Option<usize>,
    /// Cleaned mode stops at the first improvement-free pass whose chain
    /// length is at least `l_min`.
    #[serde(default = "one")]
    pub l_min: usize,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_budget_factor")]
    pub budget_factor: f64,
    #[serde(default)]
    pub size_binding: SizeBinding,
    #[serde(default)]
    pub starts: StartRange,
    #[serde(default = "yes")]
    pub literal_mode: bool,
}

fn one() -> usize {
    1
}

fn default_lambda() -> f64 {
    DEFAULT_LAMBDA
}

fn default_budget_factor() -> f64 {
    5.0
}

fn yes() -> bool {
    true
}

impl Default for LkConfig {
    fn default() -> Self {
        Self {
            l_max: None,
            l_min: 1,
            lambda: DEFAULT_LAMBDA,
            budget_factor: 5.0,
            size_binding: SizeBinding::Nodes,
            starts: StartRange::Pseudocode,
            literal_mode: true,
        }
    }
}

/// Configuration resolved against a concrete node count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolvedLk {
    pub l_max: usize,
    pub l_min: usize,
    pub size: u64,
    pub budget: u64,
}

impl LkConfig {
    pub fn cleaned() -> Self {
        Self {
            literal_mode: false,
            ..Self::default()
        }
    }

    pub fn resolve(&self, n: usize) -> Result<ResolvedLk> {
        let l_max = self.l_max.unwrap_or(max_chain_length(n));
        if !(1 <= self.l_min && self.l_min <= l_max && l_max <= max_chain_length(n)) {
            return Err(Error::Parameter(format!(
                "need 1 <= l_min ({}) <= l_max ({l_max}) <= {}",
                self.l_min,
                max_chain_length(n)
            )));
        }
        if !(self.lambda > 1.0 && self.lambda.is_finite()) {
            return Err(Error::Parameter(format!("lambda must exceed 1, got {}", self.lambda)));
        }
        if !(self.budget_factor > 0.0 && self.budget_factor.is_finite()) {
            return Err(Error::Parameter(format!(
                "budget factor must be positive, got {}",
                self.budget_factor
            )));
        }
        let size = match self.size_binding {
            SizeBinding::Nodes => n as u64,
            SizeBinding::Variables => (n * n) as u64,
        };
        let budget = (self.budget_factor * (size as f64).powi(3)).floor() as u64;
        Ok(ResolvedLk {
            l_max,
            l_min: self.l_min,
            size,
            budget,
        })
    }
}

impl ResolvedLk {
    /// Per-spec cap `K = min(N², N^l_chain)`.
    pub fn sample_cap(&self, l_chain: usize) -> u64 {
        let square = self.size.saturating_mul(self.size);
        let power = (0..l_chain).fold(1u64, |acc, _| acc.saturating_mul(self.size));
        square.min(power)
    }
}

/// Runs the chain search from `initial`.
pub fn run_lk(instance: &TspInstance, initial: &Tour, config: &LkConfig, seed: u64) -> Result<RunRecord> {
    let n = instance.n();
    let resolved = config.resolve(n)?;
    let initial_cost = initial.cost(instance)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cache = NeighborhoodCache::default();

    let mut x = initial.clone();
    let mut y = initial_cost;
    let mut incumbents = vec![Incumbent {
        threshold: y,
        tour: x.clone(),
    }];
    let mut events = Vec::new();
    let mut k_total = 0u64;

    let stop_len = if config.literal_mode {
        resolved.l_max
    } else {
        resolved.l_min
    };
    let starts: Vec<usize> = match config.starts {
        StartRange::Pseudocode => (1..resolved.size as usize).collect(),
        StartRange::Interior => (1..n - 1).collect(),
        StartRange::All => (0..n).collect(),
    };

    let mut l_chain = 0usize;
    let mut improvement = false;
    while improvement || l_chain < stop_len {
        improvement = false;
        l_chain += 1;
        let cap = resolved.sample_cap(l_chain);
        for &i in &starts {
            let mut k = 0u64;
            let mut l = 0u32;
            while k < cap && k_total <= resolved.budget {
                let n_grover = rng.gen_range(0..=original_upper(config.lambda, l));
                let spec = ExchangeChainSpec::new(x.clone(), i % n, l_chain)?;
                let summary = cache.get(instance, &spec);
                let marked = summary.improving.len() as u64;
                let p = GroverRoundModel::new(summary.size, marked)?.success_probability(n_grover);
                let hit = rng.gen::<f64>() < p;
                let found = if hit {
                    Some(summary.improving[rng.gen_range(0..summary.improving.len())].clone())
                } else {
                    None
                };
                k_total = k_total.saturating_add(n_grover);
                let measurement = match &found {
                    Some(t) => Measurement::Marked {
                        cost: t.cost(instance)?,
                    },
                    None => Measurement::Unmarked,
                };
                events.push(RoundEvent {
                    r: l,
                    n_grover,
                    threshold: y,
                    marked,
                    space_size: summary.size,
                    measurement,
                    improved: hit,
                    l_chain: Some(l_chain),
                    start_index: Some(i % n),
                });
                match found {
                    Some(t) => {
                        improvement = true;
                        y = t.cost(instance)?;
                        x = t;
                        incumbents.push(Incumbent {
                            threshold: y,
                            tour: x.clone(),
                        });
                        l_chain = 1;
                        if config.literal_mode {
                            k += n_grover;
                            l += 1;
                        } else {
                            k += 1;
                            l = 0;
                        }
                    }
                    None if !config.literal_mode => {
                        k += 1;
                        l += 1;
                    }
                    None => {}
                }
            }
        }
    }

    let mut config_json = serde_json::to_value(config)?;
    config_json["resolved"] = serde_json::to_value(resolved)?;
    Ok(RunRecord {
        engine: "lk".into(),
        instance: instance.name().to_string(),
        n,
        seed,
        config: config_json,
        initial_tour: initial.clone(),
        initial_cost,
        events,
        incumbents,
        k_total,
        final_tour: x,
        final_cost: y,
    })
}
