//! Grover adaptive search over the full space of `n!` time-indexed tours.
//!
//! Each round draws an iteration count, evaluates the closed-form success
//! probability for the current marked count and either samples an improving
//! tour uniformly or records an unmarked outcome.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grover::{GroverRoundModel, SearchState, Strategy, TerminationRule};
use crate::instance::TspInstance;
use crate::oracle::{enumerate_good_states, GoodStateSet};
use crate::record::{Incumbent, Measurement, RoundEvent, RunRecord};
use crate::tour::{greedy_tour, Tour};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasConfig {
    pub strategy: Strategy,
    pub termination: TerminationRule,
    /// Start node of the greedy initial tour.
    #[serde(default)]
    pub start: usize,
}

impl GasConfig {
    pub fn new(strategy: Strategy, termination: TerminationRule) -> Self {
        Self {
            strategy,
            termination,
            start: 0,
        }
    }
}

/// Greedy start, one enumeration at the greedy threshold, then the search.
pub fn run_gas(instance: &TspInstance, config: &GasConfig, seed: u64) -> Result<RunRecord> {
    let initial = greedy_tour(instance, config.start)?;
    let good = enumerate_good_states(instance, initial.cost(instance)?)?;
    run_gas_with(instance, &good, &initial, config, seed)
}

/// Runs the search from `initial` against a pre-enumerated good-state set
/// whose threshold must be at least the initial cost.
pub fn run_gas_with(
    instance: &TspInstance,
    good: &GoodStateSet,
    initial: &Tour,
    config: &GasConfig,
    seed: u64,
) -> Result<RunRecord> {
    config.strategy.validate()?;
    let n = instance.n();
    let initial_cost = initial.cost(instance)?;
    // fails early if the set does not cover the initial threshold
    good.marked_count(initial_cost)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space_size = good.space_size();
    let mut y = initial_cost;
    let mut incumbent = initial.clone();
    let mut incumbents = vec![Incumbent {
        threshold: y,
        tour: incumbent.clone(),
    }];
    let mut events = Vec::new();
    let mut state = SearchState {
        r: 1,
        k_total: 0,
        rounds_in_step: 0,
    };

    while !config.termination.check(n, &state) {
        let n_grover = config.strategy.draw_iterations(state.r, space_size, &mut rng);
        let marked = good.marked_count(y)?;
        let p = GroverRoundModel::new(space_size, marked)?.success_probability(n_grover);
        state.k_total = state.k_total.saturating_add(n_grover);
        let hit = rng.gen::<f64>() < p;
        let measurement = if hit {
            let z = good.sample_marked(y, &mut rng)?;
            let cost = z.cost(instance)?;
            incumbent = z;
            Measurement::Marked { cost }
        } else {
            Measurement::Unmarked
        };
        events.push(RoundEvent {
            r: state.r,
            n_grover,
            threshold: y,
            marked,
            space_size,
            measurement: measurement.clone(),
            improved: hit,
            l_chain: None,
            start_index: None,
        });
        if let Measurement::Marked { cost } = measurement {
            y = cost;
            incumbents.push(Incumbent {
                threshold: y,
                tour: incumbent.clone(),
            });
            state.r = 1;
            state.rounds_in_step = 0;
        } else {
            state.r += 1;
            state.rounds_in_step += 1;
        }
    }

    Ok(RunRecord {
        engine: "gas".into(),
        instance: instance.name().to_string(),
        n,
        seed,
        config: serde_json::to_value(config)?,
        initial_tour: initial.clone(),
        initial_cost,
        events,
        incumbents,
        k_total: state.k_total,
        final_tour: incumbent,
        final_cost: y,
    })
}
