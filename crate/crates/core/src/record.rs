//! Run traces shared by the full-space and neighborhood engines.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tour::Tour;

/// Outcome of one simulated measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Measurement {
    /// A marked state; its cost is below the threshold in force.
    Marked { cost: f64 },
    /// Anything at or above the threshold. Only the comparison matters.
    Unmarked,
}

impl Measurement {
    pub fn is_marked(&self) -> bool {
        matches!(self, Measurement::Marked { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundEvent {
    pub r: u32,
    pub n_grover: u64,
    /// Threshold `y` in force when the measurement was taken.
    pub threshold: f64,
    /// Marked count `M` behind the measurement distribution.
    pub marked: u64,
    /// Size of the prepared superposition.
    pub space_size: u64,
    pub measurement: Measurement,
    pub improved: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_chain: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Incumbent {
    pub threshold: f64,
    pub tour: Tour,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub engine: String,
    pub instance: String,
    pub n: usize,
    pub seed: u64,
    /// Strategy and termination (or chain-search) settings, verbatim.
    pub config: serde_json::Value,
    pub initial_tour: Tour,
    pub initial_cost: f64,
    pub events: Vec<RoundEvent>,
    /// Successive incumbents, starting with the initial tour.
    pub incumbents: Vec<Incumbent>,
    pub k_total: u64,
    pub final_tour: Tour,
    pub final_cost: f64,
}

impl RunRecord {
    pub fn improvements(&self) -> usize {
        self.incumbents.len().saturating_sub(1)
    }

    /// `(final − optimum) / optimum`.
    pub fn approximation_ratio(&self, optimum: f64) -> Result<f64> {
        approximation_ratio(self.final_cost, optimum)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// Checks the structural invariants every engine guarantees.
    pub fn check_invariants(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Precondition(format!("{}: {msg}", self.instance)));
        let sum: u64 = self.events.iter().map(|e| e.n_grover).sum();
        if sum != self.k_total {
            return fail(format!("k_total {} != sum of draws {sum}", self.k_total));
        }
        if self.incumbents.first().map(|i| i.threshold) != Some(self.initial_cost) {
            return fail("first incumbent is not the initial tour".into());
        }
        if self.incumbents.windows(2).any(|w| !(w[1].threshold < w[0].threshold)) {
            return fail("incumbent costs are not strictly decreasing".into());
        }
        if self.incumbents.last().map(|i| i.threshold) != Some(self.final_cost) {
            return fail("final cost differs from last incumbent".into());
        }
        if self.final_cost > self.initial_cost {
            return fail("final cost exceeds the initial cost".into());
        }
        for e in &self.events {
            if let Measurement::Marked { cost } = e.measurement {
                if !(cost < e.threshold) {
                    return fail(format!("marked outcome {cost} not below {}", e.threshold));
                }
            }
        }
        Ok(())
    }
}

pub fn approximation_ratio(cost: f64, optimum: f64) -> Result<f64> {
    if !(optimum > 0.0) {
        return Err(Error::Parameter(format!("optimum must be positive, got {optimum}")));
    }
    Ok(((cost - optimum) / optimum).max(0.0))
}
