//! Closed-form Grover measurement statistics, iteration-count strategies for
//! an unknown number of marked states, and termination rules.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default growth factor of the original strategy.
pub const DEFAULT_LAMBDA: f64 = 1.25;

/// `M` marked states among `N_s` equally weighted basis states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroverRoundModel {
    space_size: u64,
    marked: u64,
}

impl GroverRoundModel {
    pub fn new(space_size: u64, marked: u64) -> Result<Self> {
        if space_size == 0 || marked > space_size {
            return Err(Error::Parameter(format!(
                "need 0 <= M <= N_s and N_s >= 1, got M = {marked}, N_s = {space_size}"
            )));
        }
        Ok(Self { space_size, marked })
    }

    pub fn space_size(&self) -> u64 {
        self.space_size
    }

    pub fn marked(&self) -> u64 {
        self.marked
    }

    /// Rotation half-angle `arcsin(sqrt(M / N_s))`.
    pub fn theta(&self) -> f64 {
        let ratio = (self.marked as f64 / self.space_size as f64).clamp(0.0, 1.0);
        ratio.sqrt().asin()
    }

    /// Probability of measuring a marked state after `j` iterations:
    /// `sin²((2j + 1) θ)`.
    pub fn success_probability(&self, j: u64) -> f64 {
        if self.marked == 0 {
            return 0.0;
        }
        if self.marked == self.space_size {
            return 1.0;
        }
        let angle = (2.0 * j as f64 + 1.0) * self.theta();
        angle.sin().powi(2).clamp(0.0, 1.0)
    }

    /// Exact mean success probability when `j` is uniform on `0..m`.
    pub fn mean_success_probability(&self, m: u64) -> f64 {
        if m == 0 {
            return 0.0;
        }
        (0..m).map(|j| self.success_probability(j)).sum::<f64>() / m as f64
    }
}

pub fn success_probability(space_size: u64, marked: u64, j: u64) -> Result<f64> {
    Ok(GroverRoundModel::new(space_size, marked)?.success_probability(j))
}

/// Rule choosing `n_grover` for round `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Strategy {
    /// Uniform on `{0, …, ⌈λ^r⌉}`.
    Original { lambda: f64 },
    /// Uniform on `{0, …, ⌈π / (4 arcsin √(1/N_s))⌉ − 1}`.
    FixedInterval,
    /// Deterministic `⌊π / (4 arcsin √(2^(1−r)))⌋`.
    Incremental,
}

impl Strategy {
    pub fn original() -> Self {
        Strategy::Original { lambda: DEFAULT_LAMBDA }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Strategy::Original { lambda } if !(lambda > 1.0 && lambda.is_finite()) => {
                Err(Error::Parameter(format!("lambda must exceed 1, got {lambda}")))
            }
            _ => Ok(()),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Strategy::Original { .. } => "original",
            Strategy::FixedInterval => "fixed",
            Strategy::Incremental => "incremental",
        }
    }

    /// Draws the iteration count for round `r >= 1` on a space of `N_s`.
    pub fn draw_iterations<R: Rng + ?Sized>(&self, r: u32, space_size: u64, rng: &mut R) -> u64 {
        match *self {
            Strategy::Original { lambda } => rng.gen_range(0..=original_upper(lambda, r)),
            Strategy::FixedInterval => rng.gen_range(0..=fixed_interval_upper(space_size)),
            Strategy::Incremental => incremental_iterations(r),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Original { lambda } if *lambda != DEFAULT_LAMBDA => write!(f, "original:{lambda}"),
            other => f.write_str(other.label()),
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let strategy = match s.split_once(':') {
            None if s == "original" => Strategy::original(),
            None if s == "fixed" => Strategy::FixedInterval,
            None if s == "incremental" => Strategy::Incremental,
            Some(("original", l)) => Strategy::Original {
                lambda: l.parse().map_err(|_| Error::Parameter(format!("bad lambda `{l}`")))?,
            },
            _ => return Err(Error::Parameter(format!("unknown strategy `{s}`"))),
        };
        strategy.validate()?;
        Ok(strategy)
    }
}

/// `⌈λ^r⌉`, saturating.
pub fn original_upper(lambda: f64, r: u32) -> u64 {
    saturate(lambda.powf(r as f64).ceil())
}

/// Largest draw of the fixed-interval strategy, `⌈π / (4 arcsin √(1/N_s))⌉ − 1`.
pub fn fixed_interval_upper(space_size: u64) -> u64 {
    fixed_interval_len(space_size) - 1
}

/// Size `m` of the fixed-interval draw set `{0, …, m − 1}`.
pub fn fixed_interval_len(space_size: u64) -> u64 {
    let theta = (1.0 / space_size.max(1) as f64).clamp(0.0, 1.0).sqrt().asin();
    saturate((PI / (4.0 * theta)).ceil()).max(1)
}

/// Iterations of the incremental strategy in round `r >= 1`.
pub fn incremental_iterations(r: u32) -> u64 {
    let guess = 2f64.powi(1 - r as i32).clamp(0.0, 1.0);
    // r = 2 lands exactly on 1, and asin(√½) rounds one ulp above π/4
    saturate((PI / (4.0 * guess.sqrt().asin()) + 1e-9).floor())
}

fn saturate(x: f64) -> u64 {
    if x.is_nan() || x <= 0.0 {
        0
    } else if x >= u64::MAX as f64 {
        u64::MAX
    } else {
        x as u64
    }
}

/// How a termination bound scales with problem size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scaling", rename_all = "snake_case")]
pub enum Scaling {
    /// `c`
    Constant { c: f64 },
    /// `c · N` with `N = n²`.
    Linear { c: f64 },
    /// `c · N²` with `N = n²`.
    Quadratic { c: f64 },
    /// `c · n³` in the node count.
    CubicNodes { c: f64 },
    /// `log_λ(n^power)`.
    LogLambda { power: u32, lambda: f64 },
}

impl Scaling {
    /// Resolves to an integer bound (rounded up, at least 1) for `n` nodes.
    pub fn resolve(&self, n: usize) -> u64 {
        let nodes = n as f64;
        let vars = nodes * nodes;
        let raw = match *self {
            Scaling::Constant { c } => c,
            Scaling::Linear { c } => c * vars,
            Scaling::Quadratic { c } => c * vars * vars,
            Scaling::CubicNodes { c } => c * nodes.powi(3),
            Scaling::LogLambda { power, lambda } => power as f64 * nodes.ln() / lambda.ln(),
        };
        saturate(raw.ceil()).max(1)
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Scaling::Constant { c } | Scaling::Linear { c } | Scaling::Quadratic { c } | Scaling::CubicNodes { c } => {
                c > 0.0 && c.is_finite()
            }
            Scaling::LogLambda { power, lambda } => power > 0 && lambda > 1.0 && lambda.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Parameter(format!("invalid scaling {self:?}")))
        }
    }
}

impl fmt::Display for Scaling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Scaling::Constant { c } => write!(f, "{c}"),
            Scaling::Linear { c } => write!(f, "{c}N"),
            Scaling::Quadratic { c } => write!(f, "{c}N2"),
            Scaling::CubicNodes { c } => write!(f, "{c}n3"),
            Scaling::LogLambda { power, lambda } if lambda == DEFAULT_LAMBDA => write!(f, "logn{power}"),
            Scaling::LogLambda { power, lambda } => write!(f, "logn{power}@{lambda}"),
        }
    }
}

impl FromStr for Scaling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parameter(format!("bad bound `{s}`"));
        let num = |t: &str| t.parse::<f64>().map_err(|_| bad());
        let scaling = if let Some(rest) = s.strip_prefix("logn") {
            let (power, lambda) = match rest.split_once('@') {
                Some((p, l)) => (p, num(l)?),
                None => (rest, DEFAULT_LAMBDA),
            };
            Scaling::LogLambda {
                power: power.parse().map_err(|_| bad())?,
                lambda,
            }
        } else if let Some(c) = s.strip_suffix("N2") {
            Scaling::Quadratic {
                c: coefficient(c, &num)?,
            }
        } else if let Some(c) = s.strip_suffix('N') {
            Scaling::Linear {
                c: coefficient(c, &num)?,
            }
        } else if let Some(c) = s.strip_suffix("n3") {
            Scaling::CubicNodes {
                c: coefficient(c, &num)?,
            }
        } else {
            Scaling::Constant { c: num(s)? }
        };
        scaling.validate()?;
        Ok(scaling)
    }
}

fn coefficient(c: &str, num: &dyn Fn(&str) -> Result<f64>) -> Result<f64> {
    if c.is_empty() {
        Ok(1.0)
    } else {
        num(c)
    }
}

/// Counters a termination rule inspects.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchState {
    /// Current round index; starts at 1 and resets to 1 after an improvement.
    /// Zero before the first round.
    pub r: u32,
    /// Cumulative Grover iterations.
    pub k_total: u64,
    /// Unsuccessful rounds since the last improvement.
    pub rounds_in_step: u32,
}

/// When to stop the adaptive search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TerminationRule {
    /// Stop once `rounds_in_step` unsuccessful rounds have occurred since the
    /// last improvement.
    RoundsPerStep { bound: Scaling },
    /// Stop once `k_total` reaches the budget.
    TotalIterationBudget { bound: Scaling },
    /// Stop when the round counter `r` reaches the bound.
    ConsecutiveFailures { bound: Scaling },
}

impl TerminationRule {
    pub fn rounds(bound: Scaling) -> Self {
        TerminationRule::RoundsPerStep { bound }
    }

    pub fn budget(bound: Scaling) -> Self {
        TerminationRule::TotalIterationBudget { bound }
    }

    pub fn failures(bound: Scaling) -> Self {
        TerminationRule::ConsecutiveFailures { bound }
    }

    pub fn scaling(&self) -> Scaling {
        match *self {
            TerminationRule::RoundsPerStep { bound }
            | TerminationRule::TotalIterationBudget { bound }
            | TerminationRule::ConsecutiveFailures { bound } => bound,
        }
    }

    /// The integer bound for an instance with `n` nodes.
    pub fn resolve(&self, n: usize) -> u64 {
        self.scaling().resolve(n)
    }

    pub fn check(&self, n: usize, state: &SearchState) -> bool {
        let bound = self.resolve(n);
        match self {
            TerminationRule::RoundsPerStep { .. } => u64::from(state.rounds_in_step) >= bound,
            TerminationRule::TotalIterationBudget { .. } => state.k_total >= bound,
            TerminationRule::ConsecutiveFailures { .. } => u64::from(state.r) >= bound,
        }
    }
}

impl fmt::Display for TerminationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TerminationRule::RoundsPerStep { bound } => write!(f, "rounds:{bound}"),
            TerminationRule::TotalIterationBudget { bound } => write!(f, "budget:{bound}"),
            TerminationRule::ConsecutiveFailures { bound } => write!(f, "failures:{bound}"),
        }
    }
}

/// Parses `rounds:5`, `rounds:logn4`, `budget:5n3`, `failures:2N`, ...
impl FromStr for TerminationRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, bound) = s
            .split_once(':')
            .ok_or_else(|| Error::Parameter(format!("termination `{s}` must be kind:bound")))?;
        let bound: Scaling = bound.parse()?;
        match kind {
            "rounds" => Ok(TerminationRule::rounds(bound)),
            "budget" => Ok(TerminationRule::budget(bound)),
            "failures" => Ok(TerminationRule::failures(bound)),
            _ => Err(Error::Parameter(format!("unknown termination kind `{kind}`"))),
        }
    }
}
