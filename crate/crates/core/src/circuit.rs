//! Sparse statevector simulation of the exchange-chain state preparation.
//!
//! The register is the one-hot layout: qubit `t * n + v` is set when node `v`
//! is visited at timestep `t`. Each chain step runs a weight-1 Dicke cascade
//! over the nodes that may still be swapped into that timestep, then writes
//! the displaced reference node into the partner's timestep, which fixes both
//! rows. Which partners are still free depends on earlier choices, so cascade
//! angles are conditioned on the occupancy of the remaining candidate rows.
//! Rows untouched by the chain finally receive their reference node.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neighborhood::max_chain_length;
use crate::tour::Tour;

/// Amplitudes below this magnitude are dropped after each gate.
const PRUNE: f64 = 1e-13;

/// Largest register the `u128` basis encoding supports.
pub const MAX_QUBITS: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Control {
    pub qubit: usize,
    /// `true` fires on `|1⟩`, `false` on `|0⟩`.
    pub on: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GateKind {
    X,
    /// `RY(θ) = [[cos θ/2, −sin θ/2], [sin θ/2, cos θ/2]]`.
    Ry {
        angle: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateOp {
    #[serde(flatten)]
    pub kind: GateKind,
    pub target: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub controls: Vec<Control>,
}

impl GateOp {
    pub fn x(target: usize) -> Self {
        Self {
            kind: GateKind::X,
            target,
            controls: Vec::new(),
        }
    }

    pub fn ry(target: usize, angle: f64) -> Self {
        Self {
            kind: GateKind::Ry { angle },
            target,
            controls: Vec::new(),
        }
    }

    pub fn controlled(mut self, controls: impl IntoIterator<Item = Control>) -> Self {
        self.controls.extend(controls);
        self
    }

    pub fn validate(&self, qubit_count: usize) -> Result<()> {
        if self.target >= qubit_count {
            return Err(Error::OutOfRange(format!(
                "target {} >= {qubit_count} qubits",
                self.target
            )));
        }
        for (i, c) in self.controls.iter().enumerate() {
            if c.qubit >= qubit_count {
                return Err(Error::OutOfRange(format!(
                    "control {} >= {qubit_count} qubits",
                    c.qubit
                )));
            }
            if c.qubit == self.target {
                return Err(Error::Parameter(format!(
                    "qubit {} is both target and control",
                    c.qubit
                )));
            }
            if self.controls[..i].iter().any(|d| d.qubit == c.qubit) {
                return Err(Error::Parameter(format!("control {} listed twice", c.qubit)));
            }
        }
        Ok(())
    }

    fn fires(&self, basis: u128) -> bool {
        self.controls.iter().all(|c| ((basis >> c.qubit) & 1 == 1) == c.on)
    }
}

/// Basis-state → amplitude map.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseState {
    qubit_count: usize,
    amplitudes: BTreeMap<u128, Complex64>,
}

impl SparseState {
    /// `|0…0⟩` on `qubit_count` qubits.
    pub fn zero(qubit_count: usize) -> Result<Self> {
        if qubit_count > MAX_QUBITS {
            return Err(Error::Capability(format!(
                "at most {MAX_QUBITS} qubits, got {qubit_count}"
            )));
        }
        let mut amplitudes = BTreeMap::new();
        amplitudes.insert(0, Complex64::new(1.0, 0.0));
        Ok(Self {
            qubit_count,
            amplitudes,
        })
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn amplitudes(&self) -> &BTreeMap<u128, Complex64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, basis: u128) -> Complex64 {
        self.amplitudes.get(&basis).copied().unwrap_or_default()
    }

    pub fn support_len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn apply(&mut self, gate: &GateOp) -> Result<()> {
        gate.validate(self.qubit_count)?;
        let bit = 1u128 << gate.target;
        let mut next: BTreeMap<u128, Complex64> = BTreeMap::new();
        let mut add = |basis: u128, amp: Complex64| *next.entry(basis).or_default() += amp;
        for (&basis, &amp) in &self.amplitudes {
            if !gate.fires(basis) {
                add(basis, amp);
                continue;
            }
            match gate.kind {
                GateKind::X => add(basis ^ bit, amp),
                GateKind::Ry { angle } => {
                    let (s, c) = (angle / 2.0).sin_cos();
                    if basis & bit == 0 {
                        add(basis, amp * c);
                        add(basis | bit, amp * s);
                    } else {
                        add(basis & !bit, -amp * s);
                        add(basis, amp * c);
                    }
                }
            }
        }
        next.retain(|_, a| a.norm() > PRUNE);
        self.amplitudes = next;
        Ok(())
    }

    pub fn apply_all<'a>(&mut self, gates: impl IntoIterator<Item = &'a GateOp>) -> Result<()> {
        for g in gates {
            self.apply(g)?;
        }
        Ok(())
    }

    /// Decodes every support state as an `n × n` one-hot tour.
    pub fn decode_tours(&self, n: usize) -> Result<Vec<(Tour, Complex64)>> {
        if n * n != self.qubit_count {
            return Err(Error::Parameter(format!(
                "{} qubits cannot hold an n = {n} one-hot register",
                self.qubit_count
            )));
        }
        self.amplitudes
            .iter()
            .map(|(&basis, &amp)| {
                let bits: Vec<bool> = (0..self.qubit_count).map(|q| (basis >> q) & 1 == 1).collect();
                Ok((Tour::from_one_hot(n, &bits)?, amp))
            })
            .collect()
    }
}

/// Gate list with its register width; serialises as the JSON export format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub qubits: usize,
    pub gates: Vec<GateOp>,
}

impl Circuit {
    pub fn run(&self) -> Result<SparseState> {
        let mut state = SparseState::zero(self.qubits)?;
        state.apply_all(&self.gates)?;
        Ok(state)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Angle that sends probability `1/a` of the incoming branch to `|1⟩`.
fn split_angle(a: usize) -> f64 {
    2.0 * (1.0 / a as f64).sqrt().asin()
}

/// Gates preparing the uniform weight-1 Dicke state on `qubits` (all
/// assumed `|0⟩`), each additionally conditioned on `guard`.
pub fn dicke_weight1_gates(qubits: &[usize], guard: &[Control]) -> Vec<GateOp> {
    let k = qubits.len();
    let mut gates = Vec::with_capacity(k);
    for (m, &q) in qubits.iter().enumerate() {
        let earlier = qubits[..m].iter().map(|&p| Control { qubit: p, on: false });
        let gate = if m + 1 == k {
            GateOp::x(q)
        } else {
            GateOp::ry(q, split_angle(k - m))
        };
        gates.push(gate.controlled(guard.iter().copied().chain(earlier)));
    }
    gates
}

/// Prepares `(1/√k) Σ |e_i⟩` on `qubits`, which must be `|0⟩` in every branch.
pub fn prepare_dicke_weight1(state: &mut SparseState, qubits: &[usize]) -> Result<()> {
    if qubits.is_empty() {
        return Err(Error::Parameter("Dicke state needs at least one qubit".into()));
    }
    let mask = qubits.iter().try_fold(0u128, |m, &q| {
        if q >= state.qubit_count {
            Err(Error::OutOfRange(format!("qubit {q} >= {}", state.qubit_count)))
        } else {
            Ok(m | (1u128 << q))
        }
    })?;
    if state.amplitudes.keys().any(|b| b & mask != 0) {
        return Err(Error::Precondition("Dicke qubits must start in |0⟩".into()));
    }
    state.apply_all(&dicke_weight1_gates(qubits, &[]))
}

#[inline]
fn qubit(n: usize, node: usize, step: usize) -> usize {
    step * n + node
}

/// Builds the exchange-chain state-preparation circuit for `reference`.
pub fn neighborhood_circuit(reference: &Tour, start: usize, length: usize) -> Result<Circuit> {
    let n = reference.len();
    if length > max_chain_length(n) {
        return Err(Error::Capability(format!(
            "chain length {length} exceeds {} for n = {n}: nodes would be changed after being fixed",
            max_chain_length(n)
        )));
    }
    if length == 0 || start >= n {
        return Err(Error::Parameter(format!(
            "invalid chain start {start} / length {length} for n = {n}"
        )));
    }
    if n * n > MAX_QUBITS {
        return Err(Error::Capability(format!(
            "n = {n} needs {} qubits, limit {MAX_QUBITS}",
            n * n
        )));
    }
    let r = reference.order();
    let chain: Vec<usize> = (0..length).map(|s| (start + s) % n).collect();
    let mut gates = Vec::new();

    for (s, &p) in chain.iter().enumerate() {
        let earlier = &chain[..s];
        // A row can only have been written with the reference node of an
        // earlier chain position.
        let empty_row = |q: usize| -> Vec<Control> {
            earlier
                .iter()
                .map(|&e| Control {
                    qubit: qubit(n, r[e], q),
                    on: false,
                })
                .collect()
        };
        let guard = empty_row(p);
        let candidates: Vec<usize> = (0..n).filter(|&q| q != p && !earlier.contains(&q)).collect();
        let cand_qubit = |q: usize| qubit(n, r[q], p);

        for (j, &q) in candidates.iter().enumerate() {
            let mut base = guard.clone();
            base.extend(candidates[..j].iter().map(|&c| Control {
                qubit: cand_qubit(c),
                on: false,
            }));
            base.extend(empty_row(q));
            for (pattern, free_later) in occupancy_patterns(&candidates[j + 1..], earlier, |e, row| qubit(n, r[e], row))
            {
                let remaining = 1 + free_later;
                let gate = if remaining == 1 {
                    GateOp::x(cand_qubit(q))
                } else {
                    GateOp::ry(cand_qubit(q), split_angle(remaining))
                };
                gates.push(gate.controlled(base.iter().copied().chain(pattern)));
            }
        }
        // buffer: the displaced reference node goes to the partner's row
        for &q in &candidates {
            gates.push(GateOp::x(qubit(n, r[p], q)).controlled([Control {
                qubit: cand_qubit(q),
                on: true,
            }]));
        }
    }

    for t in (0..n).filter(|t| !chain.contains(t)) {
        let target = qubit(n, r[t], t);
        let controls = (0..n).filter(|&v| v != r[t]).map(|v| Control {
            qubit: qubit(n, v, t),
            on: false,
        });
        gates.push(GateOp::x(target).controlled(controls));
    }

    Ok(Circuit { qubits: n * n, gates })
}

/// Every occupancy assignment of `rows`: each row is either empty or holds
/// the reference node of one earlier chain position (each such node in at
/// most one row). Yields the controls and the number of empty rows.
fn occupancy_patterns(
    rows: &[usize],
    earlier: &[usize],
    qubit_of: impl Fn(usize, usize) -> usize + Copy,
) -> Vec<(Vec<Control>, usize)> {
    let mut out = Vec::new();
    let mut controls = Vec::new();
    let mut taken = vec![false; earlier.len()];
    fn recurse(
        rows: &[usize],
        earlier: &[usize],
        qubit_of: &dyn Fn(usize, usize) -> usize,
        taken: &mut [bool],
        controls: &mut Vec<Control>,
        empty: usize,
        out: &mut Vec<(Vec<Control>, usize)>,
    ) {
        let Some((&row, rest)) = rows.split_first() else {
            out.push((controls.clone(), empty));
            return;
        };
        let mark = controls.len();
        controls.extend(earlier.iter().map(|&e| Control {
            qubit: qubit_of(e, row),
            on: false,
        }));
        recurse(rest, earlier, qubit_of, taken, controls, empty + 1, out);
        controls.truncate(mark);
        for (idx, &e) in earlier.iter().enumerate() {
            if taken[idx] {
                continue;
            }
            taken[idx] = true;
            controls.push(Control {
                qubit: qubit_of(e, row),
                on: true,
            });
            recurse(rest, earlier, qubit_of, taken, controls, empty, out);
            controls.truncate(mark);
            taken[idx] = false;
        }
    }
    recurse(rows, earlier, &qubit_of, &mut taken, &mut controls, 0, &mut out);
    out
}

/// Runs [`neighborhood_circuit`] from `|0…0⟩`.
pub fn prepare_neighborhood_state(reference: &Tour, start: usize, length: usize) -> Result<SparseState> {
    neighborhood_circuit(reference, start, length)?.run()
}

/// Support and amplitude statistics of a prepared neighborhood state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportReport {
    pub tours: Vec<Tour>,
    pub norm_error: f64,
    /// Largest `| |a| − 1/√S |` over the support of size `S`.
    pub max_uniform_deviation: f64,
    pub all_one_hot: bool,
}

pub fn support_report(state: &SparseState, n: usize) -> Result<SupportReport> {
    let decoded = state.decode_tours(n);
    let all_one_hot = decoded.is_ok();
    let decoded = decoded.unwrap_or_default();
    let uniform = 1.0 / (state.support_len().max(1) as f64).sqrt();
    let max_uniform_deviation = state
        .amplitudes()
        .values()
        .map(|a| (a.norm() - uniform).abs())
        .fold(0.0, f64::max);
    let mut tours: Vec<Tour> = decoded.into_iter().map(|(t, _)| t).collect();
    tours.sort();
    Ok(SupportReport {
        tours,
        norm_error: (1.0 - state.norm_sqr()).abs(),
        max_uniform_deviation,
        all_one_hot,
    })
}

/// Rotation that maps `|0⟩` to an equal superposition.
pub const HALF_TURN: f64 = PI / 2.0;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn x_flips_target() {
        let mut s = SparseState::zero(3).unwrap();
        s.apply(&GateOp::x(0)).unwrap();
        assert_eq!(s.amplitude(0b001), Complex64::new(1.0, 0.0));
        assert_eq!(s.support_len(), 1);
    }

    #[test]
    fn ry_half_turn_splits_evenly() {
        let mut s = SparseState::zero(1).unwrap();
        s.apply(&GateOp::ry(0, HALF_TURN)).unwrap();
        assert!((s.amplitude(0).re - s.amplitude(1).re).abs() < 1e-15);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_gates() {
        let mut s = SparseState::zero(2).unwrap();
        assert!(s.apply(&GateOp::x(2)).is_err());
        let self_ctrl = GateOp::x(1).controlled([Control { qubit: 1, on: true }]);
        assert!(s.apply(&self_ctrl).is_err());
        assert!(SparseState::zero(129).is_err());
    }

    #[test]
    fn dicke_small_cases() {
        let mut s = SparseState::zero(4).unwrap();
        prepare_dicke_weight1(&mut s, &[2]).unwrap();
        assert_eq!(s.amplitude(0b100), Complex64::new(1.0, 0.0));

        let mut s = SparseState::zero(3).unwrap();
        prepare_dicke_weight1(&mut s, &[0, 1, 2]).unwrap();
        let w = 1.0 / 3f64.sqrt();
        for b in [0b001u128, 0b010, 0b100] {
            let a = s.amplitude(b);
            assert!((a.re - w).abs() < 1e-12 && a.im == 0.0);
        }
        assert_eq!(s.support_len(), 3);
        assert!(prepare_dicke_weight1(&mut s, &[1]).is_err());
    }

    #[test]
    fn chain_too_long_is_a_capability_error() {
        assert!(matches!(
            prepare_neighborhood_state(&Tour::identity(5), 0, 3),
            Err(Error::Capability(_))
        ));
    }

    #[test]
    fn four_node_chain_support_is_uniform() {
        let state = prepare_neighborhood_state(&Tour::identity(4), 0, 2).unwrap();
        let report = support_report(&state, 4).unwrap();
        let expected: Vec<Tour> = [[1, 0, 2, 3], [2, 3, 0, 1], [3, 2, 1, 0]]
            .iter()
            .map(|o| Tour::new(o.to_vec()).unwrap())
            .collect();
        assert_eq!(report.tours, expected);
        assert!(report.norm_error < 1e-10);
        assert!(report.max_uniform_deviation < 1e-12);
    }

    #[test]
    fn circuit_json_export() {
        let c = neighborhood_circuit(&Tour::identity(4), 0, 1).unwrap();
        let text = c.to_json().unwrap();
        let back: Circuit = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
        assert!(text.contains("\"kind\": \"ry\""));
    }
}
