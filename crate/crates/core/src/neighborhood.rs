//! Exchange-chain neighborhoods of a reference tour.
//!
//! A chain of `l` consecutive timesteps starting at `i₀` (indices taken
//! modulo `n`) must be completely replaced. Members are exactly the tours
//! reachable by a set of disjoint position transpositions where every chain
//! position is moved, every transposition touches the chain, and all other
//! positions keep their reference node. For `n = 4`, reference `(0,1,2,3)`,
//! `i₀ = 0`, `l = 2` this yields `(1,0,2,3)`, `(2,3,0,1)` and `(3,2,1,0)`.

use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grover::GroverRoundModel;
use crate::instance::TspInstance;
use crate::tour::{order_cost, Tour};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExchangeChainSpec {
    reference: Tour,
    start: usize,
    length: usize,
}

/// Longest chain the state-preparation circuit supports, `⌊n/2⌋`.
pub fn max_chain_length(n: usize) -> usize {
    n / 2
}

impl ExchangeChainSpec {
    pub fn new(reference: Tour, start: usize, length: usize) -> Result<Self> {
        let n = reference.len();
        if start >= n {
            return Err(Error::Parameter(format!(
                "chain start {start} out of range for n = {n}"
            )));
        }
        if length == 0 || length > max_chain_length(n) {
            return Err(Error::Parameter(format!(
                "chain length {length} outside 1..={} for n = {n}",
                max_chain_length(n)
            )));
        }
        Ok(Self {
            reference,
            start,
            length,
        })
    }

    pub fn reference(&self) -> &Tour {
        &self.reference
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn n(&self) -> usize {
        self.reference.len()
    }

    /// Chain timesteps in chain order.
    pub fn positions(&self) -> Vec<usize> {
        let n = self.n();
        (0..self.length).map(|s| (self.start + s) % n).collect()
    }

    /// Calls `visit` with every member order. Generation pairs the first
    /// uncovered chain position with every free position, so each
    /// transposition set is produced exactly once.
    pub fn for_each_member(&self, mut visit: impl FnMut(&[usize])) {
        let n = self.n();
        let chain = self.positions();
        let mut order = self.reference.order().to_vec();
        let mut used = vec![false; n];
        fn recurse(
            chain: &[usize],
            next: usize,
            order: &mut [usize],
            used: &mut [bool],
            visit: &mut dyn FnMut(&[usize]),
        ) {
            let Some(offset) = chain[next..].iter().position(|&p| !used[p]) else {
                visit(order);
                return;
            };
            let idx = next + offset;
            let p = chain[idx];
            used[p] = true;
            for q in 0..order.len() {
                if used[q] {
                    continue;
                }
                used[q] = true;
                order.swap(p, q);
                recurse(chain, idx + 1, order, used, visit);
                order.swap(p, q);
                used[q] = false;
            }
            used[p] = false;
        }
        recurse(&chain, 0, &mut order, &mut used, &mut visit);
    }

    /// Number of members, counted without materialising tours.
    pub fn size(&self) -> u64 {
        let mut count = 0u64;
        self.for_each_member(|_| count += 1);
        count
    }
}

/// All members of a neighborhood, sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodSet {
    pub spec: ExchangeChainSpec,
    pub members: Vec<Tour>,
}

impl NeighborhoodSet {
    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, tour: &Tour) -> bool {
        self.members.binary_search(tour).is_ok()
    }
}

pub fn enumerate_neighborhood(spec: &ExchangeChainSpec) -> NeighborhoodSet {
    let mut members = Vec::new();
    spec.for_each_member(|order| members.push(Tour::from_order_unchecked(order.to_vec())));
    members.sort();
    members.dedup();
    NeighborhoodSet {
        spec: spec.clone(),
        members,
    }
}

/// Exact neighborhood size for `n` nodes, chain start `i₀` and length `l`.
/// The count does not depend on node labels, so the identity reference is used.
pub fn neighborhood_size(n: usize, start: usize, length: usize) -> Result<u64> {
    Ok(ExchangeChainSpec::new(Tour::identity(n), start, length)?.size())
}

/// The closed-form sample-count estimate `(n−1)! / (n−1−l)!`.
pub fn estimated_size(n: usize, length: usize) -> f64 {
    ((n - length)..n).map(|k| k as f64).product()
}

/// Members strictly cheaper than `y`.
pub fn improving_subset(instance: &TspInstance, neighborhood: &NeighborhoodSet, y: f64) -> Vec<Tour> {
    neighborhood
        .members
        .iter()
        .filter(|t| order_cost(instance, t.order()) < y)
        .cloned()
        .collect()
}

/// Simulates measuring the neighborhood superposition after `n_grover`
/// iterations with the improving members marked. Returns a member: a uniform
/// marked one with the Grover success probability, otherwise a uniform
/// unmarked one.
pub fn sample_neighborhood_grover<R: Rng + ?Sized>(
    neighborhood: &NeighborhoodSet,
    improving: &[Tour],
    n_grover: u64,
    rng: &mut R,
) -> Result<Tour> {
    if neighborhood.members.is_empty() {
        return Err(Error::Precondition("empty neighborhood".into()));
    }
    let mut marked: Vec<&Tour> = improving.iter().collect();
    marked.sort();
    marked.dedup();
    if let Some(t) = marked.iter().find(|t| !neighborhood.contains(t)) {
        return Err(Error::Precondition(format!(
            "{:?} is not a neighborhood member",
            t.order()
        )));
    }
    let size = neighborhood.size() as u64;
    let p = GroverRoundModel::new(size, marked.len() as u64)?.success_probability(n_grover);
    if rng.gen::<f64>() < p {
        return Ok(marked[rng.gen_range(0..marked.len())].clone());
    }
    let unmarked: Vec<&Tour> = neighborhood
        .members
        .iter()
        .filter(|t| marked.binary_search(t).is_err())
        .collect();
    Ok(unmarked[rng.gen_range(0..unmarked.len())].clone())
}

/// What the chain search needs from one neighborhood: its size and the
/// members that improve on the reference.
#[derive(Debug, Clone)]
pub struct NeighborhoodSummary {
    pub size: u64,
    pub improving: Vec<Tour>,
}

impl NeighborhoodSummary {
    pub fn scan(instance: &TspInstance, spec: &ExchangeChainSpec, y: f64) -> Self {
        let mut size = 0;
        let mut improving = Vec::new();
        spec.for_each_member(|order| {
            size += 1;
            if order_cost(instance, order) < y {
                improving.push(Tour::from_order_unchecked(order.to_vec()));
            }
        });
        improving.sort();
        Self { size, improving }
    }
}

/// Per-run memo of neighborhood summaries keyed by `(reference, i₀, l)`.
/// Entries for other references are dropped when the reference changes.
#[derive(Debug, Default)]
pub struct NeighborhoodCache {
    reference: Option<Tour>,
    entries: HashMap<(usize, usize), Arc<NeighborhoodSummary>>,
    hits: u64,
    misses: u64,
}

impl NeighborhoodCache {
    pub fn get(&mut self, instance: &TspInstance, spec: &ExchangeChainSpec) -> Arc<NeighborhoodSummary> {
        if self.reference.as_ref() != Some(spec.reference()) {
            self.reference = Some(spec.reference().clone());
            self.entries.clear();
        }
        let key = (spec.start(), spec.length());
        if let Some(hit) = self.entries.get(&key) {
            self.hits += 1;
            return hit.clone();
        }
        self.misses += 1;
        let y = order_cost(instance, spec.reference().order());
        let summary = Arc::new(NeighborhoodSummary::scan(instance, spec, y));
        self.entries.insert(key, summary.clone());
        summary
    }

    pub fn stats(&self) -> (u64, u64) {
        (self.hits, self.misses)
    }
}
