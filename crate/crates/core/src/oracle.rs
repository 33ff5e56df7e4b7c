//! Exact classical oracles: the optimum via Held–Karp and the complete
//! multiset of tours below a threshold.
//!
//! The good-state set is stored per cycle class (rotation/reflection orbit)
//! with the number of time-indexed permutations in each class, so that the
//! marked count `M` over the `n!` feasible one-hot states is exact without
//! materialising every permutation.

use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::TspInstance;
use crate::tour::{class_multiplicity, Tour};

/// Default node limit for Held–Karp (the table has `2^(n-1) * (n-1)` cells).
pub const HELD_KARP_LIMIT: usize = 16;

/// Node limit for good-state enumeration. `n!` must also fit in a `u64`.
pub const ENUMERATION_LIMIT: usize = 13;

pub fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Optimal tour and cost with the default size limit.
pub fn held_karp_optimum(instance: &TspInstance) -> Result<(Tour, f64)> {
    held_karp_optimum_with_limit(instance, HELD_KARP_LIMIT)
}

pub fn held_karp_optimum_with_limit(instance: &TspInstance, limit: usize) -> Result<(Tour, f64)> {
    let n = instance.n();
    if n > limit || n > 24 {
        return Err(Error::Capability(format!(
            "Held-Karp limited to n <= {limit}, instance has n = {n}"
        )));
    }
    // Subsets range over nodes 1..n, bit (v - 1) for node v.
    let m = n - 1;
    let full = (1usize << m) - 1;
    let mut best = vec![f64::INFINITY; (1 << m) * m];
    let mut parent = vec![u8::MAX; (1 << m) * m];
    for v in 0..m {
        best[(1 << v) * m + v] = instance.d(0, v + 1);
    }
    for mask in 1..=full {
        for last in 0..m {
            if mask & (1 << last) == 0 {
                continue;
            }
            let here = best[mask * m + last];
            if !here.is_finite() {
                continue;
            }
            for next in 0..m {
                if mask & (1 << next) != 0 {
                    continue;
                }
                let nmask = mask | (1 << next);
                let cand = here + instance.d(last + 1, next + 1);
                let slot = nmask * m + next;
                if cand < best[slot] {
                    best[slot] = cand;
                    parent[slot] = last as u8;
                }
            }
        }
    }
    let (mut last, _) = (0..m)
        .map(|v| (v, best[full * m + v] + instance.d(v + 1, 0)))
        .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    let mut order = Vec::with_capacity(n);
    let mut mask = full;
    loop {
        order.push(last + 1);
        let p = parent[mask * m + last];
        mask &= !(1 << last);
        if p == u8::MAX {
            break;
        }
        last = p as usize;
    }
    order.push(0);
    order.reverse();
    let tour = Tour::new(order)?;
    let cost = tour.cost(instance)?;
    Ok((tour, cost))
}

/// One cycle class below the threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "(f64, Tour, u64)", from = "(f64, Tour, u64)")]
pub struct GoodStateEntry {
    pub cost: f64,
    /// Canonical representative.
    pub tour: Tour,
    /// Time-indexed permutations in the class.
    pub multiplicity: u64,
}

impl From<GoodStateEntry> for (f64, Tour, u64) {
    fn from(e: GoodStateEntry) -> Self {
        (e.cost, e.tour, e.multiplicity)
    }
}

impl From<(f64, Tour, u64)> for GoodStateEntry {
    fn from((cost, tour, multiplicity): (f64, Tour, u64)) -> Self {
        Self {
            cost,
            tour,
            multiplicity,
        }
    }
}

/// All feasible time-indexed tours with cost strictly below `threshold`,
/// grouped by cycle class and sorted by ascending cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGoodStateSet")]
pub struct GoodStateSet {
    threshold: f64,
    entries: Vec<GoodStateEntry>,
    space_size: u64,
    #[serde(skip)]
    prefix: Vec<u64>,
}

#[derive(Deserialize)]
struct RawGoodStateSet {
    threshold: f64,
    entries: Vec<GoodStateEntry>,
    space_size: u64,
}

impl TryFrom<RawGoodStateSet> for GoodStateSet {
    type Error = Error;

    fn try_from(raw: RawGoodStateSet) -> Result<Self> {
        let set = GoodStateSet::from_entries(raw.threshold, raw.entries, raw.space_size);
        set.validate()?;
        Ok(set)
    }
}

impl GoodStateSet {
    fn from_entries(threshold: f64, mut entries: Vec<GoodStateEntry>, space_size: u64) -> Self {
        entries.sort_by(|a, b| a.cost.total_cmp(&b.cost).then_with(|| a.tour.cmp(&b.tour)));
        let mut prefix = Vec::with_capacity(entries.len() + 1);
        prefix.push(0);
        let mut acc = 0u64;
        for e in &entries {
            acc += e.multiplicity;
            prefix.push(acc);
        }
        Self {
            threshold,
            entries,
            space_size,
            prefix,
        }
    }

    fn validate(&self) -> Result<()> {
        if let Some(e) = self
            .entries
            .iter()
            .find(|e| !(e.cost < self.threshold) || e.multiplicity == 0)
        {
            return Err(Error::Schema(format!(
                "entry with cost {} and multiplicity {} violates threshold {}",
                e.cost, e.multiplicity, self.threshold
            )));
        }
        if self.total() > self.space_size {
            return Err(Error::Schema("multiplicities exceed the space size".into()));
        }
        Ok(())
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn entries(&self) -> &[GoodStateEntry] {
        &self.entries
    }

    /// `n!`, the number of feasible one-hot states.
    pub fn space_size(&self) -> u64 {
        self.space_size
    }

    /// Total multiplicity, i.e. `M` at the enumeration threshold.
    pub fn total(&self) -> u64 {
        *self.prefix.last().unwrap_or(&0)
    }

    /// Time-indexed tours with cost strictly below `y`.
    pub fn marked_count(&self, y: f64) -> Result<u64> {
        if y > self.threshold {
            return Err(Error::OutOfRange(format!(
                "query {y} above enumeration threshold {}",
                self.threshold
            )));
        }
        Ok(self.prefix[self.entries.partition_point(|e| e.cost < y)])
    }

    /// Draws a marked permutation uniformly: a class is picked with weight
    /// equal to its multiplicity, then a uniform rotation/reflection of its
    /// representative.
    pub fn sample_marked<R: Rng + ?Sized>(&self, y: f64, rng: &mut R) -> Result<Tour> {
        let marked = self.marked_count(y)?;
        if marked == 0 {
            return Err(Error::Precondition(format!("no tour below {y}")));
        }
        let u = rng.gen_range(0..marked);
        let class = self.prefix.partition_point(|&p| p <= u) - 1;
        let rep = &self.entries[class].tour;
        let n = rep.len();
        let k = rng.gen_range(0..n);
        let tour = if rng.gen::<bool>() { rep.reversed() } else { rep.clone() };
        Ok(tour.rotate(k))
    }

    pub fn save(&self, path: impl AsRef<Path>, instance: &TspInstance) -> Result<()> {
        let doc = CacheFile {
            instance_hash: instance.content_hash(),
            set: self.clone(),
        };
        let text = serde_json::to_string(&doc)?;
        std::fs::write(path.as_ref(), text).map_err(|e| Error::io(path, e))
    }

    /// Loads a cache written by [`GoodStateSet::save`]; `None` when the file
    /// belongs to a different instance.
    pub fn load(path: impl AsRef<Path>, instance: &TspInstance) -> Result<Option<Self>> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(&path, e))?;
        let doc: CacheFile = serde_json::from_str(&text)?;
        if doc.instance_hash != instance.content_hash() || doc.set.space_size != factorial(instance.n()) {
            return Ok(None);
        }
        Ok(Some(doc.set))
    }
}

#[derive(Serialize, Deserialize)]
struct CacheFile {
    instance_hash: String,
    #[serde(flatten)]
    set: GoodStateSet,
}

/// Enumeration switches. Pruning never changes the result.
#[derive(Debug, Clone, Copy)]
pub struct EnumerationOptions {
    pub prune: bool,
    pub parallel: bool,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        Self {
            prune: true,
            parallel: true,
        }
    }
}

pub fn enumerate_good_states(instance: &TspInstance, threshold: f64) -> Result<GoodStateSet> {
    enumerate_good_states_with(instance, threshold, EnumerationOptions::default())
}

/// Branch-and-bound over canonical cycles (node 0 first, second node
/// smaller than the last).
pub fn enumerate_good_states_with(
    instance: &TspInstance,
    threshold: f64,
    options: EnumerationOptions,
) -> Result<GoodStateSet> {
    let n = instance.n();
    if n > ENUMERATION_LIMIT {
        return Err(Error::Capability(format!(
            "good-state enumeration limited to n <= {ENUMERATION_LIMIT}, instance has n = {n}"
        )));
    }
    if threshold.is_nan() || threshold == f64::NEG_INFINITY {
        return Err(Error::Parameter(format!("invalid threshold {threshold}")));
    }
    let search = Search::new(instance, threshold, options.prune);
    let seeds: Vec<(usize, usize)> = (1..n)
        .flat_map(|a| (1..n).filter(move |&b| b != a).map(move |b| (a, b)))
        // the reflection rule needs order[1] < order[n-1]; n = 3 has no slack
        .filter(|&(a, _)| a < n - 1 || n == 3)
        .collect();
    let run = |&(a, b): &(usize, usize)| search.under_prefix(a, b);
    let chunks: Vec<Vec<GoodStateEntry>> = if options.parallel {
        seeds.par_iter().map(run).collect()
    } else {
        seeds.iter().map(run).collect()
    };
    let entries = chunks.into_iter().flatten().collect();
    Ok(GoodStateSet::from_entries(threshold, entries, factorial(n)))
}

struct Search<'a> {
    instance: &'a TspInstance,
    threshold: f64,
    prune: bool,
    min_in: Vec<f64>,
}

impl<'a> Search<'a> {
    fn new(instance: &'a TspInstance, threshold: f64, prune: bool) -> Self {
        let n = instance.n();
        let min_in = (0..n)
            .map(|v| {
                (0..n)
                    .filter(|&u| u != v)
                    .map(|u| instance.d(u, v))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        Self {
            instance,
            threshold,
            prune,
            min_in,
        }
    }

    fn under_prefix(&self, a: usize, b: usize) -> Vec<GoodStateEntry> {
        let n = self.instance.n();
        let mut out = Vec::new();
        let mut path = Vec::with_capacity(n);
        path.extend_from_slice(&[0, a, b]);
        if n == 3 {
            if a < b {
                self.leaf(&path, self.instance.d(0, a) + self.instance.d(a, b), &mut out);
            }
            return out;
        }
        let visited = 1u64 | (1 << a) | (1 << b);
        let partial = self.instance.d(0, a) + self.instance.d(a, b);
        self.descend(&mut path, visited, partial, &mut out);
        out
    }

    fn descend(&self, path: &mut Vec<usize>, visited: u64, partial: f64, out: &mut Vec<GoodStateEntry>) {
        let n = self.instance.n();
        if self.prune {
            // Prefix sums are accumulated in the same order as the final
            // cost, so `partial >= threshold` is an exact cut.
            if partial >= self.threshold {
                return;
            }
            let remaining: f64 = (1..n)
                .filter(|v| visited & (1 << v) == 0)
                .map(|v| self.min_in[v])
                .sum::<f64>()
                + self.min_in[0];
            if partial + remaining > self.threshold + 1e-9 * self.threshold.abs() {
                return;
            }
        }
        let last = *path.last().expect("path starts at node 0");
        if path.len() == n {
            self.leaf(path, partial, out);
            return;
        }
        for v in 1..n {
            if visited & (1 << v) != 0 {
                continue;
            }
            // last slot must exceed order[1] for the canonical direction
            if path.len() == n - 1 && v < path[1] {
                continue;
            }
            path.push(v);
            self.descend(path, visited | (1 << v), partial + self.instance.d(last, v), out);
            path.pop();
        }
    }

    fn leaf(&self, path: &[usize], partial: f64, out: &mut Vec<GoodStateEntry>) {
        let last = *path.last().expect("non-empty");
        let cost = partial + self.instance.d(last, 0);
        if cost < self.threshold {
            out.push(GoodStateEntry {
                cost,
                tour: Tour::from_order_unchecked(path.to_vec()),
                multiplicity: class_multiplicity(path),
            });
        }
    }
}
