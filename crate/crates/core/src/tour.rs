//! Time-indexed tours.
//!
//! A [`Tour`] stores the node visited at each timestep. This is the
//! permutation view of a feasible one-hot assignment `x[i][t]`: exactly one
//! node per timestep and each node exactly once.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::TspInstance;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawTour")]
pub struct Tour {
    order: Vec<usize>,
}

#[derive(Deserialize)]
struct RawTour {
    order: Vec<usize>,
}

impl TryFrom<RawTour> for Tour {
    type Error = Error;

    fn try_from(raw: RawTour) -> Result<Self> {
        Tour::new(raw.order)
    }
}

impl Tour {
    /// Validates that `order` is a permutation of `0..order.len()`.
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        let mut seen = vec![false; n];
        for &v in &order {
            if v >= n || seen[v] {
                return Err(Error::Parameter(format!("{order:?} is not a permutation of 0..{n}")));
            }
            seen[v] = true;
        }
        Ok(Self { order })
    }

    pub(crate) fn from_order_unchecked(order: Vec<usize>) -> Self {
        debug_assert!(Tour::new(order.clone()).is_ok());
        Self { order }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            order: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn into_order(self) -> Vec<usize> {
        self.order
    }

    /// Node at timestep `t`.
    #[inline]
    pub fn at(&self, t: usize) -> usize {
        self.order[t]
    }

    /// Closed-loop length; the edge from the last timestep back to the first
    /// is included once.
    pub fn cost(&self, instance: &TspInstance) -> Result<f64> {
        if self.order.len() != instance.n() {
            return Err(Error::Parameter(format!(
                "tour has {} nodes, instance has {}",
                self.order.len(),
                instance.n()
            )));
        }
        Ok(order_cost(instance, &self.order))
    }

    /// Shifts the start: timestep `t` of the result is timestep `t + k` here.
    pub fn rotate(&self, k: usize) -> Tour {
        let mut order = self.order.clone();
        if !order.is_empty() {
            order.rotate_left(k % self.order.len());
        }
        Tour { order }
    }

    pub fn reversed(&self) -> Tour {
        let mut order = self.order.clone();
        order.reverse();
        Tour { order }
    }

    /// Lexicographically smallest sequence among all rotations and
    /// reversals. For `n >= 1` it starts with node 0.
    pub fn canonicalize(&self) -> Tour {
        let n = self.order.len();
        if n < 3 {
            return self.clone();
        }
        let zero = self.order.iter().position(|&v| v == 0).expect("permutation contains 0");
        let forward: Vec<usize> = (0..n).map(|k| self.order[(zero + k) % n]).collect();
        let backward: Vec<usize> = (0..n).map(|k| self.order[(zero + n - k) % n]).collect();
        Tour {
            order: forward.min(backward),
        }
    }

    /// Number of distinct time-indexed permutations describing the same
    /// cycle, counted explicitly over the `2n` rotations and reflections.
    pub fn class_multiplicity(&self) -> u64 {
        class_multiplicity(&self.order)
    }

    /// One-hot encoding, row-major by timestep: bit `t * n + v` is set when
    /// node `v` is visited at timestep `t`.
    pub fn to_one_hot(&self) -> Vec<bool> {
        let n = self.order.len();
        let mut bits = vec![false; n * n];
        for (t, &v) in self.order.iter().enumerate() {
            bits[t * n + v] = true;
        }
        bits
    }

    pub fn from_one_hot(n: usize, bits: &[bool]) -> Result<Tour> {
        if bits.len() != n * n {
            return Err(Error::Parameter(format!("expected {} bits, got {}", n * n, bits.len())));
        }
        let mut order = Vec::with_capacity(n);
        for t in 0..n {
            let row = &bits[t * n..(t + 1) * n];
            let mut set = row.iter().enumerate().filter(|(_, &b)| b).map(|(v, _)| v);
            match (set.next(), set.next()) {
                (Some(v), None) => order.push(v),
                _ => return Err(Error::Parameter(format!("timestep {t} is not one-hot"))),
            }
        }
        Tour::new(order)
    }
}

/// Edge sum taken along the canonical traversal (from node 0, toward its
/// smaller neighbour). Every rotation and reflection of a cycle therefore
/// yields the bit-identical `f64`.
pub(crate) fn order_cost(instance: &TspInstance, order: &[usize]) -> f64 {
    let n = order.len();
    let zero = order.iter().position(|&v| v == 0).unwrap_or(0);
    let next = order[(zero + 1) % n];
    let prev = order[(zero + n - 1) % n];
    let step = if next <= prev { 1 } else { n - 1 };
    let mut total = 0.0;
    let mut t = zero;
    for _ in 0..n {
        let u = (t + step) % n;
        total += instance.d(order[t], order[u]);
        t = u;
    }
    total
}

/// The stabilizer of a cycle under the dihedral action, counted directly.
pub(crate) fn class_multiplicity(order: &[usize]) -> u64 {
    let n = order.len();
    let mut stabilizer = 0u64;
    for k in 0..n {
        if (0..n).all(|t| order[(t + k) % n] == order[t]) {
            stabilizer += 1;
        }
        if (0..n).all(|t| order[(k + n - t) % n] == order[t]) {
            stabilizer += 1;
        }
    }
    (2 * n as u64) / stabilizer
}

/// Nearest-neighbour tour from `start`; ties go to the smallest node index.
pub fn greedy_tour(instance: &TspInstance, start: usize) -> Result<Tour> {
    let n = instance.n();
    if start >= n {
        return Err(Error::Parameter(format!("start node {start} out of range for n = {n}")));
    }
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut current = start;
    visited[current] = true;
    order.push(current);
    while order.len() < n {
        let next = (0..n)
            .filter(|&v| !visited[v])
            .fold(None, |best: Option<usize>, v| match best {
                Some(b) if instance.d(current, b) <= instance.d(current, v) => Some(b),
                _ => Some(v),
            })
            .expect("an unvisited node remains");
        visited[next] = true;
        order.push(next);
        current = next;
    }
    Ok(Tour { order })
}
