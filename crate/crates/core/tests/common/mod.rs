//! Brute-force oracles shared by the integration tests. Nothing here calls
//! into the code paths it is used to check.

#![allow(dead_code)]

use gas_tsp_core::TspInstance;

/// Every permutation of `0..n` in lexicographic order.
pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    let mut used = vec![false; n];
    fn rec(n: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for v in 0..n {
            if !used[v] {
                used[v] = true;
                cur.push(v);
                rec(n, cur, used, out);
                cur.pop();
                used[v] = false;
            }
        }
    }
    rec(n, &mut cur, &mut used, &mut out);
    out
}

/// Plain sequential closed-loop sum starting at timestep 0.
pub fn naive_cost(inst: &TspInstance, order: &[usize]) -> f64 {
    let n = order.len();
    (0..n).map(|t| inst.dist()[order[t]][order[(t + 1) % n]]).sum()
}

/// Smallest rotation/reflection, computed by listing all 2n variants.
pub fn naive_canonical(order: &[usize]) -> Vec<usize> {
    let n = order.len();
    let mut best: Option<Vec<usize>> = None;
    for k in 0..n {
        let fwd: Vec<usize> = (0..n).map(|t| order[(t + k) % n]).collect();
        let mut bwd = fwd.clone();
        bwd.reverse();
        for cand in [fwd, bwd] {
            if best.as_ref().is_none_or(|b| cand < *b) {
                best = Some(cand);
            }
        }
    }
    best.unwrap()
}

/// Tolerance for comparing a naive float sum with the library's cost.
pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Explicit Grover simulation on an `ns`-dimensional real vector: the first
/// `m` basis states are marked; each iteration is the oracle reflection
/// followed by reflection about the uniform state. Returns the marked mass.
pub fn explicit_grover(ns: usize, m: usize, j: usize) -> f64 {
    let init = 1.0 / (ns as f64).sqrt();
    let mut amp = vec![init; ns];
    for _ in 0..j {
        for a in amp.iter_mut().take(m) {
            *a = -*a;
        }
        // diffusion 2|s><s| - I, applied as an explicit matrix-vector product
        let next: Vec<f64> = (0..ns)
            .map(|row| {
                (0..ns)
                    .map(|col| {
                        let d = 2.0 / ns as f64 - if row == col { 1.0 } else { 0.0 };
                        d * amp[col]
                    })
                    .sum()
            })
            .collect();
        amp = next;
    }
    amp.iter().take(m).map(|a| a * a).sum()
}

/// Position permutations of a chain neighborhood, characterised directly:
/// an involution that moves every chain position and pairs every other moved
/// position with a chain position.
pub fn brute_neighborhood(reference: &[usize], start: usize, len: usize) -> Vec<Vec<usize>> {
    let n = reference.len();
    let chain: Vec<usize> = (0..len).map(|s| (start + s) % n).collect();
    let mut out = Vec::new();
    for perm in all_permutations(n) {
        let involution = (0..n).all(|p| perm[perm[p]] == p);
        let chain_moved = chain.iter().all(|&p| perm[p] != p);
        let touches_chain = (0..n)
            .filter(|&p| perm[p] != p)
            .all(|p| chain.contains(&p) || chain.contains(&perm[p]));
        if involution && chain_moved && touches_chain {
            out.push((0..n).map(|t| reference[perm[t]]).collect());
        }
    }
    out.sort();
    out
}

/// Dense statevector simulator over `2^q` complex amplitudes, used to
/// cross-check the sparse simulator gate by gate.
pub struct Dense {
    pub q: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl Dense {
    pub fn zero(q: usize) -> Self {
        let mut re = vec![0.0; 1 << q];
        re[0] = 1.0;
        Self {
            q,
            re,
            im: vec![0.0; 1 << q],
        }
    }

    /// Applies the 2x2 real matrix `u` to `target` on every basis pair whose
    /// controls `(qubit, on)` are satisfied.
    pub fn apply(&mut self, u: [[f64; 2]; 2], target: usize, controls: &[(usize, bool)]) {
        let bit = 1usize << target;
        for i in 0..(1usize << self.q) {
            if i & bit != 0 {
                continue;
            }
            if !controls.iter().all(|&(c, on)| ((i >> c) & 1 == 1) == on) {
                continue;
            }
            let j = i | bit;
            let (r0, i0, r1, i1) = (self.re[i], self.im[i], self.re[j], self.im[j]);
            self.re[i] = u[0][0] * r0 + u[0][1] * r1;
            self.im[i] = u[0][0] * i0 + u[0][1] * i1;
            self.re[j] = u[1][0] * r0 + u[1][1] * r1;
            self.im[j] = u[1][0] * i0 + u[1][1] * i1;
        }
    }
}

pub fn x_matrix() -> [[f64; 2]; 2] {
    [[0.0, 1.0], [1.0, 0.0]]
}

pub fn ry_matrix(theta: f64) -> [[f64; 2]; 2] {
    let (s, c) = (theta / 2.0).sin_cos();
    [[c, -s], [s, c]]
}
