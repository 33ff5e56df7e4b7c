mod common;

use std::collections::BTreeMap;

use common::{all_permutations, close, naive_canonical, naive_cost};
use gas_tsp_core::oracle::{
    enumerate_good_states, enumerate_good_states_with, factorial, held_karp_optimum, EnumerationOptions,
};
use gas_tsp_core::tour::greedy_tour;
use gas_tsp_core::TspInstance;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// canonical order -> (cost of canonical traversal, permutations in class)
fn brute_classes(inst: &TspInstance) -> BTreeMap<Vec<usize>, (f64, u64)> {
    let mut classes: BTreeMap<Vec<usize>, (f64, u64)> = BTreeMap::new();
    for perm in all_permutations(inst.n()) {
        let canon = naive_canonical(&perm);
        let cost = naive_cost(inst, &canon);
        classes.entry(canon).or_insert((cost, 0)).1 += 1;
    }
    classes
}

#[test]
fn example_threshold_13_by_brute_force() {
    let inst = TspInstance::new(
        "ex4",
        vec![
            vec![0.0, 1.0, 4.0, 3.0],
            vec![1.0, 0.0, 2.0, 5.0],
            vec![4.0, 2.0, 0.0, 6.0],
            vec![3.0, 5.0, 6.0, 0.0],
        ],
        None,
    )
    .unwrap();
    let brute: u64 = all_permutations(4)
        .iter()
        .filter(|p| naive_cost(&inst, p) < 13.0)
        .count() as u64;
    assert_eq!(brute, 8);
    let costs: Vec<f64> = brute_classes(&inst).values().map(|c| c.0).collect();
    assert_eq!(costs.len(), 3);
    let mut sorted = costs.clone();
    sorted.sort_by(f64::total_cmp);
    assert_eq!(sorted, vec![12.0, 14.0, 16.0]);
    assert_eq!(held_karp_optimum(&inst).unwrap().1, 12.0);
    assert_eq!(enumerate_good_states(&inst, 13.0).unwrap().total(), brute);
}

#[test]
fn held_karp_matches_brute_force_on_50_instances() {
    for k in 0..50u64 {
        let n = 5 + (k % 5) as usize;
        let inst = TspInstance::generate_random(n, 1000 + k, 1.0, 100.0).unwrap();
        let best = brute_classes(&inst).values().map(|c| c.0).fold(f64::INFINITY, f64::min);
        let (tour, cost) = held_karp_optimum(&inst).unwrap();
        assert_eq!(cost, best, "instance {k}, n = {n}");
        assert!(close(naive_cost(&inst, tour.order()), cost));
    }
}

#[test]
fn all_ones_optimum_is_n() {
    for n in 3..10 {
        let dist = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { 1.0 }).collect())
            .collect();
        let inst = TspInstance::new("ones", dist, None).unwrap();
        assert_eq!(held_karp_optimum(&inst).unwrap().1, n as f64);
    }
}

#[test]
fn enumeration_is_complete_for_small_n() {
    for (k, n) in [3usize, 4, 5, 6, 7].into_iter().enumerate() {
        let inst = TspInstance::generate_random(n, 77 + k as u64, 1.0, 20.0).unwrap();
        let classes = brute_classes(&inst);
        let mut costs: Vec<f64> = classes.values().map(|c| c.0).collect();
        costs.sort_by(f64::total_cmp);
        for threshold in [costs[0], costs[costs.len() / 3], costs[costs.len() - 1], f64::MAX] {
            let set = enumerate_good_states(&inst, threshold).unwrap();
            let expected: BTreeMap<Vec<usize>, (f64, u64)> = classes
                .iter()
                .filter(|(_, c)| c.0 < threshold)
                .map(|(k, v)| (k.clone(), *v))
                .collect();
            let got: BTreeMap<Vec<usize>, (f64, u64)> = set
                .entries()
                .iter()
                .map(|e| (e.tour.order().to_vec(), (e.cost, e.multiplicity)))
                .collect();
            assert_eq!(got, expected, "n = {n}, threshold = {threshold}");
            assert!(set.entries().windows(2).all(|w| w[0].cost <= w[1].cost));
        }
        let all = enumerate_good_states(&inst, f64::MAX).unwrap();
        assert_eq!(all.total(), factorial(n));
    }
}

#[test]
fn pruning_and_parallelism_do_not_change_results() {
    for seed in 0..6 {
        let inst = TspInstance::generate_random(8, seed, 1.0, 50.0).unwrap();
        let greedy = greedy_tour(&inst, 0).unwrap().cost(&inst).unwrap();
        let reference = enumerate_good_states_with(
            &inst,
            greedy,
            EnumerationOptions {
                prune: false,
                parallel: false,
            },
        )
        .unwrap();
        for prune in [false, true] {
            for parallel in [false, true] {
                let set = enumerate_good_states_with(&inst, greedy, EnumerationOptions { prune, parallel }).unwrap();
                assert_eq!(set, reference);
            }
        }
        let (_, opt) = held_karp_optimum(&inst).unwrap();
        assert!(reference.entries().iter().all(|e| opt <= e.cost));
    }
}

#[test]
fn marked_count_against_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in [5usize, 6, 7] {
        let inst = TspInstance::generate_random(n, n as u64, 1.0, 10.0).unwrap();
        let perms = all_permutations(n);
        let perm_costs: Vec<f64> = perms.iter().map(|p| naive_cost(&inst, &naive_canonical(p))).collect();
        let hi = perm_costs.iter().cloned().fold(0.0, f64::max) + 1.0;
        let set = enumerate_good_states(&inst, hi).unwrap();
        let (_, opt) = held_karp_optimum(&inst).unwrap();
        assert_eq!(set.marked_count(opt).unwrap(), 0);
        let mut last = 0;
        let mut ys: Vec<f64> = (0..40).map(|_| rng.gen_range(opt..hi)).collect();
        ys.sort_by(f64::total_cmp);
        for y in ys {
            let brute = perm_costs.iter().filter(|&&c| c < y).count() as u64;
            let got = set.marked_count(y).unwrap();
            assert_eq!(got, brute, "n = {n}, y = {y}");
            assert!(got >= last);
            last = got;
        }
    }
}

#[test]
fn sampling_follows_multiplicities() {
    // two classes below the threshold: multiplicities 8 (cost 4) and 16 (cost 5 twice)
    let inst = TspInstance::new(
        "two",
        vec![
            vec![0.0, 1.0, 1.0, 1.0],
            vec![1.0, 0.0, 1.0, 2.0],
            vec![1.0, 1.0, 0.0, 1.0],
            vec![1.0, 2.0, 1.0, 0.0],
        ],
        None,
    )
    .unwrap();
    // classes: (0,1,2,3) = 4, (0,1,3,2) = 5, (0,2,1,3) = 5
    let set = enumerate_good_states(&inst, 6.0).unwrap();
    assert_eq!(set.entries().len(), 3);
    let cheap_mult = set.marked_count(4.5).unwrap();
    assert_eq!(cheap_mult, 8);
    assert_eq!(set.marked_count(6.0).unwrap(), 24);

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let draws = 100_000;
    let mut cheap = 0u64;
    for _ in 0..draws {
        let t = set.sample_marked(6.0, &mut rng).unwrap();
        let c = t.cost(&inst).unwrap();
        assert!(c < 6.0);
        if c < 4.5 {
            cheap += 1;
        }
    }
    let p = 1.0 / 3.0;
    let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
    let dev = (cheap as f64 - draws as f64 * p).abs();
    assert!(dev <= 3.0 * sigma, "cheap draws {cheap}, expected {}", draws as f64 * p);
}

#[test]
fn greedy_never_beats_optimum() {
    for seed in 0..30 {
        let n = 4 + (seed % 6) as usize;
        let inst = TspInstance::generate_random(n, seed, 1.0, 100.0).unwrap();
        let (_, opt) = held_karp_optimum(&inst).unwrap();
        for start in 0..n {
            assert!(greedy_tour(&inst, start).unwrap().cost(&inst).unwrap() >= opt);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sampled_marked_tours_are_below_query(seed in 0u64..10_000, frac in 0.0f64..1.0) {
        let inst = TspInstance::generate_random(6, seed, 1.0, 10.0).unwrap();
        let set = enumerate_good_states(&inst, f64::MAX).unwrap();
        let lo = set.entries()[0].cost;
        let hi = set.entries().last().unwrap().cost;
        let y = lo + (hi - lo) * frac + 1e-9;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let t = set.sample_marked(y, &mut rng).unwrap();
            prop_assert!(t.cost(&inst).unwrap() < y);
        }
    }
}
