mod common;

use common::{all_permutations, brute_neighborhood};
use gas_tsp_core::grover::success_probability;
use gas_tsp_core::neighborhood::{
    enumerate_neighborhood, estimated_size, improving_subset, max_chain_length, neighborhood_size,
    sample_neighborhood_grover, ExchangeChainSpec, NeighborhoodCache,
};
use gas_tsp_core::{Tour, TspInstance};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn orders(spec: &ExchangeChainSpec) -> Vec<Vec<usize>> {
    enumerate_neighborhood(spec)
        .members
        .iter()
        .map(|t| t.order().to_vec())
        .collect()
}

#[test]
fn matches_brute_force_up_to_seven_nodes() {
    for n in 2..=7 {
        let reference: Vec<usize> = if n % 2 == 0 {
            (0..n).rev().collect()
        } else {
            (0..n).collect()
        };
        let tour = Tour::new(reference.clone()).unwrap();
        for l in 1..=max_chain_length(n) {
            for start in 0..n {
                let spec = ExchangeChainSpec::new(tour.clone(), start, l).unwrap();
                assert_eq!(
                    orders(&spec),
                    brute_neighborhood(&reference, start, l),
                    "n={n} l={l} start={start}"
                );
                assert_eq!(spec.size(), orders(&spec).len() as u64);
            }
        }
    }
}

#[test]
fn four_node_chain_of_two() {
    let spec = ExchangeChainSpec::new(Tour::identity(4), 0, 2).unwrap();
    assert_eq!(
        orders(&spec),
        vec![vec![1, 0, 2, 3], vec![2, 3, 0, 1], vec![3, 2, 1, 0]]
    );
}

#[test]
fn shifting_the_reference_shifts_the_chain() {
    let n = 7;
    let reference: Vec<usize> = vec![3, 6, 0, 2, 5, 1, 4];
    for l in 1..=3 {
        for start in 0..n {
            let base = orders(&ExchangeChainSpec::new(Tour::new(reference.clone()).unwrap(), start, l).unwrap());
            let rotated: Vec<usize> = (0..n).map(|t| reference[(t + 1) % n]).collect();
            let moved = orders(&ExchangeChainSpec::new(Tour::new(rotated).unwrap(), (start + n - 1) % n, l).unwrap());
            let mut unrotated: Vec<Vec<usize>> = moved
                .into_iter()
                .map(|o| (0..n).map(|t| o[(t + n - 1) % n]).collect())
                .collect();
            unrotated.sort();
            assert_eq!(base, unrotated);
        }
    }
}

#[test]
fn size_does_not_depend_on_start() {
    for n in 2..=10 {
        for l in 1..=max_chain_length(n) {
            let sizes: Vec<u64> = (0..n).map(|s| neighborhood_size(n, s, l).unwrap()).collect();
            assert!(sizes.windows(2).all(|w| w[0] == w[1]), "n={n} l={l}: {sizes:?}");
        }
    }
}

#[test]
fn size_relative_to_estimate() {
    let mut report = Vec::new();
    for n in [4usize, 6, 8, 10] {
        for l in 1..=max_chain_length(n) {
            let exact = neighborhood_size(n, 0, l).unwrap() as f64;
            let est = estimated_size(n, l);
            report.push(format!(
                "n={n} l={l} exact={exact} estimate={est} ratio={:.3}",
                exact / est
            ));
            assert!(exact <= est);
            if l == 1 {
                assert_eq!(exact, est);
            }
        }
    }
    println!("{}", report.join("\n"));
}

#[test]
fn members_are_permutations_and_exclude_reference() {
    let tour = Tour::new(vec![4, 2, 0, 5, 1, 3]).unwrap();
    let all = all_permutations(6);
    for l in 1..=3 {
        let set = enumerate_neighborhood(&ExchangeChainSpec::new(tour.clone(), 4, l).unwrap());
        assert!(!set.contains(&tour));
        for m in &set.members {
            assert!(all.binary_search(&m.order().to_vec()).is_ok());
        }
    }
}

#[test]
fn grover_sampling_frequency_matches_closed_form() {
    let inst = TspInstance::generate_random(6, 12, 1.0, 30.0).unwrap();
    let reference = Tour::new(vec![0, 3, 1, 5, 2, 4]).unwrap();
    let y = reference.cost(&inst).unwrap();
    let set = enumerate_neighborhood(&ExchangeChainSpec::new(reference, 1, 2).unwrap());
    let improving = improving_subset(&inst, &set, y);
    assert!(!improving.is_empty() && improving.len() < set.size());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for j in 0..4 {
        let p = success_probability(set.size() as u64, improving.len() as u64, j).unwrap();
        let draws = 20_000;
        let hits = (0..draws)
            .filter(|_| {
                let t = sample_neighborhood_grover(&set, &improving, j, &mut rng).unwrap();
                assert!(set.contains(&t));
                t.cost(&inst).unwrap() < y
            })
            .count() as f64;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt().max(1.0);
        assert!(
            (hits - draws as f64 * p).abs() <= 4.0 * sigma,
            "j={j} p={p} hits={hits}"
        );
    }
}

#[test]
fn cache_hits_on_repeat_and_resets_on_new_reference() {
    let inst = TspInstance::generate_random(8, 1, 1.0, 30.0).unwrap();
    let mut cache = NeighborhoodCache::default();
    let a = ExchangeChainSpec::new(Tour::identity(8), 2, 3).unwrap();
    let first = cache.get(&inst, &a);
    let second = cache.get(&inst, &a);
    assert_eq!(first.improving, second.improving);
    assert_eq!(cache.stats(), (1, 1));
    let b = ExchangeChainSpec::new(Tour::new(vec![1, 0, 2, 3, 4, 5, 6, 7]).unwrap(), 2, 3).unwrap();
    cache.get(&inst, &b);
    cache.get(&inst, &a);
    assert_eq!(cache.stats(), (1, 3));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn relabelling_preserves_structure(seed in 0u64..1000, start in 0usize..8, l in 1usize..=4) {
        let inst = TspInstance::generate_random(8, seed, 0.0, 1.0).unwrap();
        // a pseudo-random reference from the instance seed
        let mut reference: Vec<usize> = (0..8).collect();
        reference.sort_by(|&a, &b| inst.d(0, a).total_cmp(&inst.d(0, b)).then(a.cmp(&b)));
        let tour = Tour::new(reference.clone()).unwrap();
        let spec = ExchangeChainSpec::new(tour, start, l).unwrap();
        let ident = orders(&ExchangeChainSpec::new(Tour::identity(8), start, l).unwrap());
        let mut mapped: Vec<Vec<usize>> = ident.iter().map(|o| o.iter().map(|&p| reference[p]).collect()).collect();
        mapped.sort();
        prop_assert_eq!(orders(&spec), mapped);
    }
}
