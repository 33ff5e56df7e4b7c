mod common;

use common::{close, naive_canonical, naive_cost};
use gas_tsp_core::{Tour, TspInstance};
use proptest::prelude::*;

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<usize>>()).prop_shuffle()
}

fn instance_and_tour() -> impl Strategy<Value = (TspInstance, Vec<usize>)> {
    (3usize..12, any::<u64>()).prop_flat_map(|(n, seed)| {
        let inst = TspInstance::generate_random(n, seed, 0.5, 1000.0).unwrap();
        (Just(inst), permutation(n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn json_round_trip_is_exact(n in 3usize..14, seed in any::<u64>()) {
        let inst = TspInstance::generate_random(n, seed, 0.0, 1e6).unwrap();
        let back = TspInstance::from_json(&inst.to_json().unwrap()).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(back.content_hash(), inst.content_hash());
    }

    #[test]
    fn tsplib_round_trip_is_exact(n in 3usize..14, seed in any::<u64>()) {
        let inst = TspInstance::generate_random(n, seed, 0.0, 1e6).unwrap();
        let back = TspInstance::parse_tsplib(&inst.to_tsplib()).unwrap();
        prop_assert_eq!(back.dist(), inst.dist());
        prop_assert_eq!(back.n(), inst.n());
    }

    #[test]
    fn cost_ignores_rotation_and_reversal((inst, order) in instance_and_tour(), k in 0usize..20) {
        let tour = Tour::new(order.clone()).unwrap();
        let c = tour.cost(&inst).unwrap();
        prop_assert!(close(c, naive_cost(&inst, &order)));
        prop_assert_eq!(tour.rotate(k % order.len()).cost(&inst).unwrap(), c);
        prop_assert_eq!(tour.reversed().cost(&inst).unwrap(), c);
        prop_assert_eq!(tour.canonicalize().cost(&inst).unwrap(), c);
    }

    #[test]
    fn canonical_form_matches_naive((_inst, order) in instance_and_tour()) {
        let tour = Tour::new(order.clone()).unwrap();
        prop_assert_eq!(tour.canonicalize().order().to_vec(), naive_canonical(&order));
        let n = order.len();
        let variants: std::collections::BTreeSet<Vec<usize>> = (0..n)
            .flat_map(|k| {
                let r = tour.rotate(k);
                [r.order().to_vec(), r.reversed().order().to_vec()]
            })
            .collect();
        prop_assert_eq!(tour.class_multiplicity(), variants.len() as u64);
    }

    #[test]
    fn one_hot_round_trip((_inst, order) in instance_and_tour()) {
        let tour = Tour::new(order.clone()).unwrap();
        let bits = tour.to_one_hot();
        prop_assert_eq!(bits.iter().filter(|&&b| b).count(), order.len());
        prop_assert_eq!(Tour::from_one_hot(order.len(), &bits).unwrap(), tour);
    }

    #[test]
    fn non_permutations_are_rejected(v in proptest::collection::vec(0usize..6, 1..7)) {
        let mut sorted = v.clone();
        sorted.sort();
        let is_perm = sorted == (0..v.len()).collect::<Vec<_>>();
        prop_assert_eq!(Tour::new(v).is_ok(), is_perm);
    }
}
