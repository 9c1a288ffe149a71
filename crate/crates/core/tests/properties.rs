//! Property tests over randomly generated inputs.

use fmuxnet::flows::{
    enumerate_aggregation_trees, min_mincut, optimal_sss, tree_packing_lp, RateVector, Schedule, ScheduleSet,
};
use fmuxnet::fmux::FmuxFunction;
use fmuxnet::graph::{triangle, Topology};
use fmuxnet::wireless::{self, Policy, WirelessConfig};
use fmuxnet::wireline::{self, counting_lemma_report, valid_footprint_sets, Counters, WirelineConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn function() -> impl Strategy<Value = FmuxFunction> {
    prop_oneof![
        Just(FmuxFunction::Parity),
        (2u32..64).prop_map(FmuxFunction::max),
        (1usize..4, 2u32..64).prop_map(|(k, a)| FmuxFunction::kth(k, a)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn combine_is_commutative_and_associative(f in function(), xs in prop::collection::vec(0u32..1000, 3)) {
        let a = f.alphabet_size();
        let p: Vec<_> = xs.iter().map(|x| f.lift(x % a).unwrap()).collect();
        prop_assert_eq!(f.combine(&p[0], &p[1]), f.combine(&p[1], &p[0]));
        prop_assert_eq!(
            f.combine(&f.combine(&p[0], &p[1]), &p[2]),
            f.combine(&p[0], &f.combine(&p[1], &p[2]))
        );
        prop_assert_eq!(f.combine(&p[0], &f.identity()), p[0].clone());
    }

    #[test]
    fn any_merge_order_gives_offline_value(f in function(), xs in prop::collection::vec(0u32..1000, 1..12), seed: u64) {
        let a = f.alphabet_size();
        let xs: Vec<u32> = xs.iter().map(|x| x % a).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut parts: Vec<_> = xs.iter().map(|&x| f.lift(x).unwrap()).collect();
        while parts.len() > 1 {
            let i = rng.random_range(0..parts.len());
            let p = parts.swap_remove(i);
            let j = rng.random_range(0..parts.len());
            parts[j] = f.combine(&parts[j], &p);
        }
        prop_assert_eq!(f.finalize(&parts[0]), f.offline_evaluate(&xs));
    }

    #[test]
    fn topological_order_respects_links(n in 2usize..12, p in 0.1f64..0.9, seed: u64) {
        let g = Topology::RandomDag { n, p, cap_min: 1, cap_max: 3, seed }.generate().unwrap();
        let order = g.topological_order().unwrap();
        prop_assert_eq!(order[0], g.aggregator());
        let mut pos = vec![0; n];
        for (k, &v) in order.iter().enumerate() {
            pos[v] = k;
        }
        for l in g.links() {
            prop_assert!(pos[l.from] > pos[l.to]);
        }
    }

    #[test]
    fn packing_is_feasible_and_tight(n in 3usize..6, p in 0.3f64..0.9, seed: u64) {
        let g = Topology::Random { n, p, cap_min: 1, cap_max: 4, seed }.generate().unwrap();
        let caps = RateVector::from_graph(&g);
        let trees = enumerate_aggregation_trees(&g, 100_000).unwrap();
        let packing = tree_packing_lp(&g, &caps, &trees).unwrap();
        prop_assert!(packing.entries.iter().all(|e| e.weight >= -1e-12));
        prop_assert!(packing.min_slack(&g, &caps) >= -1e-9);
        prop_assert!((packing.total - min_mincut(&g, &caps).value).abs() < 1e-6);
    }

    #[test]
    fn more_schedules_never_hurt(seed: u64, extra in prop::collection::vec(0.0f64..2.0, 3)) {
        let g = triangle();
        let base = ScheduleSet::singletons(&g, 1.0);
        let v0 = optimal_sss(&g, &base).unwrap().value;
        let mut schedules = base.schedules().to_vec();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let links: Vec<usize> = (0..3).filter(|_| rng.random_bool(0.5)).collect();
        if !links.is_empty() {
            let rates = links.iter().map(|&l| extra[l]).collect();
            schedules.push(Schedule { links, rates });
        }
        let richer = ScheduleSet::new(&g, schedules, None).unwrap();
        let v1 = optimal_sss(&g, &richer).unwrap().value;
        prop_assert!(v1 >= v0 - 1e-9);
        let doubled = ScheduleSet::singletons(&g, 2.0);
        prop_assert!((optimal_sss(&g, &doubled).unwrap().value - 2.0 * v0).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn wireline_invariants_on_random_dags(n in 3usize..8, seed: u64, lambda in 0.2f64..1.5) {
        let g = Topology::RandomDag { n, p: 0.5, cap_min: 1, cap_max: 3, seed }.generate().unwrap();
        let cfg = WirelineConfig { lambda, seed, horizon: 300.0, check_invariants: true, ..Default::default() };
        let m = wireline::run(&g, cfg).unwrap();
        prop_assert_eq!(m.oracle_checks, m.completed);
    }

    #[test]
    fn wireless_invariants_on_random_graphs(n in 3usize..6, seed: u64, lambda in 0.2f64..1.5) {
        let g = Topology::Random { n, p: 0.6, cap_min: 1, cap_max: 2, seed }.generate().unwrap();
        let gamma = ScheduleSet::singletons(&g, 1.0);
        let trees = enumerate_aggregation_trees(&g, 10_000).unwrap();
        for policy in [Policy::GreedyMaxweight, Policy::StaticSss] {
            let cfg = WirelessConfig { lambda, seed, horizon: 500, policy, check_invariants: true, ..Default::default() };
            let m = wireless::run(&g, &gamma, &trees, cfg).unwrap();
            prop_assert_eq!(m.oracle_checks, m.completed);
            prop_assert_eq!(m.conservation_checks, m.completed);
        }
    }

    #[test]
    fn same_seed_same_bytes(seed: u64) {
        let g = triangle();
        let cfg = WirelineConfig { lambda: 0.7, seed, horizon: 200.0, ..Default::default() };
        let mut a = Vec::new();
        let mut b = Vec::new();
        wireline::run(&g, cfg.clone()).unwrap().write_csv(&mut a).unwrap();
        wireline::run(&g, cfg).unwrap().write_csv(&mut b).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn flat_betas_are_caught() {
    let g = triangle();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let flat = vec![1.0; g.num_nodes() + 1];
    let found = (0..1000).any(|_| {
        let x: Counters = valid_footprint_sets(&g).into_iter().map(|s| (s, rng.random_range(0.0..10.0))).collect();
        !counting_lemma_report(&g, &x, 1.0, &flat).holds()
    });
    assert!(found);
}
