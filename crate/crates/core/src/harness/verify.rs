//! Batch invariant checks over all modules.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::flows::{
    complete_graph_depth2_trees, enumerate_aggregation_trees, max_flow, min_mincut, tree_packing_lp, RateVector,
    ScheduleSet,
};
use crate::fmux::{FmuxFunction, Value};
use crate::graph::{triangle, NetworkGraph, Topology};
use crate::wireless::{self, Policy, WirelessConfig};
use crate::wireline::{self, valid_footprint_sets, verify_counting_lemma, Counters, WirelineConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Flows,
    Fmux,
    Wireline,
    Wireless,
    All,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub suite: Suite,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

pub fn verify(suite: Suite) -> VerifyReport {
    let suites = match suite {
        Suite::All => vec![Suite::Flows, Suite::Fmux, Suite::Wireline, Suite::Wireless],
        s => vec![s],
    };
    let mut checks = Vec::new();
    for s in suites {
        let mut add = |name: &str, r: Result<String, String>| {
            let (passed, detail) = match r {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            checks.push(CheckResult { suite: s, name: name.to_string(), passed, detail });
        };
        match s {
            Suite::Flows => {
                add("edmonds_equality", edmonds_equality(50));
                add("max_flow_cut_capacity", cut_capacity(50));
                add("complete_graph_packing", complete_graph_packing());
            }
            Suite::Fmux => {
                add("combine_order_invariance", permutation_invariance(10_000));
                add("divisibility_over_partitions", partitions(1000));
                add("constant_payload_size", payload_size());
            }
            Suite::Wireline => {
                add("triangle_oracle_and_invariants", wireline_triangle(10_000));
                add("complete_graph_invariants", wireline_k5(10_000));
                add("counting_lemma", counting_lemma(10_000));
            }
            Suite::Wireless => {
                add("greedy_maxweight_type_at", wireless_fixture(Policy::GreedyMaxweight, 10_000));
                add("static_sss_type_at", wireless_fixture(Policy::StaticSss, 10_000));
            }
            Suite::All => unreachable!(),
        }
    }
    VerifyReport { passed: checks.iter().all(|c| c.passed), checks }
}

fn random_graphs(count: u64) -> Vec<NetworkGraph> {
    (0..count)
        .map(|seed| {
            let n = 3 + (seed % 5) as usize;
            Topology::Random { n, p: 0.5, cap_min: 1, cap_max: 4, seed }.generate().expect("generator succeeds")
        })
        .collect()
}

fn edmonds_equality(count: u64) -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for (k, g) in random_graphs(count).iter().enumerate() {
        let caps = RateVector::from_graph(g);
        let trees = enumerate_aggregation_trees(g, 100_000).map_err(|e| e.to_string())?;
        let p = tree_packing_lp(g, &caps, &trees).map_err(|e| e.to_string())?;
        let d = min_mincut(g, &caps).value;
        let gap = (p.total - d).abs();
        worst = worst.max(gap);
        if gap > 1e-6 || p.min_slack(g, &caps) < -1e-9 {
            return Err(format!("graph {k}: packing {} vs min-mincut {d}", p.total));
        }
    }
    Ok(format!("{count} graphs, max |packing - min-mincut| = {worst:.2e}"))
}

fn cut_capacity(count: u64) -> Result<String, String> {
    for (k, g) in random_graphs(count).iter().enumerate() {
        let caps = RateVector::from_graph(g);
        for s in g.sensors() {
            let f = max_flow(g, &caps, s, g.aggregator());
            let cap: f64 = g
                .links()
                .iter()
                .enumerate()
                .filter(|(_, l)| f.cut.contains(&l.from) && !f.cut.contains(&l.to))
                .map(|(id, _)| caps[id])
                .sum();
            if (cap - f.value).abs() > 1e-9 {
                return Err(format!("graph {k}, source {s}: cut {cap} vs flow {}", f.value));
            }
        }
    }
    Ok(format!("{count} graphs"))
}

fn complete_graph_packing() -> Result<String, String> {
    let g = Topology::Complete { n: 5, capacity: 1.0 }.generate().map_err(|e| e.to_string())?;
    let caps = RateVector::from_graph(&g);
    let d = min_mincut(&g, &caps).value;
    let witness = complete_graph_depth2_trees(&g).map_err(|e| e.to_string())?;
    let p = tree_packing_lp(&g, &caps, &witness).map_err(|e| e.to_string())?;
    if d != 4.0 || (p.total - 4.0).abs() > 1e-9 || p.min_slack(&g, &caps) < -1e-9 {
        return Err(format!("min-mincut {d}, depth-2 packing {}", p.total));
    }
    Ok("min-mincut 4, depth-2 packing 4".into())
}

fn functions() -> [FmuxFunction; 3] {
    [FmuxFunction::Parity, FmuxFunction::max(16), FmuxFunction::kth(2, 16)]
}

fn permutation_invariance(samples: usize) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for f in functions() {
        for _ in 0..samples {
            let n = rng.random_range(1..10);
            let mut xs: Vec<Value> = (0..n).map(|_| rng.random_range(0..f.alphabet_size())).collect();
            let a = f.lift_and_combine(&xs).map_err(|e| e.to_string())?;
            xs.shuffle(&mut rng);
            let b = f.lift_and_combine(&xs).map_err(|e| e.to_string())?;
            if a != b || f.finalize(&a) != f.offline_evaluate(&xs) {
                return Err(format!("{}: order changed the result for {xs:?}", f.name()));
            }
        }
    }
    Ok(format!("{samples} permutations per function"))
}

fn partitions(samples: usize) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for f in [FmuxFunction::Parity, FmuxFunction::max(8), FmuxFunction::kth(2, 8)] {
        for _ in 0..samples {
            let xs: Vec<Value> = (0..6).map(|_| rng.random_range(0..f.alphabet_size())).collect();
            let parts = rng.random_range(1..=6);
            let mut partition = vec![Vec::new(); parts];
            for i in 0..6 {
                partition[rng.random_range(0..parts)].push(i);
            }
            partition.retain(|p| !p.is_empty());
            if !f.check_divisible(&partition, &xs).map_err(|e| e.to_string())? {
                return Err(format!("{}: partition {partition:?} of {xs:?}", f.name()));
            }
        }
    }
    Ok(format!("{samples} partitions per function"))
}

fn payload_size() -> Result<String, String> {
    for f in functions() {
        let a = f.alphabet_size();
        let many: Vec<Value> = [1, 3, 0, 2, 5, 7].iter().map(|x| x % a).collect();
        let one = f.encode(&f.lift_and_combine(&[1]).map_err(|e| e.to_string())?).len();
        let many = f.encode(&f.lift_and_combine(&many).map_err(|e| e.to_string())?).len();
        if one != many {
            return Err(format!("{}: {one} vs {many} bytes", f.name()));
        }
    }
    Ok("payload length independent of input count".into())
}

fn wireline_triangle(rounds: u64) -> Result<String, String> {
    let g = triangle();
    let mut total = 0;
    for f in functions() {
        let cfg = WirelineConfig {
            lambda: 0.5,
            function: f,
            seed: 5,
            horizon: rounds as f64 * 2.4,
            check_invariants: true,
            ..Default::default()
        };
        let m = wireline::run(&g, cfg).map_err(|e| e.to_string())?;
        if m.oracle_checks < rounds {
            return Err(format!("{}: only {} rounds completed", f.name(), m.oracle_checks));
        }
        total += m.oracle_checks;
    }
    Ok(format!("{total} rounds oracle-checked, invariants checked after every event"))
}

fn wireline_k5(events: u64) -> Result<String, String> {
    let g = Topology::Complete { n: 5, capacity: 1.0 }.generate().map_err(|e| e.to_string())?;
    let cfg = WirelineConfig {
        lambda: 3.0,
        seed: 6,
        horizon: events as f64 / 10.0,
        check_invariants: true,
        allow_cyclic: true,
        ..Default::default()
    };
    let m = wireline::run(&g, cfg).map_err(|e| e.to_string())?;
    if m.invariant_checks < events {
        return Err(format!("only {} events", m.invariant_checks));
    }
    Ok(format!("{} events checked, {} rounds completed", m.invariant_checks, m.completed))
}

/// Random nonnegative counter vectors on the triangle fixture.
pub(crate) fn random_counters(g: &NetworkGraph, rng: &mut impl Rng) -> Counters {
    valid_footprint_sets(g)
        .into_iter()
        .map(|s| (s, if rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.0..10.0) }))
        .collect()
}

fn counting_lemma(samples: usize) -> Result<String, String> {
    let g = triangle();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut failed = 0;
    let mut total = 0;
    for alpha in [0.1, 1.0, 10.0] {
        for _ in 0..samples {
            let x = random_counters(&g, &mut rng);
            total += 1;
            if !verify_counting_lemma(&g, &x, alpha) {
                failed += 1;
            }
        }
    }
    if failed > 0 {
        return Err(format!("{failed} of {total} counter vectors violate the lemma"));
    }
    Ok(format!("{total} counter vectors"))
}

fn wireless_fixture(policy: Policy, rounds: u64) -> Result<String, String> {
    let g = triangle();
    let gamma = ScheduleSet::singletons(&g, 1.0);
    let trees = enumerate_aggregation_trees(&g, 10).map_err(|e| e.to_string())?;
    let cfg = WirelessConfig {
        lambda: 0.4,
        seed: 7,
        horizon: (rounds as f64 / 0.4 * 1.1) as u64,
        policy,
        check_invariants: true,
        ..Default::default()
    };
    let m = wireless::run(&g, &gamma, &trees, cfg).map_err(|e| e.to_string())?;
    if m.oracle_checks < rounds {
        return Err(format!("only {} rounds completed", m.oracle_checks));
    }
    Ok(format!("{} rounds, {} transmissions checked", m.completed, m.type_at_checks))
}
