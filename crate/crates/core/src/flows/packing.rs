use serde::Serialize;

use super::{min_mincut, AggregationTree, FlowError, RateVector, ScheduleSet, SssRule};
use crate::fmux::FmuxFunction;
use crate::graph::NetworkGraph;
use crate::lp::{LinearProgram, Relation, Residuals};

#[derive(Debug, Clone)]
pub struct PackedTree {
    pub tree: AggregationTree,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct TreePacking {
    /// Trees with strictly positive weight, in input order.
    pub entries: Vec<PackedTree>,
    pub total: f64,
    pub residuals: Residuals,
}

impl TreePacking {
    /// Per-link load `sum_{tau contains l} lambda_tau`.
    pub fn link_loads(&self, g: &NetworkGraph) -> Vec<f64> {
        let mut load = vec![0.0; g.num_links()];
        for e in &self.entries {
            for l in e.tree.links(g) {
                load[l] += e.weight;
            }
        }
        load
    }

    /// `min_l (c_l - load_l)`; nonnegative iff the packing is feasible.
    pub fn min_slack(&self, g: &NetworkGraph, caps: &RateVector) -> f64 {
        self.link_loads(g)
            .iter()
            .zip(caps.iter())
            .map(|(load, c)| c - load)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Maximizes `sum lambda_tau` over `trees` subject to link capacities.
pub fn tree_packing_lp(g: &NetworkGraph, caps: &RateVector, trees: &[AggregationTree]) -> Result<TreePacking, FlowError> {
    if trees.is_empty() {
        return Err(FlowError::Empty("tree set"));
    }
    let mut lp = LinearProgram::new(trees.len());
    let mut users: Vec<Vec<(usize, f64)>> = vec![Vec::new(); g.num_links()];
    for (t, tree) in trees.iter().enumerate() {
        lp.set_objective(t, 1.0);
        for l in tree.links(g) {
            users[l].push((t, 1.0));
        }
    }
    for (l, coeffs) in users.into_iter().enumerate() {
        if !coeffs.is_empty() {
            lp.add_constraint(coeffs, Relation::Le, caps[l]);
        }
    }
    let sol = lp.maximize()?;
    let entries = trees
        .iter()
        .zip(&sol.x)
        .filter(|(_, &w)| w > 1e-12)
        .map(|(t, &w)| PackedTree { tree: t.clone(), weight: w })
        .collect();
    Ok(TreePacking { entries, total: sol.objective, residuals: sol.residuals })
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimalSss {
    pub rule: SssRule,
    pub rates: RateVector,
    /// `max_{c in CH(Gamma)} min-mincut(c)`, in the graph's rate units.
    pub value: f64,
    pub residuals: Residuals,
}

/// Best static service split: maximizes the min-mincut of the induced rate
/// vector over the convex hull of `gamma`.
///
/// Variables are the schedule weights, a common value `lambda`, and for each
/// sensor `i` an independent `i -> a` flow of value `lambda` bounded by the
/// induced rates.
pub fn optimal_sss(g: &NetworkGraph, gamma: &ScheduleSet) -> Result<OptimalSss, FlowError> {
    if gamma.is_empty() {
        return Err(FlowError::Empty("schedule set"));
    }
    let m = gamma.len();
    let links = g.num_links();
    let sensors: Vec<_> = g.sensors().collect();
    let lam = m;
    let flow = |k: usize, l: usize| m + 1 + k * links + l;
    let mut lp = LinearProgram::new(m + 1 + sensors.len() * links);
    lp.set_objective(lam, 1.0);

    lp.add_constraint((0..m).map(|s| (s, 1.0)).collect(), Relation::Eq, 1.0);
    for k in 0..sensors.len() {
        for l in 0..links {
            let mut row = vec![(flow(k, l), 1.0)];
            row.extend((0..m).filter_map(|s| {
                let c = gamma.rates(s)[l];
                (c != 0.0).then_some((s, -c))
            }));
            lp.add_constraint(row, Relation::Le, 0.0);
        }
    }
    for (k, &src) in sensors.iter().enumerate() {
        for w in g.sensors() {
            let mut row: Vec<(usize, f64)> = Vec::new();
            row.extend(g.out_links(w).iter().map(|&l| (flow(k, l), 1.0)));
            row.extend(g.in_links(w).iter().map(|&l| (flow(k, l), -1.0)));
            if w == src {
                row.push((lam, -1.0));
            }
            lp.add_constraint(row, Relation::Eq, 0.0);
        }
    }
    let sol = lp.maximize()?;
    let mut weights: Vec<f64> = sol.x[..m].iter().map(|&w| w.max(0.0)).collect();
    let sum: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= sum);
    let rule = SssRule::new(weights)?;
    let rates = rule.induced_rates(gamma);
    Ok(OptimalSss { rule, rates, value: sol.objective, residuals: sol.residuals })
}

/// Refresh rate supported by a min-mincut of `delta_bits` bits per time unit
/// when each packet of `f` carries `log2 |R(f)|` bits.
pub fn max_refresh_rate(delta_bits: f64, f: &FmuxFunction) -> f64 {
    refresh_rate(delta_bits, f.bits_per_packet())
}

/// Same as [`max_refresh_rate`] with an explicit packet size in bits.
pub fn refresh_rate(delta_bits: f64, bits_per_packet: f64) -> f64 {
    assert!(bits_per_packet > 0.0, "packet must carry at least one bit");
    delta_bits / bits_per_packet
}

/// Convenience: min-mincut of the rates a rule induces.
pub fn rule_min_mincut(g: &NetworkGraph, gamma: &ScheduleSet, rule: &SssRule) -> f64 {
    min_mincut(g, &rule.induced_rates(gamma)).value
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::{complete_graph_depth2_trees, enumerate_aggregation_trees, Schedule};
    use crate::graph::{triangle, Topology};
    use approx::assert_abs_diff_eq;

    #[test]
    fn k5_packing_total_four() {
        let g = Topology::Complete { n: 5, capacity: 1.0 }.generate().unwrap();
        let caps = RateVector::from_graph(&g);
        let all = enumerate_aggregation_trees(&g, 1000).unwrap();
        let p = tree_packing_lp(&g, &caps, &all).unwrap();
        assert_abs_diff_eq!(p.total, 4.0, epsilon = 1e-9);
        assert!(p.min_slack(&g, &caps) >= -1e-9);

        let witness = complete_graph_depth2_trees(&g).unwrap();
        let p = tree_packing_lp(&g, &caps, &witness).unwrap();
        assert_abs_diff_eq!(p.total, 4.0, epsilon = 1e-9);
        for e in &p.entries {
            assert_abs_diff_eq!(e.weight, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn line_packing_is_bottleneck() {
        let g = NetworkGraph::new(3, 0, &[(1, 0, 2.0), (2, 1, 1.0)]).unwrap();
        let trees = enumerate_aggregation_trees(&g, 10).unwrap();
        let p = tree_packing_lp(&g, &RateVector::from_graph(&g), &trees).unwrap();
        assert_abs_diff_eq!(p.total, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn shared_channel_split() {
        let g = triangle();
        let gamma = ScheduleSet::singletons(&g, 1.0);
        let opt = optimal_sss(&g, &gamma).unwrap();
        assert_abs_diff_eq!(opt.value, 0.5, epsilon = 1e-9);
        let l1a = g.link_id(1, 0).unwrap();
        assert_abs_diff_eq!(opt.rule.weights()[l1a], 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(min_mincut(&g, &opt.rates).value, 0.5, epsilon = 1e-9);
    }

    #[test]
    fn wired_schedule_reduces_to_min_mincut() {
        let g = Topology::Complete { n: 4, capacity: 1.0 }.generate().unwrap();
        let opt = optimal_sss(&g, &ScheduleSet::wired(&g)).unwrap();
        assert_abs_diff_eq!(opt.value, 3.0, epsilon = 1e-9);
    }

    #[test]
    fn dead_link_gives_zero() {
        // 2 -> 1 -> a: link 1 -> a never served
        let g = NetworkGraph::new(3, 0, &[(1, 0, 1.0), (2, 1, 1.0)]).unwrap();
        let gamma = ScheduleSet::new(
            &g,
            vec![
                Schedule { links: vec![0], rates: vec![0.0] },
                Schedule { links: vec![1], rates: vec![1.0] },
            ],
            None,
        )
        .unwrap();
        assert_abs_diff_eq!(optimal_sss(&g, &gamma).unwrap().value, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn refresh_rates() {
        assert_eq!(max_refresh_rate(4.0, &FmuxFunction::Parity), 4.0);
        assert_eq!(max_refresh_rate(4.0, &FmuxFunction::max(16)), 1.0);
        assert_eq!(max_refresh_rate(0.0, &FmuxFunction::Parity), 0.0);
    }
}
