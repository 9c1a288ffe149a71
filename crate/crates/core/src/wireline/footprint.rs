//! Footprint sets and the fluid-model counter diagnostics.

use std::collections::BTreeMap;

use crate::graph::{LinkId, NetworkGraph, NodeId};
use crate::nodeset::NodeSet;

/// Largest graph for which all valid footprint sets are enumerated.
pub const MAX_ENUM_NODES: usize = 20;

/// `s` contains the aggregator and each of its nodes reaches it inside `s`.
pub fn is_valid_footprint(g: &NetworkGraph, s: NodeSet) -> bool {
    let a = g.aggregator();
    if !s.contains(a) {
        return false;
    }
    reaches_aggregator(g, s) == s
}

/// Nodes of `s` that have a path to the aggregator inside `s`.
pub fn reaches_aggregator(g: &NetworkGraph, s: NodeSet) -> NodeSet {
    let a = g.aggregator();
    if !s.contains(a) {
        return NodeSet::EMPTY;
    }
    let mut seen = NodeSet::singleton(a);
    let mut stack = vec![a];
    while let Some(v) = stack.pop() {
        for &l in g.in_links(v) {
            let u = g.link(l).from;
            if s.contains(u) && !seen.contains(u) {
                seen.insert(u);
                stack.push(u);
            }
        }
    }
    seen
}

/// All valid footprint sets, ordered by bit pattern.
pub fn valid_footprint_sets(g: &NetworkGraph) -> Vec<NodeSet> {
    let n = g.num_nodes();
    assert!(n <= MAX_ENUM_NODES, "footprint enumeration limited to {MAX_ENUM_NODES} nodes");
    let a = g.aggregator();
    let sensors: Vec<NodeId> = g.sensors().collect();
    let mut out: Vec<NodeSet> = (0u64..1 << sensors.len())
        .map(|mask| {
            let mut s = NodeSet::singleton(a);
            for (k, &i) in sensors.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    s.insert(i);
                }
            }
            s
        })
        .filter(|&s| is_valid_footprint(g, s))
        .collect();
    out.sort();
    out
}

/// A counter vector `x_S >= 0` over valid footprint sets (absent sets are 0).
pub type Counters = BTreeMap<NodeSet, f64>;

struct Sums<'a> {
    g: &'a NetworkGraph,
    sets: &'a [NodeSet],
    x: &'a Counters,
}

impl Sums<'_> {
    fn x(&self, s: NodeSet) -> f64 {
        self.x.get(&s).copied().unwrap_or(0.0)
    }

    /// `x_{not subset of S}`.
    fn not_subset(&self, s: NodeSet) -> f64 {
        self.sets.iter().filter(|t| !t.is_subset(s)).map(|&t| self.x(t)).sum()
    }

    /// `x_{+u-v} = sum_{S valid, v in S, u not in S} x_{S+u}`.
    fn plus_u_minus_v(&self, link: LinkId) -> f64 {
        let l = self.g.link(link);
        self.sets
            .iter()
            .filter(|s| s.contains(l.to) && !s.contains(l.from))
            .map(|s| self.x(s.with(l.from)))
            .sum()
    }
}

/// `beta_i = (1 + 1/alpha)^(i-1)` for `i = 1..=k`, stored at index `i`.
pub fn lemma_betas(alpha: f64, k: usize) -> Vec<f64> {
    assert!(alpha > 0.0, "alpha must be positive");
    let mut b = vec![0.0; k + 1];
    for (i, bi) in b.iter_mut().enumerate().skip(1) {
        *bi = (1.0 + 1.0 / alpha).powi(i as i32 - 1);
    }
    b
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaViolation {
    pub condition: u8,
    pub s: NodeSet,
    pub link: LinkId,
    /// The witness `S'` for the second condition.
    pub s_prime: Option<NodeSet>,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, Default)]
pub struct LemmaReport {
    pub checked: usize,
    pub violations: Vec<LemmaViolation>,
}

impl LemmaReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks both implications of the counting lemma for every `(S, u, v, S')`.
pub fn verify_counting_lemma(g: &NetworkGraph, x: &Counters, alpha: f64) -> bool {
    counting_lemma_report(g, x, alpha, &lemma_betas(alpha, g.num_nodes())).holds()
}

/// Same check with an explicit `beta` sequence (index = set size).
pub fn counting_lemma_report(g: &NetworkGraph, x: &Counters, alpha: f64, beta: &[f64]) -> LemmaReport {
    let sets = valid_footprint_sets(g);
    let sums = Sums { g, sets: &sets, x };
    let xuv: Vec<f64> = (0..g.num_links()).map(|l| sums.plus_u_minus_v(l)).collect();
    let shrink = 1.0 / (1.0 + alpha);
    let mut rep = LemmaReport::default();

    for &s in &sets {
        let xs = sums.not_subset(s);
        let cut: Vec<LinkId> = (0..g.num_links())
            .filter(|&l| {
                let k = g.link(l);
                s.contains(k.to) && !s.contains(k.from)
            })
            .collect();

        for &l in &cut {
            rep.checked += 1;
            if xuv[l] < shrink * xs {
                let su = s.with(g.link(l).from);
                let lhs = beta[su.len()] * sums.not_subset(su);
                let rhs = beta[s.len()] * xs;
                if !(lhs > rhs) {
                    rep.violations.push(LemmaViolation { condition: 1, s, link: l, s_prime: None, lhs, rhs });
                }
            }
        }

        if !cut.iter().all(|&l| xuv[l] >= shrink * xs) {
            continue;
        }
        for &l in &cut {
            let (u, v) = (g.link(l).from, g.link(l).to);
            for &sp in &sets {
                if sp.is_subset(s) || !sp.contains(v) || sp.contains(u) {
                    continue;
                }
                rep.checked += 1;
                if sums.x(sp.with(u)) > alpha * xuv[l] {
                    let un = s.union(sp);
                    let lhs = beta[un.len()] * sums.not_subset(un);
                    let rhs = beta[s.len()] * xs;
                    if !(lhs > rhs) {
                        rep.violations.push(LemmaViolation { condition: 2, s, link: l, s_prime: Some(sp), lhs, rhs });
                    }
                }
            }
        }
    }
    rep
}

/// `L(x) = max_S beta_|S| x_{not subset of S}` over valid footprint sets.
pub fn fluid_lyapunov(g: &NetworkGraph, x: &Counters, alpha: f64) -> f64 {
    let sets = valid_footprint_sets(g);
    let beta = lemma_betas(alpha, g.num_nodes());
    let sums = Sums { g, sets: &sets, x };
    sets.iter().map(|&s| beta[s.len()] * sums.not_subset(s)).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::triangle;

    fn set(v: &[usize]) -> NodeSet {
        v.iter().copied().collect()
    }

    #[test]
    fn triangle_valid_sets() {
        let g = triangle();
        let sets = valid_footprint_sets(&g);
        assert_eq!(sets, vec![set(&[0]), set(&[0, 1]), set(&[0, 2]), set(&[0, 1, 2])]);
        // 1 -> 2 is not a link, so {a, 2} is fine but {a} + 2 via 1 needs 1
        let line = NetworkGraph::new(3, 0, &[(1, 0, 1.0), (2, 1, 1.0)]).unwrap();
        assert!(!is_valid_footprint(&line, set(&[0, 2])));
    }

    #[test]
    fn zero_counters_hold_and_lyapunov_zero() {
        let g = triangle();
        let x = Counters::new();
        assert!(verify_counting_lemma(&g, &x, 1.0));
        assert_eq!(fluid_lyapunov(&g, &x, 1.0), 0.0);
    }

    #[test]
    fn single_full_round_lyapunov() {
        let g = triangle();
        let x = Counters::from([(set(&[0, 1, 2]), 1.0)]);
        // S ranges over {0},{0,1},{0,2}: betas 1, 2, 2 at alpha = 1
        assert_eq!(fluid_lyapunov(&g, &x, 1.0), 2.0);
    }

    #[test]
    fn first_condition_counterexample() {
        // S = {a,1}, u = 2, v = 1: x_{+2-1} = x_{a12} is small while
        // x_{not in S} also counts {a,2}, and x_{not in S+2} = 0.
        let g = triangle();
        let x = Counters::from([(set(&[0, 2]), 1.0), (set(&[0, 1, 2]), 0.1)]);
        let rep = counting_lemma_report(&g, &x, 1.0, &lemma_betas(1.0, 3));
        let v = rep.violations.iter().find(|v| v.condition == 1).expect("violation");
        assert_eq!(v.s, set(&[0, 1]));
        assert_eq!(v.link, g.link_id(2, 1).unwrap());
    }
}
