//! Routing and scheduling decisions as pure functions of queue lengths.

use rand::Rng;

use crate::flows::{
    optimal_sss, tree_packing_lp, AggregationTree, FlowError, ScheduleSet, SssRule,
};
use crate::graph::{LinkId, NetworkGraph, NodeId};

/// `q[i][tau]`: useful-queue length at node `i` for tree `tau`.
pub type QueueLengths = Vec<Vec<usize>>;

/// `V = sum_i sum_tau (Q_i^{tau,u})^2`.
pub fn lyapunov_value(q: &QueueLengths) -> f64 {
    q.iter().flatten().map(|&x| (x as f64) * (x as f64)).sum()
}

/// Uniform choice among the indices attaining the extreme of `keys`.
fn pick_tied<R: Rng + ?Sized, T: PartialOrd + Copy>(
    keys: impl Iterator<Item = T>,
    better: impl Fn(T, T) -> bool,
    rng: &mut R,
) -> Option<usize> {
    let mut best: Option<T> = None;
    let mut ties: Vec<usize> = Vec::new();
    for (k, key) in keys.enumerate() {
        match best {
            Some(b) if better(b, key) => {}
            Some(b) if !better(key, b) => ties.push(k),
            _ => {
                best = Some(key);
                ties.clear();
                ties.push(k);
            }
        }
    }
    match ties.len() {
        0 => None,
        1 => Some(ties[0]),
        n => Some(ties[rng.random_range(0..n)]),
    }
}

/// Greedy tree loading: the tree minimising `W_tau = sum_i Q_i^{tau,u}`,
/// ties uniform.
pub fn greedy_tree_load<R: Rng + ?Sized>(q: &QueueLengths, num_trees: usize, rng: &mut R) -> usize {
    assert!(num_trees > 0, "tree set is empty");
    let w = (0..num_trees).map(|t| q.iter().map(|row| row[t]).sum::<usize>());
    pick_tied(w, |a, b| a < b, rng).expect("nonempty")
}

/// Which trees use each link as a parent link.
#[derive(Debug, Clone)]
pub struct TreeIndex {
    /// For each tree, the parent link of each node (`None` at the root).
    pub parent_link: Vec<Vec<Option<LinkId>>>,
    pub num_children: Vec<Vec<usize>>,
    /// For each link `(i, j)`, the trees in which `j` is the parent of `i`.
    pub link_trees: Vec<Vec<usize>>,
}

impl TreeIndex {
    pub fn new(g: &NetworkGraph, trees: &[AggregationTree]) -> Self {
        let n = g.num_nodes();
        let mut link_trees = vec![Vec::new(); g.num_links()];
        let mut parent_link = Vec::with_capacity(trees.len());
        let mut num_children = Vec::with_capacity(trees.len());
        for (t, tree) in trees.iter().enumerate() {
            let mut pl = vec![None; n];
            let mut nc = vec![0; n];
            for i in 0..n {
                if let Some(p) = tree.parent(i) {
                    let l = g.link_id(i, p).expect("validated tree");
                    pl[i] = Some(l);
                    nc[p] += 1;
                    link_trees[l].push(t);
                }
            }
            parent_link.push(pl);
            num_children.push(nc);
        }
        TreeIndex { parent_link, num_children, link_trees }
    }

    pub fn num_trees(&self) -> usize {
        self.parent_link.len()
    }
}

/// A schedule together with the tree served on each of its links.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleChoice {
    pub schedule: usize,
    /// `(link, tree)` for scheduled links some tree routes over.
    pub trees: Vec<(LinkId, usize)>,
    pub weight: f64,
}

/// `P_ij = max_{tau uses (i,j)} Q_i^{tau,u}` and the maximising tree,
/// ties uniform; `None` when no tree uses the link.
pub fn link_weights<R: Rng + ?Sized>(
    g: &NetworkGraph,
    index: &TreeIndex,
    q: &QueueLengths,
    rng: &mut R,
) -> Vec<Option<(usize, usize)>> {
    (0..g.num_links())
        .map(|l| {
            let from: NodeId = g.link(l).from;
            let trees = &index.link_trees[l];
            pick_tied(trees.iter().map(|&t| q[from][t]), |a, b| a > b, rng).map(|k| {
                let t = trees[k];
                (q[from][t], t)
            })
        })
        .collect()
}

/// MaxWeight: the schedule maximising `sum P_ij c_ij(I)`, ties uniform.
pub fn maxweight_schedule<R: Rng + ?Sized>(
    g: &NetworkGraph,
    gamma: &ScheduleSet,
    index: &TreeIndex,
    q: &QueueLengths,
    rng: &mut R,
) -> ScheduleChoice {
    let p = link_weights(g, index, q, rng);
    let scores = (0..gamma.len()).map(|k| schedule_weight(gamma, k, &p));
    let k = pick_tied(scores, |a, b| a > b, rng).expect("schedule set is nonempty");
    let s = gamma.get(k);
    ScheduleChoice {
        schedule: k,
        trees: s.links.iter().filter_map(|&l| p[l].map(|(_, t)| (l, t))).collect(),
        weight: schedule_weight(gamma, k, &p),
    }
}

/// `sum_{(i,j) in I} P_ij c_ij(I)`.
pub fn schedule_weight(gamma: &ScheduleSet, k: usize, p: &[Option<(usize, usize)>]) -> f64 {
    let s = gamma.get(k);
    s.links
        .iter()
        .zip(&s.rates)
        .map(|(&l, &c)| p[l].map_or(0.0, |(w, _)| w as f64 * c.floor()))
        .sum()
}

/// The randomized static policy: schedule weights maximising the
/// min-mincut and a tree split proportional to a packing of the induced rates.
#[derive(Debug, Clone)]
pub struct StaticSssPlan {
    pub rule: SssRule,
    /// Probability of assigning a round to each tree.
    pub tree_weights: Vec<f64>,
    /// Max-min-mincut of the schedule hull.
    pub value: f64,
}

pub fn static_sss_plan(g: &NetworkGraph, gamma: &ScheduleSet, trees: &[AggregationTree]) -> Result<StaticSssPlan, FlowError> {
    let opt = optimal_sss(g, gamma)?;
    let packing = tree_packing_lp(g, &opt.rates, trees)?;
    let mut tree_weights = vec![0.0; trees.len()];
    for e in &packing.entries {
        let t = trees.iter().position(|t| *t == e.tree).expect("packing tree from input");
        tree_weights[t] = e.weight;
    }
    let total: f64 = tree_weights.iter().sum();
    if !(total > 0.0) {
        return Err(FlowError::Empty("tree packing"));
    }
    tree_weights.iter_mut().for_each(|w| *w /= total);
    Ok(StaticSssPlan { rule: opt.rule, tree_weights, value: opt.value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::{enumerate_aggregation_trees, Schedule};
    use crate::graph::triangle;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lyapunov() {
        assert_eq!(lyapunov_value(&vec![vec![0, 0]; 3]), 0.0);
        assert_eq!(lyapunov_value(&vec![vec![2], vec![3]]), 13.0);
    }

    #[test]
    fn greedy_argmin_and_ties() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q = vec![vec![5, 3, 9]];
        assert_eq!(greedy_tree_load(&q, 3, &mut rng), 1);
        let zero = vec![vec![0, 0]; 3];
        let ones = (0..4000).filter(|_| greedy_tree_load(&zero, 2, &mut rng) == 1).count();
        assert!((1800..2200).contains(&ones), "{ones}");
    }

    #[test]
    fn maxweight_prefers_heavier_link() {
        let g = triangle();
        let gamma = ScheduleSet::singletons(&g, 1.0);
        let trees = enumerate_aggregation_trees(&g, 10).unwrap();
        // keep the tree that routes 2 -> 1 -> a
        let t = vec![trees[1].clone()];
        let idx = TreeIndex::new(&g, &t);
        let mut q = vec![vec![0]; 3];
        q[2][0] = 7;
        q[1][0] = 3;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let c = maxweight_schedule(&g, &gamma, &idx, &q, &mut rng);
        assert_eq!(gamma.get(c.schedule).links, vec![g.link_id(2, 1).unwrap()]);
        assert_eq!(c.weight, 7.0);
    }

    #[test]
    fn static_plan_on_shared_channel() {
        let g = triangle();
        let gamma = ScheduleSet::singletons(&g, 1.0);
        let trees = enumerate_aggregation_trees(&g, 10).unwrap();
        let plan = static_sss_plan(&g, &gamma, &trees).unwrap();
        assert!((plan.value - 0.5).abs() < 1e-9);
        assert!((plan.tree_weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // degenerate hull
        let one = ScheduleSet::new(&g, vec![Schedule { links: vec![0, 1, 2], rates: vec![1.0; 3] }], None).unwrap();
        let plan = static_sss_plan(&g, &one, &trees).unwrap();
        assert_eq!(plan.rule.weights(), &[1.0]);
    }
}
