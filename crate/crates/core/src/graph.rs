//! Directed communication graph with a distinguished aggregator node.
//!
//! Every other module works on a validated [`NetworkGraph`]: links are
//! directed, capacities are in packets per time unit, and every sensor is
//! guaranteed to have a directed path to the aggregator.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type NodeId = usize;
pub type LinkId = usize;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("duplicate link {0} -> {1}")]
    DuplicateLink(NodeId, NodeId),
    #[error("self-loop at node {0}")]
    SelfLoop(NodeId),
    #[error("node {0} has no directed path to the aggregator")]
    UnreachableAggregator(NodeId),
    #[error("link {0} -> {1} has negative capacity {2}")]
    NegativeCapacity(NodeId, NodeId, f64),
    #[error("graph has no links")]
    NoLinks,
    #[error("node id {0} out of range for {1} nodes")]
    NodeOutOfRange(NodeId, usize),
    #[error("graph contains a cycle: {0:?}")]
    Cycle(Vec<NodeId>),
    #[error("bad generator parameters: {0}")]
    BadParams(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed graph file: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Link {
    pub from: NodeId,
    pub to: NodeId,
}

#[derive(Debug, Clone)]
pub struct NetworkGraph {
    num_nodes: usize,
    aggregator: NodeId,
    links: Vec<Link>,
    capacity: Vec<f64>,
    out_links: Vec<Vec<LinkId>>,
    in_links: Vec<Vec<LinkId>>,
    index: HashMap<(NodeId, NodeId), LinkId>,
}

impl NetworkGraph {
    /// Validates and builds a graph. Links keep the order they are given in;
    /// that order defines [`LinkId`]s.
    pub fn new(
        num_nodes: usize,
        aggregator: NodeId,
        links: &[(NodeId, NodeId, f64)],
    ) -> Result<Self, GraphError> {
        if aggregator >= num_nodes {
            return Err(GraphError::NodeOutOfRange(aggregator, num_nodes));
        }
        if links.is_empty() {
            return Err(GraphError::NoLinks);
        }
        let mut index = HashMap::with_capacity(links.len());
        let mut out_links = vec![Vec::new(); num_nodes];
        let mut in_links = vec![Vec::new(); num_nodes];
        let mut stored = Vec::with_capacity(links.len());
        let mut capacity = Vec::with_capacity(links.len());
        for (id, &(u, v, c)) in links.iter().enumerate() {
            for x in [u, v] {
                if x >= num_nodes {
                    return Err(GraphError::NodeOutOfRange(x, num_nodes));
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if c < 0.0 || c.is_nan() {
                return Err(GraphError::NegativeCapacity(u, v, c));
            }
            if index.insert((u, v), id).is_some() {
                return Err(GraphError::DuplicateLink(u, v));
            }
            out_links[u].push(id);
            in_links[v].push(id);
            stored.push(Link { from: u, to: v });
            capacity.push(c);
        }
        let g = NetworkGraph {
            num_nodes,
            aggregator,
            links: stored,
            capacity,
            out_links,
            in_links,
            index,
        };
        let reach = g.reaches_aggregator();
        if let Some(bad) = (0..num_nodes).find(|&i| !reach[i]) {
            return Err(GraphError::UnreachableAggregator(bad));
        }
        Ok(g)
    }

    /// Marks nodes with a directed path to the aggregator (reverse BFS).
    fn reaches_aggregator(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_nodes];
        seen[self.aggregator] = true;
        let mut queue = VecDeque::from([self.aggregator]);
        while let Some(v) = queue.pop_front() {
            for &l in &self.in_links[v] {
                let u = self.links[l].from;
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        seen
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_links(&self) -> usize {
        self.links.len()
    }

    pub fn aggregator(&self) -> NodeId {
        self.aggregator
    }

    /// Non-aggregator nodes in increasing id order.
    pub fn sensors(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.num_nodes).filter(move |&i| i != self.aggregator)
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, id: LinkId) -> Link {
        self.links[id]
    }

    pub fn link_id(&self, from: NodeId, to: NodeId) -> Option<LinkId> {
        self.index.get(&(from, to)).copied()
    }

    pub fn capacities(&self) -> &[f64] {
        &self.capacity
    }

    pub fn capacity(&self, id: LinkId) -> f64 {
        self.capacity[id]
    }

    pub fn out_links(&self, node: NodeId) -> &[LinkId] {
        &self.out_links[node]
    }

    pub fn in_links(&self, node: NodeId) -> &[LinkId] {
        &self.in_links[node]
    }

    /// `N^+(i)`, sorted.
    pub fn out_neighbors(&self, node: NodeId) -> Vec<NodeId> {
        let mut v: Vec<_> = self.out_links[node].iter().map(|&l| self.links[l].to).collect();
        v.sort_unstable();
        v
    }

    /// `N^-(i)`, sorted.
    pub fn in_neighbors(&self, node: NodeId) -> Vec<NodeId> {
        let mut v: Vec<_> = self.in_links[node].iter().map(|&l| self.links[l].from).collect();
        v.sort_unstable();
        v
    }

    /// Same topology with a different capacity vector.
    pub fn with_capacities(&self, caps: &[f64]) -> Result<Self, GraphError> {
        assert_eq!(caps.len(), self.links.len());
        let triples: Vec<_> = self
            .links
            .iter()
            .zip(caps)
            .map(|(l, &c)| (l.from, l.to, c))
            .collect();
        NetworkGraph::new(self.num_nodes, self.aggregator, &triples)
    }

    /// Orders nodes so that every link points from a later node to an earlier
    /// one, aggregator first. Ties are broken by smallest node id.
    pub fn topological_order(&self) -> Result<Vec<NodeId>, GraphError> {
        let mut remaining_out: Vec<usize> = self.out_links.iter().map(Vec::len).collect();
        let mut ready: BTreeSet<NodeId> =
            (0..self.num_nodes).filter(|&i| remaining_out[i] == 0).collect();
        let mut order = Vec::with_capacity(self.num_nodes);
        let mut placed = vec![false; self.num_nodes];
        // Only the aggregator may come first; a sink elsewhere cannot exist
        // in a validated graph.
        while let Some(v) = ready.pop_first() {
            placed[v] = true;
            order.push(v);
            for &l in &self.in_links[v] {
                let u = self.links[l].from;
                remaining_out[u] -= 1;
                if remaining_out[u] == 0 {
                    ready.insert(u);
                }
            }
        }
        if order.len() == self.num_nodes {
            return Ok(order);
        }
        Err(GraphError::Cycle(self.find_cycle(&placed)))
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_ok()
    }

    /// Walks unplaced nodes (each still has an unplaced out-neighbour) until a
    /// node repeats.
    fn find_cycle(&self, placed: &[bool]) -> Vec<NodeId> {
        let start = (0..self.num_nodes).find(|&i| !placed[i]).expect("cycle exists");
        let mut pos = vec![usize::MAX; self.num_nodes];
        let mut path = Vec::new();
        let mut cur = start;
        while pos[cur] == usize::MAX {
            pos[cur] = path.len();
            path.push(cur);
            cur = self.out_links[cur]
                .iter()
                .map(|&l| self.links[l].to)
                .filter(|&w| !placed[w])
                .min()
                .expect("unplaced node keeps an unplaced successor");
        }
        path.split_off(pos[cur])
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            nodes: self.num_nodes,
            aggregator: self.aggregator,
            links: self
                .links
                .iter()
                .zip(&self.capacity)
                .map(|(l, &c)| LinkRecord { from: l.from, to: l.to, capacity: c })
                .collect(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GraphError> {
        let text = fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let file: GraphFile = serde_json::from_str(text)?;
        file.build()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("graph serializes")
    }
}

/// On-disk graph document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphFile {
    pub nodes: usize,
    pub aggregator: NodeId,
    pub links: Vec<LinkRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinkRecord {
    pub from: NodeId,
    pub to: NodeId,
    pub capacity: f64,
}

impl GraphFile {
    pub fn build(&self) -> Result<NetworkGraph, GraphError> {
        let triples: Vec<_> = self.links.iter().map(|l| (l.from, l.to, l.capacity)).collect();
        NetworkGraph::new(self.nodes, self.aggregator, &triples)
    }
}

/// Standard topologies. All generators put the aggregator at node 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Topology {
    /// Every ordered pair of distinct nodes is a link.
    Complete { n: usize, capacity: f64 },
    /// Square grid, 4-neighbour links in both directions.
    Grid { n: usize, capacity: f64 },
    /// `i -> i-1` for `i = 1..n`.
    Line { n: usize, capacity: f64 },
    /// Random DAG: node `i` links to each `j < i` with probability `p`,
    /// and to at least one. Capacities are integers in `[cap_min, cap_max]`.
    RandomDag { n: usize, p: f64, cap_min: u32, cap_max: u32, seed: u64 },
    /// Random digraph (cycles allowed), resampled until every node reaches
    /// the aggregator.
    Random { n: usize, p: f64, cap_min: u32, cap_max: u32, seed: u64 },
}

impl Topology {
    pub fn generate(&self) -> Result<NetworkGraph, GraphError> {
        match *self {
            Topology::Complete { n, capacity } => {
                check_n(n, 2)?;
                let mut links = Vec::with_capacity(n * (n - 1));
                for u in 0..n {
                    for v in 0..n {
                        if u != v {
                            links.push((u, v, capacity));
                        }
                    }
                }
                NetworkGraph::new(n, 0, &links)
            }
            Topology::Line { n, capacity } => {
                check_n(n, 2)?;
                let links: Vec<_> = (1..n).map(|i| (i, i - 1, capacity)).collect();
                NetworkGraph::new(n, 0, &links)
            }
            Topology::Grid { n, capacity } => grid(n, capacity),
            Topology::RandomDag { n, p, cap_min, cap_max, seed } => {
                check_n(n, 2)?;
                check_random(p, cap_min, cap_max)?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut links = Vec::new();
                for i in 1..n {
                    let mut targets: Vec<_> = (0..i).filter(|_| rng.random_bool(p)).collect();
                    if targets.is_empty() {
                        targets.push(rng.random_range(0..i));
                    }
                    for j in targets {
                        links.push((i, j, rng.random_range(cap_min..=cap_max) as f64));
                    }
                }
                NetworkGraph::new(n, 0, &links)
            }
            Topology::Random { n, p, cap_min, cap_max, seed } => {
                check_n(n, 2)?;
                check_random(p, cap_min, cap_max)?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for _ in 0..1000 {
                    let mut links = Vec::new();
                    for u in 0..n {
                        for v in 0..n {
                            if u != v && rng.random_bool(p) {
                                links.push((u, v, rng.random_range(cap_min..=cap_max) as f64));
                            }
                        }
                    }
                    match NetworkGraph::new(n, 0, &links) {
                        Ok(g) => return Ok(g),
                        Err(GraphError::UnreachableAggregator(_)) | Err(GraphError::NoLinks) => {}
                        Err(e) => return Err(e),
                    }
                }
                Err(GraphError::BadParams(format!(
                    "no connected digraph found for n={n}, p={p} after 1000 draws"
                )))
            }
        }
    }
}

fn check_n(n: usize, min: usize) -> Result<(), GraphError> {
    if n < min {
        return Err(GraphError::BadParams(format!("need at least {min} nodes, got {n}")));
    }
    Ok(())
}

fn check_random(p: f64, cap_min: u32, cap_max: u32) -> Result<(), GraphError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(GraphError::BadParams(format!("edge probability {p} outside [0,1]")));
    }
    if cap_min > cap_max {
        return Err(GraphError::BadParams(format!("cap_min {cap_min} > cap_max {cap_max}")));
    }
    Ok(())
}

fn grid(n: usize, capacity: f64) -> Result<NetworkGraph, GraphError> {
    let side = (n as f64).sqrt().round() as usize;
    if side < 2 || side * side != n {
        return Err(GraphError::BadParams(format!("grid needs a square node count >= 4, got {n}")));
    }
    let center = if side % 2 == 1 { (side / 2) * side + side / 2 } else { n / 2 };
    // Relabel cells so the aggregator cell becomes node 0.
    let id = |cell: usize| match cell.cmp(&center) {
        std::cmp::Ordering::Equal => 0,
        std::cmp::Ordering::Less => cell + 1,
        std::cmp::Ordering::Greater => cell,
    };
    let mut links = Vec::new();
    for r in 0..side {
        for c in 0..side {
            let cell = r * side + c;
            let mut nbrs = Vec::with_capacity(4);
            if r > 0 {
                nbrs.push(cell - side);
            }
            if r + 1 < side {
                nbrs.push(cell + side);
            }
            if c > 0 {
                nbrs.push(cell - 1);
            }
            if c + 1 < side {
                nbrs.push(cell + 1);
            }
            for other in nbrs {
                links.push((id(cell), id(other), capacity));
            }
        }
    }
    NetworkGraph::new(n, 0, &links)
}

/// The three-node fixture used throughout: `1 -> a`, `2 -> a`, `2 -> 1`,
/// aggregator `a = 0`, unit capacities.
pub fn triangle() -> NetworkGraph {
    NetworkGraph::new(3, 0, &[(1, 0, 1.0), (2, 0, 1.0), (2, 1, 1.0)]).expect("valid fixture")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_instance() {
        let g = NetworkGraph::new(2, 0, &[(1, 0, 1.0)]).unwrap();
        assert_eq!(g.in_neighbors(0), vec![1]);
        assert_eq!(g.num_links(), 1);
    }

    #[test]
    fn triangle_adjacency() {
        let g = triangle();
        assert_eq!(g.out_neighbors(2), vec![0, 1]);
        assert_eq!(g.in_neighbors(0), vec![1, 2]);
    }

    #[test]
    fn rejects_unreachable() {
        let err = NetworkGraph::new(3, 0, &[(1, 2, 1.0)]).unwrap_err();
        assert!(matches!(err, GraphError::UnreachableAggregator(1)), "{err}");
    }

    #[test]
    fn rejects_bad_links() {
        assert!(matches!(
            NetworkGraph::new(2, 0, &[(1, 0, 1.0), (1, 0, 2.0)]),
            Err(GraphError::DuplicateLink(1, 0))
        ));
        assert!(matches!(NetworkGraph::new(2, 0, &[(1, 1, 1.0)]), Err(GraphError::SelfLoop(1))));
        assert!(matches!(
            NetworkGraph::new(2, 0, &[(1, 0, -1.0)]),
            Err(GraphError::NegativeCapacity(1, 0, _))
        ));
        assert!(matches!(NetworkGraph::new(2, 0, &[]), Err(GraphError::NoLinks)));
    }

    #[test]
    fn topological_orders() {
        assert_eq!(triangle().topological_order().unwrap(), vec![0, 1, 2]);
        let line = Topology::Line { n: 4, capacity: 1.0 }.generate().unwrap();
        assert_eq!(line.topological_order().unwrap(), vec![0, 1, 2, 3]);
        let cyc = NetworkGraph::new(3, 0, &[(1, 2, 1.0), (2, 1, 1.0), (1, 0, 1.0)]).unwrap();
        match cyc.topological_order() {
            Err(GraphError::Cycle(c)) => assert_eq!(c, vec![1, 2]),
            other => panic!("expected cycle, got {other:?}"),
        }
    }

    #[test]
    fn generators() {
        let k5 = Topology::Complete { n: 5, capacity: 1.0 }.generate().unwrap();
        assert_eq!(k5.num_links(), 20);
        assert!(k5.capacities().iter().all(|&c| c == 1.0));

        let line = Topology::Line { n: 3, capacity: 1.0 }.generate().unwrap();
        let links: Vec<_> = line.links().iter().map(|l| (l.from, l.to)).collect();
        assert_eq!(links, vec![(1, 0), (2, 1)]);

        let grid = Topology::Grid { n: 9, capacity: 1.0 }.generate().unwrap();
        assert_eq!(grid.out_links(0).len(), 4);
        // cells 0, 2, 6, 8 are corners; after relabelling they are 1, 3, 6, 8
        for corner in [1, 3, 6, 8] {
            assert_eq!(grid.out_links(corner).len(), 2, "corner {corner}");
        }
        assert!(Topology::Grid { n: 8, capacity: 1.0 }.generate().is_err());
    }

    #[test]
    fn random_generators_are_seeded() {
        let t = Topology::RandomDag { n: 7, p: 0.4, cap_min: 1, cap_max: 4, seed: 3 };
        let a = t.generate().unwrap();
        let b = t.generate().unwrap();
        assert_eq!(a.links(), b.links());
        assert!(a.is_acyclic());
        let r = Topology::Random { n: 6, p: 0.5, cap_min: 1, cap_max: 4, seed: 9 }.generate().unwrap();
        assert_eq!(r.num_nodes(), 6);
    }

    #[test]
    fn json_round_trip() {
        let g = triangle();
        let back = NetworkGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(back.links(), g.links());
        assert_eq!(back.capacities(), g.capacities());
    }
}
