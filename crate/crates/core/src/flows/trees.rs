//! Aggregation trees: spanning arborescences oriented toward the aggregator.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::FlowError;
use crate::graph::{LinkId, NetworkGraph, NodeId};

pub const DEFAULT_TREE_LIMIT: usize = 100_000;

/// Parent map of a spanning in-tree rooted at the aggregator.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AggregationTree {
    parent: Vec<Option<NodeId>>,
}

impl AggregationTree {
    /// Validates `parent` against `g`: every sensor has a parent over an
    /// existing link and parent chains reach the aggregator.
    pub fn new(g: &NetworkGraph, parent: Vec<Option<NodeId>>) -> Result<Self, FlowError> {
        let n = g.num_nodes();
        let a = g.aggregator();
        if parent.len() != n {
            return Err(FlowError::InvalidTree(format!("parent map has {} entries for {n} nodes", parent.len())));
        }
        if parent[a].is_some() {
            return Err(FlowError::InvalidTree("aggregator has a parent".into()));
        }
        for i in g.sensors() {
            let p = parent[i].ok_or_else(|| FlowError::InvalidTree(format!("node {i} has no parent")))?;
            if g.link_id(i, p).is_none() {
                return Err(FlowError::InvalidTree(format!("link {i} -> {p} not in graph")));
            }
        }
        for i in g.sensors() {
            let mut cur = i;
            let mut steps = 0;
            while cur != a {
                cur = parent[cur].expect("checked above");
                steps += 1;
                if steps >= n {
                    return Err(FlowError::InvalidTree(format!("parent chain from {i} cycles")));
                }
            }
        }
        Ok(AggregationTree { parent })
    }

    pub fn parent(&self, i: NodeId) -> Option<NodeId> {
        self.parent[i]
    }

    pub fn parents(&self) -> &[Option<NodeId>] {
        &self.parent
    }

    pub fn num_nodes(&self) -> usize {
        self.parent.len()
    }

    /// Children lists, each sorted.
    pub fn children(&self) -> Vec<Vec<NodeId>> {
        let mut ch = vec![Vec::new(); self.parent.len()];
        for (i, p) in self.parent.iter().enumerate() {
            if let Some(p) = p {
                ch[*p].push(i);
            }
        }
        ch
    }

    /// Link ids `(i, p(i))`, in sensor order.
    pub fn links(&self, g: &NetworkGraph) -> Vec<LinkId> {
        self.parent
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.map(|p| g.link_id(i, p).expect("validated tree link")))
            .collect()
    }

    pub fn contains_link(&self, from: NodeId, to: NodeId) -> bool {
        self.parent[from] == Some(to)
    }

    /// `{"node": parent}` map for sensors, as written to JSON.
    pub fn to_record(&self) -> TreeRecord {
        TreeRecord {
            parents: self
                .parent
                .iter()
                .enumerate()
                .filter_map(|(i, p)| p.map(|p| (i.to_string(), p)))
                .collect(),
        }
    }

    pub fn from_record(g: &NetworkGraph, rec: &TreeRecord) -> Result<Self, FlowError> {
        let mut parent = vec![None; g.num_nodes()];
        for (k, &p) in &rec.parents {
            let i: NodeId = k
                .parse()
                .map_err(|_| FlowError::InvalidTree(format!("bad node key {k:?}")))?;
            if i >= parent.len() {
                return Err(FlowError::InvalidTree(format!("node {i} out of range")));
            }
            parent[i] = Some(p);
        }
        AggregationTree::new(g, parent)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeRecord {
    pub parents: BTreeMap<String, NodeId>,
}

/// All aggregation trees of `g` in lexicographic order of the parent map
/// (sensors in id order, candidate parents ascending).
pub fn enumerate_aggregation_trees(g: &NetworkGraph, limit: usize) -> Result<Vec<AggregationTree>, FlowError> {
    assert!(limit > 0, "tree limit must be positive");
    let n = g.num_nodes();
    let sensors: Vec<NodeId> = g.sensors().collect();
    let options: Vec<Vec<NodeId>> = (0..n).map(|i| g.out_neighbors(i)).collect();
    let mut parent: Vec<Option<NodeId>> = vec![None; n];
    let mut out = Vec::new();
    let mut search = Search { g, sensors: &sensors, options: &options, limit, out: &mut out };
    search.go(0, &mut parent)?;
    Ok(out)
}

struct Search<'a> {
    g: &'a NetworkGraph,
    sensors: &'a [NodeId],
    options: &'a [Vec<NodeId>],
    limit: usize,
    out: &'a mut Vec<AggregationTree>,
}

impl Search<'_> {
    fn go(&mut self, depth: usize, parent: &mut Vec<Option<NodeId>>) -> Result<(), FlowError> {
        if depth == self.sensors.len() {
            if self.out.len() == self.limit {
                return Err(FlowError::TooManyTrees(self.limit));
            }
            self.out.push(AggregationTree { parent: parent.clone() });
            return Ok(());
        }
        let i = self.sensors[depth];
        for &p in &self.options[i] {
            if self.closes_cycle(parent, i, p) {
                continue;
            }
            parent[i] = Some(p);
            self.go(depth + 1, parent)?;
            parent[i] = None;
        }
        Ok(())
    }

    /// Would `i -> p` close a parent cycle among the nodes assigned so far?
    fn closes_cycle(&self, parent: &[Option<NodeId>], i: NodeId, p: NodeId) -> bool {
        let a = self.g.aggregator();
        let mut cur = p;
        loop {
            if cur == i {
                return true;
            }
            if cur == a {
                return false;
            }
            match parent[cur] {
                Some(next) => cur = next,
                None => return false,
            }
        }
    }
}

/// The depth-two trees of the complete graph on `n` nodes (aggregator 0):
/// tree `i` routes every other sensor through `i`, and `i` to the aggregator.
/// They are pairwise edge-disjoint.
pub fn complete_graph_depth2_trees(g: &NetworkGraph) -> Result<Vec<AggregationTree>, FlowError> {
    let a = g.aggregator();
    g.sensors()
        .map(|hub| {
            let parent = (0..g.num_nodes())
                .map(|j| {
                    if j == a {
                        None
                    } else if j == hub {
                        Some(a)
                    } else {
                        Some(hub)
                    }
                })
                .collect();
            AggregationTree::new(g, parent)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{triangle, Topology};

    #[test]
    fn line_has_one_tree() {
        let g = Topology::Line { n: 3, capacity: 1.0 }.generate().unwrap();
        assert_eq!(enumerate_aggregation_trees(&g, 10).unwrap().len(), 1);
    }

    #[test]
    fn triangle_has_two_trees() {
        let g = triangle();
        let trees = enumerate_aggregation_trees(&g, 10).unwrap();
        let parents: Vec<_> = trees.iter().map(|t| t.parents().to_vec()).collect();
        assert_eq!(parents, vec![vec![None, Some(0), Some(0)], vec![None, Some(0), Some(1)]]);
    }

    #[test]
    fn limit_is_enforced() {
        let g = Topology::Complete { n: 5, capacity: 1.0 }.generate().unwrap();
        assert!(matches!(enumerate_aggregation_trees(&g, 124), Err(FlowError::TooManyTrees(124))));
        assert_eq!(enumerate_aggregation_trees(&g, 125).unwrap().len(), 125);
    }

    #[test]
    fn rejects_bad_parent_maps() {
        let g = triangle();
        assert!(AggregationTree::new(&g, vec![None, Some(2), Some(0)]).is_err()); // 1 -> 2 missing
        assert!(AggregationTree::new(&g, vec![None, Some(0), None]).is_err());
        assert!(AggregationTree::new(&g, vec![Some(1), Some(0), Some(0)]).is_err());
    }

    #[test]
    fn depth2_trees_are_edge_disjoint() {
        let g = Topology::Complete { n: 5, capacity: 1.0 }.generate().unwrap();
        let trees = complete_graph_depth2_trees(&g).unwrap();
        assert_eq!(trees.len(), 4);
        let mut used = vec![0; g.num_links()];
        for t in &trees {
            for l in t.links(&g) {
                used[l] += 1;
            }
        }
        assert!(used.iter().all(|&u| u <= 1));
    }

    #[test]
    fn record_round_trip() {
        let g = triangle();
        let t = AggregationTree::new(&g, vec![None, Some(0), Some(1)]).unwrap();
        let back = AggregationTree::from_record(&g, &t.to_record()).unwrap();
        assert_eq!(back, t);
    }
}
