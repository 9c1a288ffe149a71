//! Dinic max-flow over link rates, with min-cut extraction.

use std::collections::VecDeque;

use serde::Serialize;

use super::RateVector;
use crate::graph::{NetworkGraph, NodeId};

const EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxFlow {
    pub value: f64,
    /// Source side of a minimum cut: contains `s`, excludes `t`. Sorted.
    pub cut: Vec<NodeId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinMincut {
    pub value: f64,
    pub argmin: NodeId,
}

struct Arc {
    to: usize,
    cap: f64,
}

struct Dinic {
    arcs: Vec<Arc>,
    adj: Vec<Vec<usize>>,
    level: Vec<i32>,
    next: Vec<usize>,
}

impl Dinic {
    fn new(n: usize) -> Self {
        Dinic { arcs: Vec::new(), adj: vec![Vec::new(); n], level: vec![0; n], next: vec![0; n] }
    }

    fn add(&mut self, u: usize, v: usize, cap: f64) {
        self.adj[u].push(self.arcs.len());
        self.arcs.push(Arc { to: v, cap });
        self.adj[v].push(self.arcs.len());
        self.arcs.push(Arc { to: u, cap: 0.0 });
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &a in &self.adj[u] {
                let arc = &self.arcs[a];
                if arc.cap > EPS && self.level[arc.to] < 0 {
                    self.level[arc.to] = self.level[u] + 1;
                    q.push_back(arc.to);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, u: usize, t: usize, pushed: f64) -> f64 {
        if u == t {
            return pushed;
        }
        while self.next[u] < self.adj[u].len() {
            let a = self.adj[u][self.next[u]];
            let (to, cap) = (self.arcs[a].to, self.arcs[a].cap);
            if cap > EPS && self.level[to] == self.level[u] + 1 {
                let got = self.dfs(to, t, pushed.min(cap));
                if got > EPS {
                    self.arcs[a].cap -= got;
                    self.arcs[a ^ 1].cap += got;
                    return got;
                }
            }
            self.next[u] += 1;
        }
        0.0
    }

    fn run(&mut self, s: usize, t: usize) -> f64 {
        let mut flow = 0.0;
        while self.bfs(s, t) {
            self.next.iter_mut().for_each(|n| *n = 0);
            loop {
                let f = self.dfs(s, t, f64::INFINITY);
                if f <= EPS {
                    break;
                }
                flow += f;
            }
        }
        flow
    }
}

/// Maximum `s -> t` flow under `caps`, and the source side of a minimum cut
/// (nodes reachable from `s` in the final residual graph).
pub fn max_flow(g: &NetworkGraph, caps: &RateVector, s: NodeId, t: NodeId) -> MaxFlow {
    assert_ne!(s, t, "source and sink must differ");
    assert_eq!(caps.len(), g.num_links());
    let mut d = Dinic::new(g.num_nodes());
    for (id, l) in g.links().iter().enumerate() {
        d.add(l.from, l.to, caps[id]);
    }
    let value = d.run(s, t);
    // residual reachability; level[] from the final failed BFS is exactly that
    let cut = (0..g.num_nodes()).filter(|&i| d.level[i] >= 0).collect();
    MaxFlow { value, cut }
}

/// `min_i maxflow(i -> a)` over sensors; ties go to the smallest node id.
pub fn min_mincut(g: &NetworkGraph, caps: &RateVector) -> MinMincut {
    let a = g.aggregator();
    let mut best = MinMincut { value: f64::INFINITY, argmin: a };
    for i in g.sensors() {
        let v = max_flow(g, caps, i, a).value;
        if v < best.value - 1e-12 {
            best = MinMincut { value: v, argmin: i };
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{triangle, Topology};

    #[test]
    fn triangle_flows() {
        let g = triangle();
        let caps = RateVector::from_graph(&g);
        let f = max_flow(&g, &caps, 2, 0);
        assert_eq!(f.value, 2.0);
        assert_eq!(f.cut, vec![2]);
        assert_eq!(max_flow(&g, &caps, 1, 0).value, 1.0);
        let m = min_mincut(&g, &caps);
        assert_eq!((m.value, m.argmin), (1.0, 1));
    }

    #[test]
    fn zero_caps_give_zero_flow() {
        let g = Topology::Complete { n: 4, capacity: 1.0 }.generate().unwrap();
        let caps = RateVector::zeros(g.num_links());
        assert_eq!(max_flow(&g, &caps, 3, 0).value, 0.0);
    }

    #[test]
    fn k5_and_line() {
        let k5 = Topology::Complete { n: 5, capacity: 1.0 }.generate().unwrap();
        assert_eq!(min_mincut(&k5, &RateVector::from_graph(&k5)).value, 4.0);
        let line = NetworkGraph::new(3, 0, &[(1, 0, 2.0), (2, 1, 1.0)]).unwrap();
        let m = min_mincut(&line, &RateVector::from_graph(&line));
        assert_eq!((m.value, m.argmin), (1.0, 2));
    }
}
