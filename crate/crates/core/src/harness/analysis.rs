//! Capacity analysis of a graph, optionally under a schedule set.

use serde::Serialize;

use crate::flows::{
    min_mincut, optimal_sss, tree_packing_lp, AggregationTree, RateVector, ScheduleSet, TreeRecord,
};
use crate::graph::{NetworkGraph, NodeId};

use super::HarnessError;

#[derive(Debug, Clone, Serialize)]
pub struct PackingRecord {
    #[serde(flatten)]
    pub tree: TreeRecord,
    pub weight: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Analysis {
    /// Min-mincut of the wired capacities, or of the best static split when
    /// a schedule set is given.
    pub delta_star: f64,
    /// Rounds per time unit.
    pub lambda_star: f64,
    pub argmin_node: NodeId,
    /// Schedule weights of the best static split, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule_weights: Option<Vec<f64>>,
    pub packing: Vec<PackingRecord>,
}

/// `bits_per_packet` is `None` when capacities are already in packets.
pub fn analyze(
    g: &NetworkGraph,
    gamma: Option<&ScheduleSet>,
    trees: &[AggregationTree],
    bits_per_packet: Option<f64>,
) -> Result<Analysis, HarnessError> {
    let (rates, weights) = match gamma {
        None => (RateVector::from_graph(g), None),
        Some(gamma) => {
            let opt = optimal_sss(g, gamma)?;
            (opt.rates, Some(opt.rule.weights().to_vec()))
        }
    };
    let m = min_mincut(g, &rates);
    let packing = tree_packing_lp(g, &rates, trees)?;
    let per_packet = match bits_per_packet {
        None => 1.0,
        Some(b) if b > 0.0 => b,
        Some(b) => return Err(HarnessError::Config(format!("packet size {b} bits"))),
    };
    Ok(Analysis {
        delta_star: m.value,
        lambda_star: m.value / per_packet,
        argmin_node: m.argmin,
        schedule_weights: weights,
        packing: packing
            .entries
            .iter()
            .filter(|e| e.weight > 1e-12)
            .map(|e| PackingRecord { tree: e.tree.to_record(), weight: e.weight })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::enumerate_aggregation_trees;
    use crate::graph::{triangle, Topology};

    #[test]
    fn complete_graph() {
        let g = Topology::Complete { n: 5, capacity: 1.0 }.generate().unwrap();
        let trees = enumerate_aggregation_trees(&g, 1000).unwrap();
        let a = analyze(&g, None, &trees, Some(1.0)).unwrap();
        assert_eq!(a.delta_star, 4.0);
        assert_eq!(a.lambda_star, 4.0);
        let total: f64 = a.packing.iter().map(|p| p.weight).sum();
        assert!((total - 4.0).abs() < 1e-9);
    }

    #[test]
    fn shared_channel_and_bits() {
        let g = triangle();
        let gamma = ScheduleSet::singletons(&g, 1.0);
        let trees = enumerate_aggregation_trees(&g, 10).unwrap();
        let a = analyze(&g, Some(&gamma), &trees, Some(2.0)).unwrap();
        assert!((a.delta_star - 0.5).abs() < 1e-9);
        assert!((a.lambda_star - 0.25).abs() < 1e-9);
        assert_eq!(a.schedule_weights.as_ref().map(Vec::len), Some(3));
        let json = serde_json::to_value(&a).unwrap();
        assert!(json["packing"][0]["parents"].is_object());
    }
}
