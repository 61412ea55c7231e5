//! Evaluation metrics for detected clusters.

use crate::graph::{AttributeSubset, AttributedNetwork, IndexSet, NodeSubset};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FMeasure {
    pub precision: f64,
    pub recall: f64,
    pub f: f64,
}

/// Precision, recall and their harmonic mean; all zero when either set is
/// empty or they do not overlap.
pub fn f_measure(truth: &IndexSet, detected: &IndexSet) -> FMeasure {
    let hit = truth.intersection_len(detected) as f64;
    if hit == 0.0 {
        return FMeasure {
            precision: 0.0,
            recall: 0.0,
            f: 0.0,
        };
    }
    let precision = hit / detected.len() as f64;
    let recall = hit / truth.len() as f64;
    FMeasure {
        precision,
        recall,
        f: 2.0 * precision * recall / (precision + recall),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClusterMetrics {
    /// Average induced degree `2 |E_S| / |S|`.
    pub density: f64,
    pub size: usize,
    /// Mean pairwise distance of attribute rows restricted to the selected
    /// attributes.
    pub coherence_distance: f64,
    /// Set for single-node clusters, whose coherence distance is 0 by
    /// convention.
    pub singleton: bool,
}

/// `None` for an empty cluster.
pub fn cluster_metrics(
    net: &AttributedNetwork,
    nodes: &NodeSubset,
    attributes: &AttributeSubset,
) -> Option<ClusterMetrics> {
    if nodes.is_empty() {
        return None;
    }
    let size = nodes.len();
    let density = 2.0 * net.induced_edge_count(nodes) as f64 / size as f64;
    let idx = nodes.as_slice();
    let mut total = 0.0;
    for (a, &u) in idx.iter().enumerate() {
        for &v in &idx[a + 1..] {
            total += attributes
                .iter()
                .map(|j| (net.attribute(u, j) - net.attribute(v, j)).powi(2))
                .sum::<f64>()
                .sqrt();
        }
    }
    let pairs = size * (size - 1) / 2;
    Some(ClusterMetrics {
        density,
        size,
        coherence_distance: if pairs == 0 {
            0.0
        } else {
            total / pairs as f64
        },
        singleton: size == 1,
    })
}

/// Sample mean and (population) standard deviation; `(NaN, NaN)` when empty.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_examples() {
        let t = IndexSet::new([1, 2, 3]);
        let r = f_measure(&t, &IndexSet::new([2, 3, 4]));
        assert!((r.precision - 2.0 / 3.0).abs() < 1e-15 && (r.f - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(f_measure(&t, &t).f, 1.0);
        assert_eq!(f_measure(&t, &IndexSet::empty()).f, 0.0);
    }

    #[test]
    fn metrics_examples() {
        let tri = AttributedNetwork::new(3, [(0, 1), (1, 2), (0, 2)], vec![vec![1.0]; 3]).unwrap();
        let m = cluster_metrics(&tri, &IndexSet::new([0, 1, 2]), &IndexSet::new([0])).unwrap();
        assert_eq!((m.density, m.size, m.coherence_distance), (2.0, 3, 0.0));
        let pair =
            AttributedNetwork::new(2, [(0, 1)], vec![vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        let m = cluster_metrics(&pair, &IndexSet::new([0, 1]), &IndexSet::new([0, 1])).unwrap();
        assert_eq!(m.coherence_distance, 5.0);
        let m = cluster_metrics(&pair, &IndexSet::new([1]), &IndexSet::new([0])).unwrap();
        assert!(m.singleton && m.coherence_distance == 0.0);
        assert!(cluster_metrics(&pair, &IndexSet::empty(), &IndexSet::empty()).is_none());
    }

    #[test]
    fn mean_std_basic() {
        assert_eq!(mean_std(&[1.0, 3.0]), (2.0, 1.0));
    }
}
