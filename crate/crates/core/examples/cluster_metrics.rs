//! Density, coherence and F-measure of a hand-picked subgraph.

use sgpursuit::metrics::{cluster_metrics, f_measure};
use sgpursuit::{AttributedNetwork, IndexSet};

fn main() -> sgpursuit::Result<()> {
    let rows = vec![
        vec![1.0, 5.0],
        vec![1.1, -3.0],
        vec![0.9, 0.0],
        vec![-4.0, 2.0],
    ];
    let net = AttributedNetwork::new(4, [(0, 1), (1, 2), (0, 2), (2, 3)], rows)?;
    let nodes = IndexSet::new([0, 1, 2]);
    let m = cluster_metrics(&net, &nodes, &IndexSet::new([0])).expect("non-empty cluster");
    println!(
        "density {:.3}, coherence distance {:.3}",
        m.density, m.coherence_distance
    );
    let f = f_measure(&IndexSet::new([0, 1, 3]), &nodes);
    println!(
        "precision {:.3}, recall {:.3}, F {:.3}",
        f.precision, f.recall, f.f
    );
    Ok(())
}
