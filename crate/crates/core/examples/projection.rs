//! Head and tail projections on a small path graph, against the exact
//! enumeration oracle.

use sgpursuit::projection::{
    exact_project_oracle, head_project, tail_project, Backend, ProjectionMode, TopologyConstraint,
};
use sgpursuit::AttributedNetwork;

fn main() -> sgpursuit::Result<()> {
    // path 0-1-2-3-4-5 with the mass split across both ends
    let net = AttributedNetwork::new(6, (1..6).map(|v| (v - 1, v)), vec![vec![0.0]; 6])?;
    let x = [3.0, 2.0, 0.1, 0.1, 2.5, 2.5];
    let c = TopologyConstraint::connected(3, Backend::PcstApprox);
    let head = head_project(&x, &c, &net)?;
    let tail = tail_project(&x, &c, &net)?;
    let best = exact_project_oracle(&x, 3, &net, ProjectionMode::Head, 15)?;
    println!("head {} captures {:.3}", head.support, head.captured_mass);
    println!(
        "tail {} leaves residual {:.3}",
        tail.support,
        tail.residual(&x)
    );
    println!(
        "best connected 3-set {} captures {:.3}",
        best.support, best.captured_mass
    );
    Ok(())
}
