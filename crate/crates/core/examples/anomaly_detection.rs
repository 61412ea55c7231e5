//! Elevated-mean detection of an anomalous connected region on a grid.

use sgpursuit::metrics::f_measure;
use sgpursuit::projection::{Backend, TopologyConstraint};
use sgpursuit::pursuit::{sg_pursuit, PursuitConfig};
use sgpursuit::score::{Score, ScoreConfig, ScoreKind};
use sgpursuit::synth::{generate_anomalous, AnomalySynthConfig};

fn main() -> sgpursuit::Result<()> {
    let (net, truth) = generate_anomalous(&AnomalySynthConfig::default())?;
    let cfg = ScoreConfig {
        r_sparsity: 30,
        ..ScoreConfig::default()
    };
    let score = Score::new(ScoreKind::ElevatedMean, cfg, &net)?;
    let constraint = TopologyConstraint::connected(30, Backend::PcstApprox);
    let found = sg_pursuit(&net, &score, &constraint, &PursuitConfig::new(30, 5))?;
    println!("planted attributes {}", truth.attributes);
    println!("detected attributes {}", found.attributes);
    println!(
        "node F {:.3}, attribute F {:.3}",
        f_measure(&truth.nodes, &found.nodes).f,
        f_measure(&truth.attributes, &found.attributes).f
    );
    Ok(())
}
