//! Small benchmark: mean and spread of recovery over a few seeds.

use std::time::Instant;

use sgpursuit::metrics::{f_measure, mean_std};
use sgpursuit::projection::{Backend, TopologyConstraint};
use sgpursuit::pursuit::{sg_pursuit, PursuitConfig};
use sgpursuit::score::{Score, ScoreConfig, ScoreKind};
use sgpursuit::synth::{generate_anomalous, AnomalySynthConfig, BaseGraph};

fn main() -> sgpursuit::Result<()> {
    for base in [BaseGraph::Grid, BaseGraph::Knn(5)] {
        let mut node_f = Vec::new();
        let start = Instant::now();
        for seed in 0..5 {
            let (net, truth) = generate_anomalous(&AnomalySynthConfig {
                base_graph: base,
                rng_seed: seed,
                ..Default::default()
            })?;
            let cfg = ScoreConfig {
                r_sparsity: 30,
                ..ScoreConfig::default()
            };
            let score = Score::new(ScoreKind::ElevatedMean, cfg, &net)?;
            let c = TopologyConstraint::connected(30, Backend::PcstApprox);
            let found = sg_pursuit(&net, &score, &c, &PursuitConfig::new(30, 5))?;
            node_f.push(f_measure(&truth.nodes, &found.nodes).f);
        }
        let (mean, std) = mean_std(&node_f);
        println!(
            "{base}: node F {mean:.3} +- {std:.3} in {:.2?}",
            start.elapsed()
        );
    }
    Ok(())
}
