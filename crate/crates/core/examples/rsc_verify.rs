//! Sample restricted curvature constants and compare them with the
//! closed-form interval.

use sgpursuit::projection::Backend;
use sgpursuit::rsc::{
    lemma_constants, normalize_spectral, rsc_report, sample_rsc_rss, SamplerConfig,
};
use sgpursuit::score::{Score, ScoreKind};
use sgpursuit::synth::{generate_anomalous, AnomalySynthConfig};

fn main() -> sgpursuit::Result<()> {
    let (raw, _) = generate_anomalous(&AnomalySynthConfig {
        n: 100,
        ..Default::default()
    })?;
    // the Fisher interval only holds once ||W^T W|| < 1
    let net = normalize_spectral(&raw, 0.9)?;
    let score = Score::with_defaults(ScoreKind::Fisher, &net)?;
    let factors = Backend::PcstApprox.approx_factors();
    let lemma = lemma_constants(ScoreKind::Fisher, &net, score.config(), factors)?;
    let sampler = SamplerConfig {
        k: 10,
        s: 5,
        trials: 500,
        rng_seed: 1,
        mass: None,
    };
    let sample = sample_rsc_rss(&score, &net, &sampler, lemma.as_ref())?;
    print!(
        "{}",
        rsc_report(ScoreKind::Fisher, lemma.as_ref(), &sample, factors, None).render()
    );
    Ok(())
}
