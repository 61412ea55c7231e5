use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sgpursuit::rsc::{
    convergence_condition, lemma_constants, lemma_constants_for, normalize_spectral, rsc_report,
    sample_rsc_rss, spectral_bounds, theorem_constants, RhoConvention, SamplerConfig,
    SpectralBounds,
};
use sgpursuit::score::{Score, ScoreConfig, ScoreKind};
use sgpursuit::AttributedNetwork;

fn random_net(n: usize, p: usize, seed: u64) -> AttributedNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..n)
        .map(|_| (0..p).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    // path plus random chords keeps every instance connected
    let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (v - 1, v)).collect();
    for u in 0..n {
        for v in u + 2..n {
            if rng.random_bool(0.2) {
                edges.push((u, v));
            }
        }
    }
    AttributedNetwork::new(n, edges, rows).unwrap()
}

fn dense_top_eigen(net: &AttributedNetwork) -> f64 {
    let w = DMatrix::from_row_slice(net.node_count(), net.attribute_count(), net.attributes());
    let gram = w.transpose() * &w;
    gram.symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn spectral_bounds_match_dense_eigendecomposition() {
    for seed in 0..20 {
        let net = random_net(5, 3, seed);
        let oracle = dense_top_eigen(&net);
        let SpectralBounds { b0, b1 } = spectral_bounds(&net).unwrap();
        assert!(
            (b1 - oracle).abs() <= 1e-6 * oracle.max(1.0),
            "seed {seed}: {b1} vs {oracle}"
        );
        assert!(
            (b0 - oracle).abs() <= 1e-6 * oracle.max(1.0),
            "seed {seed}: {b0} vs {oracle}"
        );
        assert!((b0 - b1).abs() <= 1e-6 * oracle.max(1.0));
    }
}

#[test]
fn normalization_hits_target_norm() {
    let net = normalize_spectral(&random_net(12, 7, 3), 0.9).unwrap();
    assert!((dense_top_eigen(&net) - 0.9).abs() < 1e-6);
}

#[test]
fn lemma_formulas_at_reference_points() {
    let f = (1.0, 1.0);
    let zero = SpectralBounds { b0: 0.0, b1: 0.0 };
    let nse = lemma_constants_for(ScoreKind::NegSquaredError, zero, f).unwrap();
    assert_eq!((nse.gamma_minus, nse.gamma_plus), (1.0, 3.0));
    let fisher = lemma_constants_for(ScoreKind::Fisher, zero, f).unwrap();
    assert_eq!((fisher.gamma_minus, fisher.gamma_plus), (1.0, 2.0));
    let half = SpectralBounds { b0: 0.5, b1: 0.5 };
    let logistic = lemma_constants_for(ScoreKind::Logistic, half, f).unwrap();
    assert_eq!(logistic.gamma_plus, 2.0);
    assert_eq!(logistic.gamma_minus, 0.5);
    assert!(lemma_constants_for(ScoreKind::Coherence, zero, f).is_none());
}

#[test]
fn theorem_constants_pinned() {
    // gamma- = gamma+ gives rho = 0 under both conventions, so
    // alpha = (c_T + 1) sqrt(2 - 2 c_H^2) and alpha0 = c_H
    for conv in [RhoConvention::Statement, RhoConvention::Appendix] {
        let t = theorem_constants(2.0, 2.0, 1.0, 0.5, conv);
        assert_eq!(t.rho, 0.0);
        assert_eq!(t.alpha0, 0.5);
        assert!((t.alpha - 2.0 * 1.5f64.sqrt()).abs() < 1e-12);
        assert!((t.beta0 - 0.75).abs() < 1e-12);
        let beta = 2.0 * (0.5 + 2f64.sqrt() * 0.5 * 0.75 / 0.75 + 2f64.sqrt() * 0.75 / 0.5);
        assert!((t.beta - beta).abs() < 1e-12);
    }
    // gamma- = 3, gamma+ = 4, c_T = 0.5, c_H = 0.9, evaluated by hand
    let st = theorem_constants(3.0, 4.0, 0.5, 0.9, RhoConvention::Statement);
    assert!((st.rho - 0.5).abs() < 1e-12);
    assert!((st.alpha0 + 0.05).abs() < 1e-12);
    assert!((st.alpha - 7.233581720863389).abs() < 1e-9);
    assert!((st.beta + 50.77290020072034).abs() < 1e-9);
    let ap = theorem_constants(3.0, 4.0, 0.5, 0.9, RhoConvention::Appendix);
    assert!((ap.rho - 0.6614378277661477).abs() < 1e-12);
    assert!((ap.alpha - 30.68408876832242).abs() < 1e-9);
}

#[test]
fn factor_condition_for_pcst_factors() {
    let (c_t, c_h) = (7f64.sqrt(), (1.0f64 / 14.0).sqrt());
    // 1/14 against 1 - 1/(2 (1 + sqrt 7)^2) = 0.9624...
    assert!(!convergence_condition(c_t, c_h));
    assert!(convergence_condition(0.0, 0.9));
}

fn sampler(trials: usize) -> SamplerConfig {
    SamplerConfig {
        k: 4,
        s: 3,
        trials,
        rng_seed: 11,
        mass: None,
    }
}

#[test]
fn fisher_on_normalized_w_has_no_violations() {
    let net = normalize_spectral(&random_net(40, 10, 5), 0.9).unwrap();
    let score = Score::with_defaults(ScoreKind::Fisher, &net).unwrap();
    let lemma = lemma_constants(ScoreKind::Fisher, &net, score.config(), (1.0, 1.0))
        .unwrap()
        .unwrap();
    assert!(lemma.applicable);
    let sample = sample_rsc_rss(&score, &net, &sampler(1000), Some(&lemma)).unwrap();
    assert!(
        sample.violations.is_empty(),
        "{:?}",
        &sample.violations[..sample.violations.len().min(5)]
    );
    assert!(
        sample.gamma_minus >= lemma.gamma_minus - 1e-9
            && sample.gamma_plus <= lemma.gamma_plus + 1e-9
    );
}

#[test]
fn scaled_w_makes_fisher_lemma_inapplicable() {
    let normalized = normalize_spectral(&random_net(40, 10, 6), 0.9).unwrap();
    let scaled = normalized
        .with_attributes(normalized.attributes().iter().map(|w| 10.0 * w).collect())
        .unwrap();
    let cfg = ScoreConfig::default();
    let reference = lemma_constants(ScoreKind::Fisher, &normalized, &cfg, (1.0, 1.0))
        .unwrap()
        .unwrap();
    let lemma = lemma_constants(ScoreKind::Fisher, &scaled, &cfg, (1.0, 1.0))
        .unwrap()
        .unwrap();
    assert!(!lemma.applicable);
    assert!(lemma
        .note
        .as_deref()
        .unwrap()
        .contains("lemma inapplicable"));
    let score = Score::with_defaults(ScoreKind::Fisher, &scaled).unwrap();
    let sample = sample_rsc_rss(&score, &scaled, &sampler(1000), Some(&lemma)).unwrap();
    assert!(
        sample.violations.is_empty(),
        "inapplicable lemmas are not checked"
    );
    assert!(
        sample.gamma_minus < reference.gamma_minus,
        "{} vs {}",
        sample.gamma_minus,
        reference.gamma_minus
    );
    let report = rsc_report(ScoreKind::Fisher, Some(&lemma), &sample, (1.0, 1.0), None);
    assert_eq!(
        report.section("rsc").unwrap().get("lemma"),
        Some("inapplicable")
    );
}

#[test]
fn quadratic_score_constants_stable_in_sample_count() {
    let net = normalize_spectral(&random_net(40, 10, 7), 0.9).unwrap();
    let cfg = ScoreConfig {
        response_c: Some(vec![0.5; 10]),
        ..ScoreConfig::default()
    };
    let score = Score::new(ScoreKind::NegSquaredError, cfg, &net).unwrap();
    let small = sample_rsc_rss(&score, &net, &sampler(100), None).unwrap();
    let large = sample_rsc_rss(&score, &net, &sampler(1000), None).unwrap();
    // constant Hessian: more samples only refine the extreme Rayleigh quotients
    let width = large.gamma_plus - large.gamma_minus;
    assert!((small.gamma_minus - large.gamma_minus).abs() <= 0.1 * width);
    assert!((small.gamma_plus - large.gamma_plus).abs() <= 0.1 * width);
    assert!(large.gamma_minus <= small.gamma_minus && large.gamma_plus >= small.gamma_plus);
}

#[test]
fn coherence_report_is_empirical_only() {
    let net = random_net(30, 6, 8);
    let score = Score::with_defaults(ScoreKind::Coherence, &net).unwrap();
    assert!(
        lemma_constants(ScoreKind::Coherence, &net, score.config(), (1.0, 1.0))
            .unwrap()
            .is_none()
    );
    let sample = sample_rsc_rss(&score, &net, &sampler(50), None).unwrap();
    let report = rsc_report(ScoreKind::Coherence, None, &sample, (1.0, 1.0), None);
    assert_eq!(
        report.section("rsc").unwrap().get("note"),
        Some("no lemma constants; empirical only")
    );
    assert!(report.section("lemma").is_none());
}
