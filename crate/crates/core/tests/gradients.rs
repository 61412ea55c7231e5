use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sgpursuit::score::{Score, ScoreConfig, ScoreFunction, ScoreKind};
use sgpursuit::AttributedNetwork;

const H: f64 = 1e-5;

fn random_net(rng: &mut ChaCha8Rng) -> AttributedNetwork {
    let n = rng.random_range(4..=10);
    let p = rng.random_range(2..=6);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(0.4) {
                edges.push((u, v));
            }
        }
    }
    let rows = (0..n)
        .map(|_| {
            (0..p)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();
    AttributedNetwork::new(n, edges, rows).unwrap()
}

fn score_for(kind: ScoreKind, net: &AttributedNetwork, rng: &mut ChaCha8Rng) -> Score {
    let cfg = ScoreConfig {
        response_c: Some(
            (0..net.attribute_count())
                .map(|_| rng.random_range(-2.0..2.0))
                .collect(),
        ),
        ..ScoreConfig::default()
    };
    Score::new(kind, cfg, net).unwrap()
}

/// Interior point of the score's box domain.
fn interior(kind: ScoreKind, len: usize, is_x: bool, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let unbounded = match kind {
        ScoreKind::NegSquaredError => true,
        ScoreKind::Logistic => is_x,
        _ => false,
    };
    (0..len)
        .map(|_| {
            if unbounded {
                rng.random_range(-1.5..1.5)
            } else {
                rng.random_range(0.05..0.95)
            }
        })
        .collect()
}

fn central(f: impl Fn(&[f64]) -> f64, v: &[f64]) -> Vec<f64> {
    (0..v.len())
        .map(|i| {
            let mut a = v.to_vec();
            let mut b = v.to_vec();
            a[i] += H;
            b[i] -= H;
            (f(&a) - f(&b)) / (2.0 * H)
        })
        .collect()
}

fn rel_err(analytic: &[f64], numeric: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, b)| (a - b).abs() / b.abs().max(1.0))
        .fold(0.0, f64::max)
}

#[test]
fn gradients_match_central_differences() {
    for kind in ScoreKind::ALL {
        let mut rng = ChaCha8Rng::seed_from_u64(kind as u64 + 17);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let net = random_net(&mut rng);
            let f = score_for(kind, &net, &mut rng);
            let x = interior(kind, net.node_count(), true, &mut rng);
            let y = interior(kind, net.attribute_count(), false, &mut rng);
            let e = f.evaluate(&net, &x, &y);
            let nx = central(|v| f.value(&net, v, &y), &x);
            let ny = central(|v| f.value(&net, &x, v), &y);
            worst = worst
                .max(rel_err(&e.grad_x, &nx))
                .max(rel_err(&e.grad_y, &ny));
        }
        assert!(worst <= 1e-5, "{kind}: worst relative error {worst:e}");
    }
}

#[test]
fn logistic_y_gradient_is_log_odds_minus_y() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let net = random_net(&mut rng);
    let f = Score::with_defaults(ScoreKind::Logistic, &net).unwrap();
    let x = interior(ScoreKind::Logistic, net.node_count(), true, &mut rng);
    let y = interior(ScoreKind::Logistic, net.attribute_count(), false, &mut rng);
    let gy = f.grad_y(&net, &x, &y);
    for j in 0..net.attribute_count() {
        let z: f64 = (0..net.node_count())
            .map(|i| x[i] * net.attribute(i, j))
            .sum();
        // log g - log(1 - g) = z for the logistic sigmoid
        assert!((gy[j] - (z - y[j])).abs() < 1e-9);
    }
}

#[test]
fn elevated_mean_equals_fisher_on_unit_mass() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let net = random_net(&mut rng);
        let mut x = interior(ScoreKind::Fisher, net.node_count(), true, &mut rng);
        let total: f64 = x.iter().sum();
        x.iter_mut().for_each(|v| *v /= total);
        let y = interior(ScoreKind::Fisher, net.attribute_count(), false, &mut rng);
        let a = Score::with_defaults(ScoreKind::Fisher, &net)
            .unwrap()
            .value(&net, &x, &y);
        let b = Score::with_defaults(ScoreKind::ElevatedMean, &net)
            .unwrap()
            .value(&net, &x, &y);
        assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
    }
}

#[test]
fn scores_are_permutation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for kind in ScoreKind::ALL {
        let net = random_net(&mut rng);
        let (n, p) = (net.node_count(), net.attribute_count());
        let f = score_for(kind, &net, &mut rng);
        let x = interior(kind, n, true, &mut rng);
        let y = interior(kind, p, false, &mut rng);
        let mut pn: Vec<usize> = (0..n).collect();
        let mut pp: Vec<usize> = (0..p).collect();
        pn.reverse();
        pp.rotate_left(1);
        // new node a holds old node pn[a]; new column b holds old column pp[b]
        let mut inv = vec![0; n];
        for (a, &old) in pn.iter().enumerate() {
            inv[old] = a;
        }
        let edges: Vec<(usize, usize)> =
            net.edges().iter().map(|&(u, v)| (inv[u], inv[v])).collect();
        let rows = pn
            .iter()
            .map(|&old| pp.iter().map(|&j| net.attribute(old, j)).collect())
            .collect();
        let permuted = AttributedNetwork::new(n, edges, rows).unwrap();
        let c = f
            .config()
            .response_c
            .clone()
            .map(|c| pp.iter().map(|&j| c[j]).collect());
        let g = Score::new(
            kind,
            ScoreConfig {
                response_c: c,
                ..f.config().clone()
            },
            &permuted,
        )
        .unwrap();
        let px: Vec<f64> = pn.iter().map(|&old| x[old]).collect();
        let py: Vec<f64> = pp.iter().map(|&old| y[old]).collect();
        let a = f.evaluate(&net, &x, &y);
        let b = g.evaluate(&permuted, &px, &py);
        assert!(
            (a.value - b.value).abs() < 1e-9 * a.value.abs().max(1.0),
            "{kind}"
        );
        for (new, &old) in pn.iter().enumerate() {
            assert!((a.grad_x[old] - b.grad_x[new]).abs() < 1e-9 * a.grad_x[old].abs().max(1.0));
        }
        for (new, &old) in pp.iter().enumerate() {
            assert!((a.grad_y[old] - b.grad_y[new]).abs() < 1e-9 * a.grad_y[old].abs().max(1.0));
        }
    }
}
