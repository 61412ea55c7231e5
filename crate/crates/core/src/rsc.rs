//! Numerical checks of restricted strong concavity / smoothness.
//!
//! For a score `f` and two feasible points `(x, y)`, `(x', y')` the quantity
//!
//! ```text
//! 2 [f(x,y) - f(x',y') - grad_x f(x,y).(x-x') - grad_y f(x,y).(y-y')] / (||x-x'||^2 + ||y-y'||^2)
//! ```
//!
//! must lie in `[gamma-, gamma+]`. This module computes the closed-form
//! constants known for four of the scores, samples the ratio empirically and
//! derives the contraction constants of the pursuit loop from them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::doc::Document;
use crate::error::{Error, Result};
use crate::graph::{AttributedNetwork, IndexSet};
use crate::projection::{head_project, top_s_select, TopologyConstraint};
use crate::score::{ScoreConfig, ScoreFunction, ScoreKind};
use crate::util::dot;

const POWER_TOL: f64 = 1e-8;
const POWER_MAX_STEPS: usize = 10_000;
const POWER_SEED: u64 = 0x5eed;

/// Largest eigenvalues of `W W^T` (`b0`) and `W^T W` (`b1`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralBounds {
    pub b0: f64,
    pub b1: f64,
}

/// Power iteration for the top eigenvalue of the PSD operator `apply`.
fn power_iteration(dim: usize, apply: impl Fn(&[f64]) -> Vec<f64>) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(POWER_SEED);
    let mut v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let nv = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|a| *a /= nv);
    let mut last = f64::NAN;
    for _ in 0..POWER_MAX_STEPS {
        let w = apply(&v);
        let lambda = dot(&v, &w);
        let nw = dot(&w, &w).sqrt();
        if nw == 0.0 {
            return Ok(0.0);
        }
        if (lambda - last).abs() <= POWER_TOL * lambda.abs() {
            return Ok(lambda);
        }
        last = lambda;
        v = w.into_iter().map(|a| a / nw).collect();
    }
    Err(Error::NoConvergence(POWER_MAX_STEPS))
}

fn wt_times(net: &AttributedNetwork, u: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; net.attribute_count()];
    for (i, &ui) in u.iter().enumerate() {
        if ui != 0.0 {
            for (o, w) in out.iter_mut().zip(net.row(i)) {
                *o += ui * w;
            }
        }
    }
    out
}

fn w_times(net: &AttributedNetwork, v: &[f64]) -> Vec<f64> {
    (0..net.node_count()).map(|i| dot(net.row(i), v)).collect()
}

/// Both bounds equal `||W||_2^2`; they are estimated separately to mirror
/// the two conditions the lemmas state.
pub fn spectral_bounds(net: &AttributedNetwork) -> Result<SpectralBounds> {
    let b1 = power_iteration(net.attribute_count(), |v| wt_times(net, &w_times(net, v)))?;
    let b0 = power_iteration(net.node_count(), |u| w_times(net, &wt_times(net, u)))?;
    Ok(SpectralBounds { b0, b1 })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstantSource {
    LemmaFormula,
    EmpiricalSample,
}

impl std::fmt::Display for ConstantSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ConstantSource::LemmaFormula => "lemma-formula",
            ConstantSource::EmpiricalSample => "empirical-sample",
        })
    }
}

/// Convention for the shrinkage term `rho`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RhoConvention {
    /// `rho = sqrt(1 - gamma-/gamma+)`.
    Statement,
    /// `rho = sqrt(1 - (gamma-/gamma+)^2)`.
    Appendix,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TheoremConstants {
    pub rho: f64,
    pub alpha0: f64,
    pub beta0: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// Contraction constants of the pursuit loop for given RSC constants and
/// projection factors.
pub fn theorem_constants(
    gamma_minus: f64,
    gamma_plus: f64,
    c_t: f64,
    c_h: f64,
    conv: RhoConvention,
) -> TheoremConstants {
    let q = gamma_minus / gamma_plus;
    let rho = match conv {
        RhoConvention::Statement => (1.0 - q).max(0.0).sqrt(),
        RhoConvention::Appendix => (1.0 - q * q).max(0.0).sqrt(),
    };
    let alpha0 = c_h * (1.0 - rho) - rho;
    let beta0 = (c_h + 1.0) * gamma_minus / (gamma_plus * gamma_plus);
    let shrink = 1.0 - std::f64::consts::SQRT_2 * rho;
    let alpha = (c_t + 1.0) * (2.0 - 2.0 * alpha0 * alpha0).sqrt() / shrink;
    let beta = (c_t + 1.0) / shrink
        * (gamma_minus / (gamma_plus * gamma_plus)
            + std::f64::consts::SQRT_2 * alpha0 * beta0 / (1.0 - alpha0 * alpha0)
            + std::f64::consts::SQRT_2 * beta0 / alpha0);
    TheoremConstants {
        rho,
        alpha0,
        beta0,
        alpha,
        beta,
    }
}

/// Whether `c_H^2 > 1 - 1/(2 (1 + c_T)^2)`, the factor condition for a
/// contraction when `gamma+/gamma-` is close to 1.
pub fn convergence_condition(c_t: f64, c_h: f64) -> bool {
    c_h * c_h > 1.0 - 1.0 / (2.0 * (1.0 + c_t).powi(2))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RscConstants {
    pub score: ScoreKind,
    pub gamma_minus: f64,
    pub gamma_plus: f64,
    pub b0: f64,
    pub b1: f64,
    pub source: ConstantSource,
    /// False when the lemma's precondition on `W` fails.
    pub applicable: bool,
    pub note: Option<String>,
    pub c_t: f64,
    pub c_h: f64,
    pub statement: TheoremConstants,
    pub appendix: TheoremConstants,
    /// Restricted-isometry parameter, squared-error score only.
    pub delta: Option<f64>,
}

impl RscConstants {
    fn build(
        score: ScoreKind,
        (gamma_minus, gamma_plus): (f64, f64),
        bounds: SpectralBounds,
        source: ConstantSource,
        (c_t, c_h): (f64, f64),
    ) -> Self {
        RscConstants {
            score,
            gamma_minus,
            gamma_plus,
            b0: bounds.b0,
            b1: bounds.b1,
            source,
            applicable: true,
            note: None,
            c_t,
            c_h,
            statement: theorem_constants(
                gamma_minus,
                gamma_plus,
                c_t,
                c_h,
                RhoConvention::Statement,
            ),
            appendix: theorem_constants(gamma_minus, gamma_plus, c_t, c_h, RhoConvention::Appendix),
            delta: (score == ScoreKind::NegSquaredError).then(|| gamma_plus / 2.0 - 1.0),
        }
    }
}

/// Closed-form constants for spectral bounds `(b0, b1)` already scaled as
/// the score requires. `None` for scores without known constants.
pub fn lemma_constants_for(
    kind: ScoreKind,
    bounds: SpectralBounds,
    factors: (f64, f64),
) -> Option<RscConstants> {
    let SpectralBounds { b0, b1 } = bounds;
    let gammas = match kind {
        ScoreKind::NegSquaredError => {
            let b = b0.max(b1);
            (
                1.0,
                (2.0 * b + 2.0 * b.sqrt() + 1.0).max(3.0 + 2.0 * b.sqrt()),
            )
        }
        ScoreKind::Fisher | ScoreKind::ElevatedMean => ((1.0 - b0).min(1.0 - b1), 2.0),
        ScoreKind::Logistic => ((1.0 - b0).min(1.0 - b1), (2.0 * b0 + 1.0).max(2.0)),
        ScoreKind::Coherence | ScoreKind::CoherenceDensity => return None,
    };
    let mut c = RscConstants::build(kind, gammas, bounds, ConstantSource::LemmaFormula, factors);
    let (ok, need) = match kind {
        ScoreKind::NegSquaredError => (b0 <= 1.0 && b1 <= 1.0, "b0, b1 <= 1"),
        _ => (b0 < 1.0 && b1 < 1.0, "b0, b1 < 1"),
    };
    if !ok {
        c.applicable = false;
        c.note = Some(format!(
            "lemma inapplicable: needs {need}, got b0 = {b0}, b1 = {b1}; normalize W"
        ));
    }
    Some(c)
}

/// Lemma constants for a built-in score on `net`. The elevated-mean score
/// uses `W / sqrt(r)` with `r = cfg.r_sparsity`.
pub fn lemma_constants(
    kind: ScoreKind,
    net: &AttributedNetwork,
    cfg: &ScoreConfig,
    factors: (f64, f64),
) -> Result<Option<RscConstants>> {
    if matches!(kind, ScoreKind::Coherence | ScoreKind::CoherenceDensity) {
        return Ok(None);
    }
    let mut bounds = spectral_bounds(net)?;
    if kind == ScoreKind::ElevatedMean {
        let r = cfg.r_sparsity as f64;
        bounds = SpectralBounds {
            b0: bounds.b0 / r,
            b1: bounds.b1 / r,
        };
    }
    Ok(lemma_constants_for(kind, bounds, factors))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SamplerConfig {
    /// Node budget; supports are drawn from connected sets of size <= 2k.
    pub k: usize,
    /// Attribute budget; supports have size <= 2s.
    pub s: usize,
    pub trials: usize,
    pub rng_seed: u64,
    /// Fix `1^T x` to this value (elevated-mean slice).
    pub mass: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Violation {
    pub trial: usize,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RscSample {
    pub gamma_minus: f64,
    pub gamma_plus: f64,
    pub ratios: Vec<f64>,
    /// Ratios outside the lemma interval by more than `1e-9`.
    pub violations: Vec<Violation>,
}

/// Random vector supported on `support` with entries uniform in the
/// score's box (clipped to `[-1, 1]` where unbounded). With `mass`, entries
/// are `clamp(u_i t, 0, 1)` with `t` chosen by bisection so they sum to
/// `mass`.
fn sample_values(
    support: &IndexSet,
    len: usize,
    lo: f64,
    hi: f64,
    mass: Option<f64>,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let (lo, hi) = (lo.max(-1.0), hi.min(1.0));
    let mut v = vec![0.0; len];
    match mass {
        None => {
            for i in support.iter() {
                v[i] = rng.random_range(lo..=hi);
            }
        }
        Some(r) => {
            let u: Vec<f64> = support
                .iter()
                .map(|_| rng.random_range(0.05..=1.0))
                .collect();
            let total = |t: f64| u.iter().map(|a| (a * t).min(1.0)).sum::<f64>();
            let (mut a, mut b) = (0.0, r / u.iter().cloned().fold(f64::INFINITY, f64::min));
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if total(mid) < r {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            for (i, ui) in support.iter().zip(&u) {
                v[i] = (ui * b).min(1.0);
            }
        }
    }
    v
}

fn random_support(net: &AttributedNetwork, size: usize, rng: &mut ChaCha8Rng) -> IndexSet {
    let n = net.node_count();
    loop {
        let start = rng.random_range(0..n);
        if let Some(s) = net.random_walk_subset(start, size, 100 * n, rng) {
            return s;
        }
        if size == 1 {
            return IndexSet::new([start]);
        }
    }
}

fn random_columns(p: usize, size: usize, rng: &mut ChaCha8Rng) -> IndexSet {
    let mut cols: Vec<usize> = (0..p).collect();
    for i in 0..size {
        let j = rng.random_range(i..p);
        cols.swap(i, j);
    }
    IndexSet::new(cols[..size].iter().copied())
}

/// Largest connected-subset size reachable from every start is not known
/// upfront; cap the walk target by the smallest component size holding a
/// walk of that length.
fn max_walk_size(net: &AttributedNetwork, want: usize) -> usize {
    let (labels, count) = net.component_labels();
    let mut sizes = vec![0usize; count];
    for l in labels {
        sizes[l] += 1;
    }
    want.min(sizes.into_iter().max().unwrap_or(1))
}

/// Samples the ratio on random feasible pairs and compares with `lemma`.
pub fn sample_rsc_rss(
    score: &dyn ScoreFunction,
    net: &AttributedNetwork,
    cfg: &SamplerConfig,
    lemma: Option<&RscConstants>,
) -> Result<RscSample> {
    if cfg.trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    if cfg.k == 0 || cfg.s == 0 {
        return Err(Error::Config("sampler needs k >= 1 and s >= 1".into()));
    }
    let (n, p) = (net.node_count(), net.attribute_count());
    let (dx, dy) = (score.domain_x(), score.domain_y());
    let max_nodes = max_walk_size(net, (2 * cfg.k).min(n));
    let min_nodes = match cfg.mass {
        Some(r) if r > max_nodes as f64 => {
            return Err(Error::Config(format!(
                "mass {r} cannot be reached with at most {max_nodes} nodes in [0, 1]"
            )))
        }
        Some(r) => (r.ceil() as usize).max(1),
        None => 1,
    };
    let max_cols = (2 * cfg.s).min(p);

    let ratios: Vec<f64> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed.wrapping_add(trial as u64));
            loop {
                let draw_x = |rng: &mut ChaCha8Rng| {
                    let size = rng.random_range(min_nodes..=max_nodes);
                    let support = random_support(net, size, rng);
                    sample_values(&support, n, dx.lo, dx.hi, cfg.mass, rng)
                };
                let x = draw_x(&mut rng);
                let x2 = draw_x(&mut rng);
                let draw_y = |rng: &mut ChaCha8Rng| {
                    let size = rng.random_range(1..=max_cols);
                    sample_values(&random_columns(p, size, rng), p, dy.lo, dy.hi, None, rng)
                };
                let y = draw_y(&mut rng);
                let y2 = draw_y(&mut rng);
                let dxv: Vec<f64> = x.iter().zip(&x2).map(|(a, b)| a - b).collect();
                let dyv: Vec<f64> = y.iter().zip(&y2).map(|(a, b)| a - b).collect();
                let denom = dot(&dxv, &dxv) + dot(&dyv, &dyv);
                if denom == 0.0 {
                    continue;
                }
                let e = score.evaluate(net, &x, &y);
                let gap = e.value
                    - score.value(net, &x2, &y2)
                    - dot(&e.grad_x, &dxv)
                    - dot(&e.grad_y, &dyv);
                return 2.0 * gap / denom;
            }
        })
        .collect();

    if let Some(t) = ratios.iter().position(|r| !r.is_finite()) {
        return Err(Error::NonFinite {
            score: score.name().to_string(),
            context: format!("sample {t}"),
        });
    }
    let gamma_minus = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let gamma_plus = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let violations = match lemma {
        Some(c) if c.applicable => ratios
            .iter()
            .enumerate()
            .filter(|(_, &r)| r < c.gamma_minus - 1e-9 || r > c.gamma_plus + 1e-9)
            .map(|(trial, &ratio)| Violation { trial, ratio })
            .collect(),
        _ => Vec::new(),
    };
    Ok(RscSample {
        gamma_minus,
        gamma_plus,
        ratios,
        violations,
    })
}

/// Gradient-size terms of the error bound at a reference point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsilonTerms {
    /// Largest `||[grad_x]_S||^2` over `S` in the model with budget `2k`.
    pub eps_x_2k: f64,
    /// Same with budget `8k`.
    pub eps_x_8k: f64,
    /// Largest `||[grad_y]_R||^2` over `|R| <= 3s`.
    pub eps_y_3s: f64,
    /// Same with `|R| <= 2s`.
    pub eps_y_2s: f64,
}

/// Evaluates the error-bound terms at `(x*, y*)`; the node maximum uses
/// the constraint's head projection, so it is exact only with the exact
/// backend.
pub fn epsilon_terms(
    score: &dyn ScoreFunction,
    net: &AttributedNetwork,
    constraint: &TopologyConstraint,
    s: usize,
    x_star: &[f64],
    y_star: &[f64],
) -> Result<EpsilonTerms> {
    let n = net.node_count();
    let e = score.evaluate(net, x_star, y_star);
    let node_term = |budget: usize| -> Result<f64> {
        let c = constraint.with_budget(budget.min(n));
        Ok(head_project(&e.grad_x, &c, net)?.captured_mass.powi(2))
    };
    let attr_term = |budget: usize| -> Result<f64> {
        let (set, _) = top_s_select(&e.grad_y, budget)?;
        Ok(set.iter().map(|j| e.grad_y[j] * e.grad_y[j]).sum())
    };
    Ok(EpsilonTerms {
        eps_x_2k: node_term(2 * constraint.k)?,
        eps_x_8k: node_term(8 * constraint.k)?,
        eps_y_3s: attr_term(3 * s)?,
        eps_y_2s: attr_term(2 * s)?,
    })
}

fn theorem_section(doc: &mut Document, name: &str, t: &TheoremConstants) {
    doc.section_mut(name)
        .set("rho", t.rho)
        .set("alpha0", t.alpha0)
        .set("beta0", t.beta0)
        .set("alpha", t.alpha)
        .set("beta", t.beta)
        .set("alpha_below_one", t.alpha < 1.0);
}

/// Verifier report: lemma constants (if any), empirical constants,
/// violations and the contraction constants under both `rho` conventions.
pub fn rsc_report(
    kind: ScoreKind,
    lemma: Option<&RscConstants>,
    sample: &RscSample,
    factors: (f64, f64),
    eps: Option<&EpsilonTerms>,
) -> Document {
    let mut doc = Document::new();
    let (c_t, c_h) = factors;
    let head = doc.section_mut("rsc");
    head.set("score", kind)
        .set("c_t", c_t)
        .set("c_h", c_h)
        .set("factor_condition_holds", convergence_condition(c_t, c_h));
    match lemma {
        None => {
            head.set("lemma", "none")
                .set("note", "no lemma constants; empirical only");
        }
        Some(c) => {
            head.set(
                "lemma",
                if c.applicable {
                    "applicable"
                } else {
                    "inapplicable"
                },
            );
            if let Some(note) = &c.note {
                head.set("note", note);
            }
            doc.section_mut("lemma")
                .set("source", c.source)
                .set("b0", c.b0)
                .set("b1", c.b1)
                .set("gamma_minus", c.gamma_minus)
                .set("gamma_plus", c.gamma_plus);
            if let Some(delta) = c.delta {
                doc.section_mut("lemma").set("delta", delta);
            }
            theorem_section(&mut doc, "lemma.statement", &c.statement);
            theorem_section(&mut doc, "lemma.appendix", &c.appendix);
        }
    }
    doc.section_mut("empirical")
        .set("source", ConstantSource::EmpiricalSample)
        .set("samples", sample.ratios.len())
        .set("gamma_minus", sample.gamma_minus)
        .set("gamma_plus", sample.gamma_plus)
        .set("violations", sample.violations.len())
        .set_list(
            "violating_trials",
            sample.violations.iter().map(|v| v.trial),
        );
    if sample.gamma_minus > 0.0 {
        let st = theorem_constants(
            sample.gamma_minus,
            sample.gamma_plus,
            c_t,
            c_h,
            RhoConvention::Statement,
        );
        let ap = theorem_constants(
            sample.gamma_minus,
            sample.gamma_plus,
            c_t,
            c_h,
            RhoConvention::Appendix,
        );
        theorem_section(&mut doc, "empirical.statement", &st);
        theorem_section(&mut doc, "empirical.appendix", &ap);
    }
    if let Some(e) = eps {
        doc.section_mut("epsilon")
            .set("eps_x_2k", e.eps_x_2k)
            .set("eps_x_8k", e.eps_x_8k)
            .set("eps_y_3s", e.eps_y_3s)
            .set("eps_y_2s", e.eps_y_2s);
    }
    doc
}

/// Scales `W` so that `||W||_2^2 = target`.
pub fn normalize_spectral(net: &AttributedNetwork, target: f64) -> Result<AttributedNetwork> {
    let b = spectral_bounds(net)?.b1;
    if b == 0.0 {
        return Ok(net.clone());
    }
    let scale = (target / b).sqrt();
    net.with_attributes(net.attributes().iter().map(|w| w * scale).collect())
}
