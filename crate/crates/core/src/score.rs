//! Score functions `f(x, y)` over node coefficients `x` and attribute
//! coefficients `y`.
//!
//! Every built-in score carries the stabilizing `-1/2 ||x||^2 - 1/2 ||y||^2`
//! term. Gradients are analytic and can be requested for a subset of
//! coordinates, which keeps restricted solves cheap on large networks.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::AttributedNetwork;

/// Closed interval applied to every coordinate of a vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const UNIT: Interval = Interval { lo: 0.0, hi: 1.0 };
    pub const REAL: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };
    pub const NONNEGATIVE: Interval = Interval {
        lo: 0.0,
        hi: f64::INFINITY,
    };

    pub fn clamp(&self, v: f64) -> f64 {
        v.max(self.lo).min(self.hi)
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }
}

/// Value and full gradients at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub grad_x: Vec<f64>,
    pub grad_y: Vec<f64>,
    /// A guarded denominator was hit (e.g. `1^T x ~ 0`).
    pub degenerate: bool,
}

/// Coordinate selection for partial gradients; `None` means all.
pub type Coords<'a> = Option<&'a [usize]>;

pub trait ScoreFunction: Send + Sync {
    fn name(&self) -> &str;

    fn domain_x(&self) -> Interval;

    fn domain_y(&self) -> Interval;

    fn value(&self, net: &AttributedNetwork, x: &[f64], y: &[f64]) -> f64;

    /// Gradients with respect to the selected coordinates; entries outside
    /// the selection are zero.
    fn gradient_on(
        &self,
        net: &AttributedNetwork,
        x: &[f64],
        y: &[f64],
        rows: Coords<'_>,
        cols: Coords<'_>,
    ) -> (Vec<f64>, Vec<f64>);

    fn is_degenerate(&self, _x: &[f64]) -> bool {
        false
    }

    fn grad_x(&self, net: &AttributedNetwork, x: &[f64], y: &[f64]) -> Vec<f64> {
        self.gradient_on(net, x, y, None, Some(&[])).0
    }

    fn grad_y(&self, net: &AttributedNetwork, x: &[f64], y: &[f64]) -> Vec<f64> {
        self.gradient_on(net, x, y, Some(&[]), None).1
    }

    fn evaluate(&self, net: &AttributedNetwork, x: &[f64], y: &[f64]) -> Evaluation {
        let (grad_x, grad_y) = self.gradient_on(net, x, y, None, None);
        Evaluation {
            value: self.value(net, x, y),
            grad_x,
            grad_y,
            degenerate: self.is_degenerate(x),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScoreKind {
    Fisher,
    ElevatedMean,
    Coherence,
    CoherenceDensity,
    NegSquaredError,
    Logistic,
}

impl ScoreKind {
    pub const ALL: [ScoreKind; 6] = [
        ScoreKind::Fisher,
        ScoreKind::ElevatedMean,
        ScoreKind::Coherence,
        ScoreKind::CoherenceDensity,
        ScoreKind::NegSquaredError,
        ScoreKind::Logistic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScoreKind::Fisher => "fisher",
            ScoreKind::ElevatedMean => "elevated-mean",
            ScoreKind::Coherence => "coherence",
            ScoreKind::CoherenceDensity => "coherence-density",
            ScoreKind::NegSquaredError => "nsq-error",
            ScoreKind::Logistic => "logistic",
        }
    }
}

impl fmt::Display for ScoreKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScoreKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScoreKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown score {s:?} (expected one of fisher, elevated-mean, coherence, coherence-density, nsq-error, logistic)"
                ))
            })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScoreConfig {
    /// Within-cluster variance parameter of the coherence scores.
    pub sigma: f64,
    /// Weight of the density term.
    pub lambda: f64,
    /// Response vector `c` of the squared-error score (length `p`).
    pub response_c: Option<Vec<f64>>,
    /// Assumed sparsity `r` of `x`, used only by the RSC verifier.
    pub r_sparsity: usize,
    pub denom_guard: f64,
    /// Restrict the squared-error score to nonnegative coefficients.
    pub nonnegative: bool,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        ScoreConfig {
            sigma: 0.01,
            lambda: 5.0,
            response_c: None,
            r_sparsity: 1,
            denom_guard: 1e-8,
            nonnegative: false,
        }
    }
}

impl ScoreConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!(
                "lambda must be nonnegative, got {}",
                self.lambda
            )));
        }
        if self.r_sparsity == 0 || self.r_sparsity > n {
            return Err(Error::Config(format!(
                "r_sparsity must lie in [1, {n}], got {}",
                self.r_sparsity
            )));
        }
        if !(self.denom_guard > 0.0) {
            return Err(Error::Config("denom_guard must be positive".into()));
        }
        Ok(())
    }
}

/// One of the built-in scores together with its configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct Score {
    kind: ScoreKind,
    cfg: ScoreConfig,
}

impl Score {
    pub fn new(kind: ScoreKind, cfg: ScoreConfig, net: &AttributedNetwork) -> Result<Self> {
        cfg.validate(net.node_count())?;
        if kind == ScoreKind::NegSquaredError {
            match &cfg.response_c {
                None => {
                    return Err(Error::Config(
                        "nsq-error score needs a response vector c".into(),
                    ))
                }
                Some(c) if c.len() != net.attribute_count() => {
                    return Err(Error::Config(format!(
                        "response vector has length {}, expected p = {}",
                        c.len(),
                        net.attribute_count()
                    )))
                }
                Some(c) if c.iter().any(|v| !v.is_finite()) => {
                    return Err(Error::Config("response vector is not finite".into()))
                }
                _ => {}
            }
        }
        Ok(Score { kind, cfg })
    }

    /// Built-in score with default configuration (not usable for
    /// `NegSquaredError`, which needs a response vector).
    pub fn with_defaults(kind: ScoreKind, net: &AttributedNetwork) -> Result<Self> {
        Score::new(kind, ScoreConfig::default(), net)
    }

    pub fn kind(&self) -> ScoreKind {
        self.kind
    }

    pub fn config(&self) -> &ScoreConfig {
        &self.cfg
    }

    fn mass(&self, x: &[f64]) -> (f64, bool) {
        let s: f64 = x.iter().sum();
        if s <= self.cfg.denom_guard {
            (self.cfg.denom_guard, true)
        } else {
            (s, false)
        }
    }
}

const LOG_CLAMP: f64 = 1e-12;

fn nonzeros(v: &[f64]) -> Vec<usize> {
    (0..v.len()).filter(|&i| v[i] != 0.0).collect()
}

fn half_sq(v: &[f64]) -> f64 {
    0.5 * v.iter().map(|a| a * a).sum::<f64>()
}

/// `sum_{j in ynz} W_ij y_j`.
fn row_dot(net: &AttributedNetwork, i: usize, y: &[f64], ynz: &[usize]) -> f64 {
    let row = net.row(i);
    ynz.iter().map(|&j| row[j] * y[j]).sum()
}

/// `(W^T x)_j` for every column, accumulated over the nonzeros of `x`.
fn wt_x(net: &AttributedNetwork, x: &[f64], xnz: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; net.attribute_count()];
    for &i in xnz {
        for (o, w) in out.iter_mut().zip(net.row(i)) {
            *o += x[i] * w;
        }
    }
    out
}

/// `(W^T x)_j` and `((W o W)^T x)_j` for selected columns.
fn column_moments(
    net: &AttributedNetwork,
    x: &[f64],
    xnz: &[usize],
    cols: &[usize],
) -> (Vec<f64>, Vec<f64>) {
    let mut b = vec![0.0; cols.len()];
    let mut a = vec![0.0; cols.len()];
    for &i in xnz {
        let row = net.row(i);
        for (k, &j) in cols.iter().enumerate() {
            let w = row[j];
            b[k] += x[i] * w;
            a[k] += x[i] * w * w;
        }
    }
    (a, b)
}

fn all_or(sel: Coords<'_>, len: usize) -> Vec<usize> {
    match sel {
        Some(s) => s.to_vec(),
        None => (0..len).collect(),
    }
}

/// Numerically stable `(g(z), 1 - g(z))` for the logistic sigmoid.
fn sigmoid_pair(z: f64) -> (f64, f64) {
    if z >= 0.0 {
        let e = (-z).exp();
        (1.0 / (1.0 + e), e / (1.0 + e))
    } else {
        let e = z.exp();
        (e / (1.0 + e), 1.0 / (1.0 + e))
    }
}

fn clamp_log(v: f64) -> (f64, bool) {
    if v < LOG_CLAMP {
        (LOG_CLAMP.ln(), true)
    } else if v > 1.0 - LOG_CLAMP {
        ((1.0 - LOG_CLAMP).ln(), true)
    } else {
        (v.ln(), false)
    }
}

impl ScoreFunction for Score {
    fn name(&self) -> &str {
        self.kind.as_str()
    }

    fn domain_x(&self) -> Interval {
        match self.kind {
            ScoreKind::NegSquaredError if self.cfg.nonnegative => Interval::NONNEGATIVE,
            ScoreKind::NegSquaredError | ScoreKind::Logistic => Interval::REAL,
            _ => Interval::UNIT,
        }
    }

    fn domain_y(&self) -> Interval {
        match self.kind {
            ScoreKind::NegSquaredError if self.cfg.nonnegative => Interval::NONNEGATIVE,
            ScoreKind::NegSquaredError => Interval::REAL,
            _ => Interval::UNIT,
        }
    }

    fn is_degenerate(&self, x: &[f64]) -> bool {
        match self.kind {
            ScoreKind::ElevatedMean | ScoreKind::Coherence | ScoreKind::CoherenceDensity => {
                self.mass(x).1
            }
            _ => false,
        }
    }

    fn value(&self, net: &AttributedNetwork, x: &[f64], y: &[f64]) -> f64 {
        let reg = half_sq(x) + half_sq(y);
        let xnz = nonzeros(x);
        let ynz = nonzeros(y);
        let bilinear = || -> f64 { xnz.iter().map(|&i| x[i] * row_dot(net, i, y, &ynz)).sum() };
        match self.kind {
            ScoreKind::Fisher => bilinear() - reg,
            ScoreKind::ElevatedMean => {
                let (s, _) = self.mass(x);
                bilinear() / s.sqrt() - reg
            }
            ScoreKind::Coherence | ScoreKind::CoherenceDensity => {
                let (s, _) = self.mass(x);
                let (a, b) = column_moments(net, x, &xnz, &ynz);
                let mut v = 0.0;
                for (k, &j) in ynz.iter().enumerate() {
                    let within = a[k] - b[k] * b[k] / s;
                    v += y[j] * (a[k] - within / self.cfg.sigma);
                }
                if self.kind == ScoreKind::CoherenceDensity && self.cfg.lambda != 0.0 {
                    let q: f64 = xnz
                        .iter()
                        .map(|&i| x[i] * net.neighbors(i).iter().map(|&u| x[u]).sum::<f64>())
                        .sum();
                    v += self.cfg.lambda * q / s;
                }
                v - reg
            }
            ScoreKind::NegSquaredError => {
                let c = self
                    .cfg
                    .response_c
                    .as_deref()
                    .expect("validated at construction");
                let wx = wt_x(net, x, &xnz);
                let sq: f64 = (0..c.len()).map(|j| (c[j] - wx[j] - y[j]).powi(2)).sum();
                -sq - reg
            }
            ScoreKind::Logistic => {
                let z = wt_x(net, x, &xnz);
                let mut v = 0.0;
                for j in 0..z.len() {
                    let (g, h) = sigmoid_pair(z[j]);
                    let (lg, _) = clamp_log(g);
                    let (lh, _) = clamp_log(h);
                    v += y[j] * lg + (1.0 - y[j]) * lh;
                }
                v - reg
            }
        }
    }

    fn gradient_on(
        &self,
        net: &AttributedNetwork,
        x: &[f64],
        y: &[f64],
        rows: Coords<'_>,
        cols: Coords<'_>,
    ) -> (Vec<f64>, Vec<f64>) {
        let (n, p) = (net.node_count(), net.attribute_count());
        let rows = all_or(rows, n);
        let cols = all_or(cols, p);
        let mut gx = vec![0.0; n];
        let mut gy = vec![0.0; p];
        let xnz = nonzeros(x);
        let ynz = nonzeros(y);
        match self.kind {
            ScoreKind::Fisher | ScoreKind::ElevatedMean => {
                let (scale, slope) = if self.kind == ScoreKind::ElevatedMean {
                    let (s, guarded) = self.mass(x);
                    let slope = if guarded || rows.is_empty() {
                        0.0
                    } else {
                        let t: f64 = xnz.iter().map(|&i| x[i] * row_dot(net, i, y, &ynz)).sum();
                        0.5 * t * s.powf(-1.5)
                    };
                    (1.0 / s.sqrt(), slope)
                } else {
                    (1.0, 0.0)
                };
                for &i in &rows {
                    gx[i] = row_dot(net, i, y, &ynz) * scale - slope - x[i];
                }
                if !cols.is_empty() {
                    let wx = wt_x(net, x, &xnz);
                    for &j in &cols {
                        gy[j] = wx[j] * scale - y[j];
                    }
                }
            }
            ScoreKind::Coherence | ScoreKind::CoherenceDensity => {
                let (s, guarded) = self.mass(x);
                let inv_sigma = 1.0 / self.cfg.sigma;
                if !rows.is_empty() {
                    let (_, b) = column_moments(net, x, &xnz, &ynz);
                    let means: Vec<f64> = b.iter().map(|bj| bj / s).collect();
                    for &i in &rows {
                        let row = net.row(i);
                        let mut acc = 0.0;
                        for (k, &j) in ynz.iter().enumerate() {
                            let w = row[j];
                            let m = means[k];
                            // d/dx_i of (A_j - B_j^2 / S); the m^2 part comes from S.
                            let within = if guarded {
                                w * w - 2.0 * w * m
                            } else {
                                (w - m) * (w - m)
                            };
                            acc += y[j] * (w * w - inv_sigma * within);
                        }
                        gx[i] = acc - x[i];
                    }
                    if self.kind == ScoreKind::CoherenceDensity && self.cfg.lambda != 0.0 {
                        let ax = |i: usize| net.neighbors(i).iter().map(|&u| x[u]).sum::<f64>();
                        let q: f64 = xnz.iter().map(|&i| x[i] * ax(i)).sum();
                        let tail = if guarded { 0.0 } else { q / (s * s) };
                        for &i in &rows {
                            gx[i] += self.cfg.lambda * (2.0 * ax(i) / s - tail);
                        }
                    }
                }
                if !cols.is_empty() {
                    let (a, b) = column_moments(net, x, &xnz, &cols);
                    for (k, &j) in cols.iter().enumerate() {
                        let within = a[k] - b[k] * b[k] / s;
                        gy[j] = a[k] - inv_sigma * within - y[j];
                    }
                }
            }
            ScoreKind::NegSquaredError => {
                let c = self
                    .cfg
                    .response_c
                    .as_deref()
                    .expect("validated at construction");
                let wx = wt_x(net, x, &xnz);
                let r: Vec<f64> = (0..p).map(|j| c[j] - wx[j] - y[j]).collect();
                for &i in &rows {
                    gx[i] = 2.0 * crate::util::dot(net.row(i), &r) - x[i];
                }
                for &j in &cols {
                    gy[j] = 2.0 * r[j] - y[j];
                }
            }
            ScoreKind::Logistic => {
                let z = wt_x(net, x, &xnz);
                let mut coef = vec![0.0; p];
                for j in 0..p {
                    let (g, h) = sigmoid_pair(z[j]);
                    let (lg, g_clamped) = clamp_log(g);
                    let (lh, h_clamped) = clamp_log(h);
                    let dlg = if g_clamped { 0.0 } else { h };
                    let dlh = if h_clamped { 0.0 } else { -g };
                    coef[j] = y[j] * dlg + (1.0 - y[j]) * dlh;
                    gy[j] = lg - lh - y[j];
                }
                if cols.len() != p {
                    let keep = crate::graph::IndexSet::new(cols.iter().copied());
                    for (j, v) in gy.iter_mut().enumerate() {
                        if !keep.contains(j) {
                            *v = 0.0;
                        }
                    }
                }
                for &i in &rows {
                    gx[i] = crate::util::dot(net.row(i), &coef) - x[i];
                }
            }
        }
        (gx, gy)
    }
}
