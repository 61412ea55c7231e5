//! The pursuit loop: alternate a head projection of the node gradient and a
//! top-2s pick of the attribute gradient, maximize the score on the merged
//! supports, then prune back with a tail projection and a top-s pick.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::doc::Document;
use crate::error::{Error, Result};
use crate::graph::{AttributeSubset, AttributedNetwork, IndexSet, NodeSubset};
use crate::projection::{
    grow_connected, head_project, tail_project, top_s_select, Backend, TopologyConstraint,
};
use crate::rsc::{convergence_condition, RscConstants};
use crate::score::{Interval, ScoreFunction};
use crate::util::{dist, norm, OrdF64};

/// Iterate `(x, y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientPair {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl CoefficientPair {
    pub fn zeros(n: usize, p: usize) -> Self {
        CoefficientPair {
            x: vec![0.0; n],
            y: vec![0.0; p],
        }
    }

    pub fn supp_x(&self) -> NodeSubset {
        IndexSet::support_of(&self.x)
    }

    pub fn supp_y(&self) -> AttributeSubset {
        IndexSet::support_of(&self.y)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubproblemConfig {
    pub step_init: f64,
    pub backtrack: f64,
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for SubproblemConfig {
    fn default() -> Self {
        SubproblemConfig {
            step_init: 1.0,
            backtrack: 0.5,
            tol: 1e-6,
            max_iters: 1000,
        }
    }
}

/// Choice of the starting iterate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitMode {
    /// `x = 1/k` on a connected set grown from the node of largest
    /// attribute-row norm, `y = 1/s` on the `s` columns of largest variance.
    TopRowNorm,
    /// `x = 0`, `y = 0`. Scores normalized by `1^T x` are degenerate here.
    Zeros,
    /// Random connected node set (random walk) and random attributes.
    RandomFeasible,
    /// Rank small connected seeds grown from every edge by their score,
    /// run from the `starts` best and keep the highest final score.
    MultiStart { starts: usize },
}

impl std::fmt::Display for InitMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InitMode::TopRowNorm => f.write_str("top-row-norm"),
            InitMode::Zeros => f.write_str("zeros"),
            InitMode::RandomFeasible => f.write_str("random"),
            InitMode::MultiStart { starts } => write!(f, "multi-start:{starts}"),
        }
    }
}

impl std::str::FromStr for InitMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "top-row-norm" => Ok(InitMode::TopRowNorm),
            "zeros" => Ok(InitMode::Zeros),
            "random" => Ok(InitMode::RandomFeasible),
            _ => {
                let starts = s
                    .strip_prefix("multi-start:")
                    .and_then(|v| v.parse::<usize>().ok())
                    .filter(|&v| v >= 1);
                match starts {
                    Some(starts) => Ok(InitMode::MultiStart { starts }),
                    None => Err(Error::Config(format!(
                        "unknown init mode {s:?} (expected top-row-norm, zeros, random or multi-start:N)"
                    ))),
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PursuitConfig {
    pub k: usize,
    pub s: usize,
    pub epsilon: f64,
    pub max_iters: usize,
    pub subproblem: SubproblemConfig,
    pub init_mode: InitMode,
    pub rng_seed: u64,
    /// Keep every intermediate state in the result (memory heavy).
    pub record_states: bool,
}

impl PursuitConfig {
    pub fn new(k: usize, s: usize) -> Self {
        PursuitConfig {
            k,
            s,
            epsilon: 1e-4,
            max_iters: 50,
            subproblem: SubproblemConfig::default(),
            init_mode: InitMode::TopRowNorm,
            rng_seed: 0,
            record_states: false,
        }
    }

    pub fn validate(&self, net: &AttributedNetwork) -> Result<()> {
        let (n, p) = (net.node_count(), net.attribute_count());
        if self.k == 0 || self.k > n {
            return Err(Error::Config(format!(
                "k = {} must lie in [1, {n}]",
                self.k
            )));
        }
        if self.s == 0 || self.s > p {
            return Err(Error::Config(format!(
                "s = {} must lie in [1, {p}]",
                self.s
            )));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Config("epsilon must be positive".into()));
        }
        let sub = &self.subproblem;
        if !(sub.step_init > 0.0)
            || !(sub.backtrack > 0.0 && sub.backtrack < 1.0)
            || !(sub.tol > 0.0)
        {
            return Err(Error::Config(
                "subproblem needs step_init > 0, 0 < backtrack < 1 and tol > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Everything produced by one pass of the loop body.
#[derive(Clone, Debug, PartialEq)]
pub struct PursuitState {
    pub iterate: CoefficientPair,
    pub gamma_x: NodeSubset,
    pub gamma_y: AttributeSubset,
    pub omega_x: NodeSubset,
    pub omega_y: AttributeSubset,
    pub b_pair: CoefficientPair,
    pub psi_x: NodeSubset,
    pub psi_y: AttributeSubset,
    pub iter_index: usize,
    pub objective_trace: Vec<f64>,
    pub step_norm_trace: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Diagnostics {
    /// Objective at the iterate after each iteration.
    pub objective_trace: Vec<f64>,
    /// `sqrt(||dx||^2 + ||dy||^2)` per iteration.
    pub step_norm_trace: Vec<f64>,
    pub step_x_trace: Vec<f64>,
    pub step_y_trace: Vec<f64>,
    /// Iterations where the tail projection was empty and the fallback
    /// support was used.
    pub fallback_iterations: Vec<usize>,
    /// Stopped early because the gradient vanished at an empty support.
    pub degenerate_exit: bool,
    pub backend: Option<Backend>,
    pub c_t: f64,
    pub c_h: f64,
    /// Index of the winning start in multi-start mode.
    pub start_index: usize,
    pub states: Vec<PursuitState>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceCluster {
    pub nodes: NodeSubset,
    pub attributes: AttributeSubset,
    pub score: f64,
    pub iterations_used: usize,
    pub converged: bool,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub diagnostics: Diagnostics,
}

impl SubspaceCluster {
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

fn project_box(v: &mut [f64], idx: &IndexSet, dom: Interval) {
    for i in idx.iter() {
        v[i] = dom.clamp(v[i]);
    }
}

fn check_finite(
    score: &dyn ScoreFunction,
    value: f64,
    context: impl FnOnce() -> String,
) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite {
            score: score.name().to_string(),
            context: context(),
        })
    }
}

/// Projected gradient ascent on the coordinates in `omega_x` / `omega_y`;
/// everything else is pinned to zero.
///
/// Backtracking halves the step until the quadratic ascent condition
/// `f(z+) >= f(z) + g.(z+ - z) - ||z+ - z||^2 / (2 eta)` holds, so the
/// objective never decreases. The step grows back by one factor after each
/// accepted move.
pub fn solve_restricted_subproblem(
    net: &AttributedNetwork,
    score: &dyn ScoreFunction,
    omega_x: &NodeSubset,
    omega_y: &AttributeSubset,
    warm: &CoefficientPair,
    cfg: &SubproblemConfig,
) -> Result<CoefficientPair> {
    let (n, p) = (net.node_count(), net.attribute_count());
    if omega_x.is_empty() && omega_y.is_empty() {
        return Err(Error::InvalidArgument(
            "restricted solve over empty supports".into(),
        ));
    }
    if warm.x.len() != n || warm.y.len() != p {
        return Err(Error::InvalidArgument(
            "warm start has the wrong shape".into(),
        ));
    }
    let (dx, dy) = (score.domain_x(), score.domain_y());
    let mut z = CoefficientPair::zeros(n, p);
    for i in omega_x.iter() {
        z.x[i] = dx.clamp(warm.x[i]);
    }
    for j in omega_y.iter() {
        z.y[j] = dy.clamp(warm.y[j]);
    }
    let mut f = score.value(net, &z.x, &z.y);
    check_finite(score, f, || {
        format!("the restricted warm start over {omega_x} x {omega_y}")
    })?;
    let rows = omega_x.as_slice();
    let cols = omega_y.as_slice();
    let mut eta = cfg.step_init;
    let mut cand = z.clone();
    for _ in 0..cfg.max_iters {
        let (gx, gy) = score.gradient_on(net, &z.x, &z.y, Some(rows), Some(cols));
        let accepted = loop {
            let mut lin = 0.0;
            let mut dd = 0.0;
            for &i in rows {
                cand.x[i] = dx.clamp(z.x[i] + eta * gx[i]);
                let d = cand.x[i] - z.x[i];
                lin += gx[i] * d;
                dd += d * d;
            }
            for &j in cols {
                cand.y[j] = dy.clamp(z.y[j] + eta * gy[j]);
                let d = cand.y[j] - z.y[j];
                lin += gy[j] * d;
                dd += d * d;
            }
            if dd == 0.0 {
                break None;
            }
            let fc = score.value(net, &cand.x, &cand.y);
            if fc.is_finite() && fc >= f + lin - dd / (2.0 * eta) && fc >= f {
                break Some((fc, dd));
            }
            eta *= cfg.backtrack;
            if eta < 1e-30 {
                check_finite(score, fc, || {
                    format!("a restricted step from {omega_x} x {omega_y}")
                })?;
                break None;
            }
        };
        let Some((fc, dd)) = accepted else { break };
        std::mem::swap(&mut z, &mut cand);
        f = fc;
        if dd.sqrt() / eta <= cfg.tol {
            break;
        }
        eta = (eta / cfg.backtrack).min(cfg.step_init);
    }
    Ok(z)
}

/// Gradient with components that would leave the box at an active bound
/// removed; only directions the iterate can actually move in remain.
fn feasible_direction(g: &mut [f64], v: &[f64], dom: Interval) {
    for (gi, &vi) in g.iter_mut().zip(v) {
        if (vi <= dom.lo && *gi < 0.0) || (vi >= dom.hi && *gi > 0.0) {
            *gi = 0.0;
        }
    }
}

fn nonzero_top(v: &[f64], s: usize) -> Result<AttributeSubset> {
    let (set, _) = top_s_select(v, s)?;
    Ok(set.iter().filter(|&j| v[j] != 0.0).collect())
}

/// Nonzero top-`s` of `|b_y|` over `omega`. Equal magnitudes, common
/// when several coordinates sit on a box bound, are ordered by how hard the
/// gradient at `b` pushes them outward, then by index.
fn top_with_pressure(
    net: &AttributedNetwork,
    score: &dyn ScoreFunction,
    b: &CoefficientPair,
    omega: &AttributeSubset,
    s: usize,
) -> AttributeSubset {
    let cols = omega.as_slice();
    let (_, g) = score.gradient_on(net, &b.x, &b.y, Some(&[]), Some(cols));
    let mut order: Vec<usize> = cols.iter().copied().filter(|&j| b.y[j] != 0.0).collect();
    let key = |j: usize| (OrdF64(b.y[j].abs()), OrdF64(b.y[j].signum() * g[j]));
    order.sort_by(|&a, &c| key(c).cmp(&key(a)).then(a.cmp(&c)));
    order.truncate(s);
    IndexSet::new(order)
}

fn restrict(v: &[f64], keep: &IndexSet) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for i in keep.iter() {
        out[i] = v[i];
    }
    out
}

fn column_variances(net: &AttributedNetwork) -> Vec<f64> {
    let n = net.node_count() as f64;
    let p = net.attribute_count();
    let mut mean = vec![0.0; p];
    let mut sq = vec![0.0; p];
    for v in 0..net.node_count() {
        for (j, &w) in net.row(v).iter().enumerate() {
            mean[j] += w;
            sq[j] += w * w;
        }
    }
    (0..p).map(|j| sq[j] / n - (mean[j] / n).powi(2)).collect()
}

fn initial_pair(
    net: &AttributedNetwork,
    score: &dyn ScoreFunction,
    cfg: &PursuitConfig,
) -> CoefficientPair {
    let (n, p) = (net.node_count(), net.attribute_count());
    let (dx, dy) = (score.domain_x(), score.domain_y());
    let mut pair = CoefficientPair::zeros(n, p);
    match cfg.init_mode {
        InitMode::Zeros => {}
        InitMode::TopRowNorm | InitMode::MultiStart { .. } => {
            let norms: Vec<f64> = (0..n).map(|v| norm(net.row(v))).collect();
            for v in grow_connected(net, &norms, cfg.k).iter() {
                pair.x[v] = dx.clamp(1.0 / cfg.k as f64);
            }
            let (cols, _) = top_s_select(&column_variances(net), cfg.s).expect("s validated");
            for j in cols.iter() {
                pair.y[j] = dy.clamp(1.0 / cfg.s as f64);
            }
        }
        InitMode::RandomFeasible => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
            let start = rng.random_range(0..n);
            let walk = net
                .random_walk_subset(start, cfg.k, 100 * n, &mut rng)
                .unwrap_or_else(|| IndexSet::new([start]));
            for v in walk.iter() {
                pair.x[v] = dx.clamp(rng.random_range(0.05..1.0));
            }
            let mut cols: Vec<usize> = (0..p).collect();
            for i in 0..cfg.s {
                let j = rng.random_range(i..p);
                cols.swap(i, j);
            }
            for &j in &cols[..cfg.s] {
                pair.y[j] = dy.clamp(rng.random_range(0.05..1.0));
            }
        }
    }
    pair
}

/// Runs the loop from a given starting iterate.
pub fn sg_pursuit_from(
    net: &AttributedNetwork,
    score: &dyn ScoreFunction,
    constraint: &TopologyConstraint,
    cfg: &PursuitConfig,
    start: CoefficientPair,
) -> Result<SubspaceCluster> {
    cfg.validate(net)?;
    constraint.validate(net)?;
    if constraint.k != cfg.k {
        return Err(Error::Config(format!(
            "constraint budget {} differs from pursuit k = {}",
            constraint.k, cfg.k
        )));
    }
    let (dx, dy) = (score.domain_x(), score.domain_y());
    let (c_t, c_h) = constraint.approx_factors();
    let mut diag = Diagnostics {
        backend: Some(constraint.backend),
        c_t,
        c_h,
        ..Diagnostics::default()
    };
    let mut cur = start;
    let (sx, sy) = (cur.supp_x(), cur.supp_y());
    project_box(&mut cur.x, &sx, dx);
    project_box(&mut cur.y, &sy, dy);
    let mut psi_x = cur.supp_x();
    let mut psi_y = cur.supp_y();
    let mut converged = false;
    let mut iterations = 0;

    for it in 0..cfg.max_iters {
        let (mut gx, mut gy) = score.gradient_on(net, &cur.x, &cur.y, None, None);
        feasible_direction(&mut gx, &cur.x, dx);
        feasible_direction(&mut gy, &cur.y, dy);
        if gx.iter().chain(&gy).any(|g| !g.is_finite()) {
            return Err(Error::NonFinite {
                score: score.name().to_string(),
                context: format!("the gradient at iteration {it}"),
            });
        }
        let head = head_project(&gx, constraint, net)?;
        let gamma_x = head.support;
        let gamma_y = nonzero_top(&gy, 2 * cfg.s)?;
        let omega_x = gamma_x.union(&cur.supp_x());
        let omega_y = gamma_y.union(&cur.supp_y());
        if omega_x.is_empty() {
            log::debug!("gradient vanishes at an empty support; stopping at iteration {it}");
            diag.degenerate_exit = true;
            break;
        }
        let b = solve_restricted_subproblem(net, score, &omega_x, &omega_y, &cur, &cfg.subproblem)?;

        let tail = tail_project(&b.x, constraint, net)?;
        let next_psi_x = if tail.degenerate {
            diag.fallback_iterations.push(it);
            let weights: Vec<f64> = gx.iter().map(|g| g * g).collect();
            grow_connected(net, &weights, cfg.k)
        } else {
            tail.support
        };
        let next_psi_y = top_with_pressure(net, score, &b, &omega_y, cfg.s);
        let next = CoefficientPair {
            x: restrict(&b.x, &next_psi_x),
            y: restrict(&b.y, &next_psi_y),
        };
        let step_x = dist(&next.x, &cur.x);
        let step_y = dist(&next.y, &cur.y);
        let objective = score.value(net, &next.x, &next.y);
        check_finite(score, objective, || {
            format!("the iterate after iteration {it}")
        })?;
        diag.objective_trace.push(objective);
        diag.step_x_trace.push(step_x);
        diag.step_y_trace.push(step_y);
        diag.step_norm_trace.push(step_x.hypot(step_y));
        log::trace!("iteration {it}: objective {objective}, step ({step_x}, {step_y})");

        if cfg.record_states {
            diag.states.push(PursuitState {
                iterate: next.clone(),
                gamma_x,
                gamma_y,
                omega_x,
                omega_y,
                b_pair: b,
                psi_x: next_psi_x.clone(),
                psi_y: next_psi_y.clone(),
                iter_index: it,
                objective_trace: diag.objective_trace.clone(),
                step_norm_trace: diag.step_norm_trace.clone(),
            });
        }
        cur = next;
        psi_x = next_psi_x;
        psi_y = next_psi_y;
        iterations = it + 1;
        if step_x <= cfg.epsilon && step_y <= cfg.epsilon {
            converged = true;
            break;
        }
    }

    let value = score.value(net, &cur.x, &cur.y);
    Ok(SubspaceCluster {
        nodes: psi_x,
        attributes: psi_y,
        score: value,
        iterations_used: iterations,
        converged,
        x: cur.x,
        y: cur.y,
        diagnostics: diag,
    })
}

/// Nodes a multi-start seed may gain before seeds are ranked.
const SEED_GROWTH: usize = 3;

/// Indicator of `nodes` paired with the `s` attributes of largest positive
/// gradient there, and its score.
fn seed_pair(
    net: &AttributedNetwork,
    score: &dyn ScoreFunction,
    nodes: &[usize],
    s: usize,
) -> (f64, CoefficientPair) {
    let (n, p) = (net.node_count(), net.attribute_count());
    let (dx, dy) = (score.domain_x(), score.domain_y());
    let mut pair = CoefficientPair::zeros(n, p);
    for &v in nodes {
        pair.x[v] = dx.clamp(1.0);
    }
    let mut gy = score.grad_y(net, &pair.x, &pair.y);
    feasible_direction(&mut gy, &pair.y, dy);
    let positive: Vec<f64> = gy.iter().map(|g| g.max(0.0)).collect();
    if let Ok(cols) = nonzero_top(&positive, s) {
        for j in cols.iter() {
            pair.y[j] = dy.clamp(gy[j]);
        }
    }
    let value = score.value(net, &pair.x, &pair.y);
    (
        if value.is_finite() {
            value
        } else {
            f64::NEG_INFINITY
        },
        pair,
    )
}

/// Seeds for multi-start. Every edge (every node on edgeless graphs or
/// when `k < 2`) is grown greedily by up to `SEED_GROWTH` neighbours, each
/// step adding the neighbour that raises the seed score most, and the grown
/// seeds are ranked by score. Growing first matters for coherence-type
/// scores: a pair of unrelated nodes can agree on a few attributes by
/// chance, but rarely admits a third node that agrees as well.
fn ranked_seeds(
    net: &AttributedNetwork,
    score: &dyn ScoreFunction,
    cfg: &PursuitConfig,
    starts: usize,
) -> Vec<CoefficientPair> {
    let groups: Vec<Vec<usize>> = if net.edge_count() > 0 && cfg.k >= 2 {
        net.edges().iter().map(|&(u, v)| vec![u, v]).collect()
    } else {
        (0..net.node_count()).map(|v| vec![v]).collect()
    };
    let mut scored: Vec<(f64, usize, CoefficientPair)> = groups
        .into_par_iter()
        .enumerate()
        .map(|(idx, mut nodes)| {
            let mut best = seed_pair(net, score, &nodes, cfg.s);
            while nodes.len() < cfg.k.min(2 + SEED_GROWTH) {
                let mut frontier: Vec<usize> = nodes
                    .iter()
                    .flat_map(|&v| net.neighbors(v).iter().copied())
                    .filter(|u| !nodes.contains(u))
                    .collect();
                frontier.sort_unstable();
                frontier.dedup();
                let mut step: Option<(f64, usize, CoefficientPair)> = None;
                for u in frontier {
                    nodes.push(u);
                    let (value, pair) = seed_pair(net, score, &nodes, cfg.s);
                    nodes.pop();
                    if value > step.as_ref().map_or(best.0, |b| b.0) {
                        step = Some((value, u, pair));
                    }
                }
                let Some((value, u, pair)) = step else { break };
                nodes.push(u);
                best = (value, pair);
            }
            (best.0, idx, best.1)
        })
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    // several edges often grow into the same seed; run each seed once
    let mut kept: Vec<CoefficientPair> = Vec::with_capacity(starts);
    for (_, _, pair) in scored {
        if kept.len() == starts {
            break;
        }
        if !kept.iter().any(|k| k.supp_x() == pair.supp_x()) {
            kept.push(pair);
        }
    }
    kept
}

/// Detects one subspace cluster.
pub fn sg_pursuit(
    net: &AttributedNetwork,
    score: &dyn ScoreFunction,
    constraint: &TopologyConstraint,
    cfg: &PursuitConfig,
) -> Result<SubspaceCluster> {
    cfg.validate(net)?;
    match cfg.init_mode {
        InitMode::MultiStart { starts } => {
            let seeds = ranked_seeds(net, score, cfg, starts.max(1));
            let runs: Vec<Result<SubspaceCluster>> = seeds
                .into_par_iter()
                .map(|seed| sg_pursuit_from(net, score, constraint, cfg, seed))
                .collect();
            let mut best: Option<SubspaceCluster> = None;
            for (idx, run) in runs.into_iter().enumerate() {
                let mut run = run?;
                run.diagnostics.start_index = idx;
                // non-empty beats empty, then higher score; ties keep the earlier start
                let better = match &best {
                    None => true,
                    Some(b) => (!run.is_empty(), run.score) > (!b.is_empty(), b.score),
                };
                if better {
                    best = Some(run);
                }
            }
            best.ok_or_else(|| Error::Config("multi-start produced no seeds".into()))
        }
        _ => sg_pursuit_from(net, score, constraint, cfg, initial_pair(net, score, cfg)),
    }
}

/// How a found cluster is removed before the next extraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeflationPolicy {
    /// Overwrite `W[S, R]` with the global mean of each column in `R`.
    MeanFill,
    /// Drop the cluster's nodes from the network.
    RemoveNodes,
}

impl std::fmt::Display for DeflationPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DeflationPolicy::MeanFill => "mean-fill",
            DeflationPolicy::RemoveNodes => "remove-nodes",
        })
    }
}

impl std::str::FromStr for DeflationPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean-fill" => Ok(DeflationPolicy::MeanFill),
            "remove-nodes" => Ok(DeflationPolicy::RemoveNodes),
            other => Err(Error::Config(format!(
                "unknown deflation policy {other:?} (expected mean-fill or remove-nodes)"
            ))),
        }
    }
}

/// Network restricted to `keep`, plus the map from new to original ids.
fn subnetwork(net: &AttributedNetwork, keep: &[usize]) -> Result<(AttributedNetwork, Vec<usize>)> {
    let mut pos = vec![usize::MAX; net.node_count()];
    for (new, &old) in keep.iter().enumerate() {
        pos[old] = new;
    }
    let edges = net
        .edges()
        .iter()
        .filter(|&&(u, v)| pos[u] != usize::MAX && pos[v] != usize::MAX)
        .map(|&(u, v)| (pos[u], pos[v]));
    let attrs = keep
        .iter()
        .flat_map(|&v| net.row(v).iter().copied())
        .collect();
    let sub = AttributedNetwork::from_flat(keep.len(), net.attribute_count(), edges, attrs)?;
    Ok((sub, keep.to_vec()))
}

fn remap(cluster: &mut SubspaceCluster, map: &[usize], n: usize) {
    cluster.nodes = cluster.nodes.iter().map(|v| map[v]).collect();
    let mut x = vec![0.0; n];
    for (new, &old) in map.iter().enumerate() {
        x[old] = cluster.x[new];
    }
    cluster.x = x;
}

/// Extracts up to `count` clusters, deflating the attribute matrix (or the
/// node set) after each one. Stops early at the first empty cluster.
pub fn extract_top_k_clusters(
    net: &AttributedNetwork,
    score: &dyn ScoreFunction,
    constraint: &TopologyConstraint,
    cfg: &PursuitConfig,
    count: usize,
    deflate: DeflationPolicy,
) -> Result<Vec<SubspaceCluster>> {
    if count == 0 {
        return Err(Error::Config(
            "number of clusters must be at least 1".into(),
        ));
    }
    let n = net.node_count();
    let mut work = net.clone();
    let mut map: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    let means: Vec<f64> = (0..net.attribute_count())
        .map(|j| net.column(j).iter().sum::<f64>() / n as f64)
        .collect();
    for round in 0..count {
        let k = cfg.k.min(work.node_count());
        let c = constraint.with_budget(k);
        let run_cfg = PursuitConfig { k, ..cfg.clone() };
        let mut cluster = sg_pursuit(&work, score, &c, &run_cfg)?;
        if cluster.is_empty() {
            log::info!("extraction round {round} found an empty cluster; stopping");
            break;
        }
        let local_nodes = cluster.nodes.clone();
        let attrs = cluster.attributes.clone();
        remap(&mut cluster, &map, n);
        out.push(cluster);
        if round + 1 == count {
            break;
        }
        match deflate {
            DeflationPolicy::MeanFill => {
                let p = work.attribute_count();
                let mut w = work.attributes().to_vec();
                for v in local_nodes.iter() {
                    for j in attrs.iter() {
                        w[v * p + j] = means[j];
                    }
                }
                work = work.with_attributes(w)?;
            }
            DeflationPolicy::RemoveNodes => {
                let keep: Vec<usize> = (0..work.node_count())
                    .filter(|&v| !local_nodes.contains(v))
                    .collect();
                if keep.is_empty() {
                    break;
                }
                let (sub, local_map) = subnetwork(&work, &keep)?;
                map = local_map.iter().map(|&v| map[v]).collect();
                work = sub;
            }
        }
    }
    Ok(out)
}

/// Successive step ratios `||d_{i+1}|| / ||d_i||` (skipping zero
/// denominators).
pub fn step_ratios(trace: &[f64]) -> Vec<f64> {
    trace
        .windows(2)
        .filter(|w| w[0] > 0.0)
        .map(|w| w[1] / w[0])
        .collect()
}

/// Report on a finished run: step norms, contraction ratios and, given
/// RSC constants, the theoretical contraction factor.
pub fn convergence_diagnostics(cluster: &SubspaceCluster, rsc: Option<&RscConstants>) -> Document {
    let d = &cluster.diagnostics;
    let mut doc = Document::new();
    let ratios = step_ratios(&d.step_norm_trace);
    let sec = doc.section_mut("convergence");
    sec.set("iterations", cluster.iterations_used)
        .set("converged", cluster.converged)
        .set_list("step_norms", &d.step_norm_trace)
        .set_list("step_ratios", &ratios)
        .set_list("objective", &d.objective_trace);
    if let Some(last) = ratios.last() {
        sec.set("tail_ratio", last);
    }
    sec.set("c_t", d.c_t).set("c_h", d.c_h).set(
        "factor_condition_holds",
        convergence_condition(d.c_t, d.c_h),
    );
    if let Some(r) = rsc {
        for (name, t) in [
            ("theory.statement", &r.statement),
            ("theory.appendix", &r.appendix),
        ] {
            doc.section_mut(name)
                .set("rho", t.rho)
                .set("alpha0", t.alpha0)
                .set("beta0", t.beta0)
                .set("alpha", t.alpha)
                .set("beta", t.beta)
                .set("alpha_below_one", t.alpha < 1.0);
        }
    }
    doc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::score::{Score, ScoreKind};

    fn single() -> AttributedNetwork {
        AttributedNetwork::new(1, [], vec![vec![5.0]]).unwrap()
    }

    #[test]
    fn single_node_cluster() {
        let net = single();
        let f = Score::with_defaults(ScoreKind::Fisher, &net).unwrap();
        let c = TopologyConstraint::connected(1, Backend::Exact);
        let r = sg_pursuit(&net, &f, &c, &PursuitConfig::new(1, 1)).unwrap();
        assert_eq!(
            (r.nodes.as_slice(), r.attributes.as_slice()),
            (&[0][..], &[0][..])
        );
        assert!(r.converged);
        assert!((r.score - 4.0).abs() < 1e-9);
    }

    #[test]
    fn zero_iterations_returns_start() {
        let net = single();
        let f = Score::with_defaults(ScoreKind::Fisher, &net).unwrap();
        let c = TopologyConstraint::connected(1, Backend::Exact);
        let cfg = PursuitConfig {
            max_iters: 0,
            ..PursuitConfig::new(1, 1)
        };
        let r = sg_pursuit(&net, &f, &c, &cfg).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations_used, 0);
        assert_eq!(r.nodes.as_slice(), &[0]);
    }

    #[test]
    fn restricted_solve_clips_to_box() {
        let net = single();
        let f = Score::with_defaults(ScoreKind::Fisher, &net).unwrap();
        let one = IndexSet::new([0]);
        let z = solve_restricted_subproblem(
            &net,
            &f,
            &one,
            &one,
            &CoefficientPair {
                x: vec![0.5],
                y: vec![0.5],
            },
            &SubproblemConfig::default(),
        )
        .unwrap();
        assert_eq!((z.x[0], z.y[0]), (1.0, 1.0));
    }

    #[test]
    fn restricted_solve_keeps_optimum() {
        let net = single();
        let f = Score::with_defaults(ScoreKind::Fisher, &net).unwrap();
        let one = IndexSet::new([0]);
        let warm = CoefficientPair {
            x: vec![1.0],
            y: vec![1.0],
        };
        let z =
            solve_restricted_subproblem(&net, &f, &one, &one, &warm, &SubproblemConfig::default())
                .unwrap();
        assert_eq!(z, warm);
    }

    #[test]
    fn zeros_init_is_degenerate_for_fisher() {
        let net = AttributedNetwork::new(2, [(0, 1)], vec![vec![1.0], vec![2.0]]).unwrap();
        let f = Score::with_defaults(ScoreKind::Fisher, &net).unwrap();
        let c = TopologyConstraint::connected(1, Backend::Exact);
        let cfg = PursuitConfig {
            init_mode: InitMode::Zeros,
            ..PursuitConfig::new(1, 1)
        };
        let r = sg_pursuit(&net, &f, &c, &cfg).unwrap();
        assert!(r.diagnostics.degenerate_exit && !r.converged && r.is_empty());
    }

    #[test]
    fn ratios_of_geometric_trace() {
        assert_eq!(step_ratios(&[1.0, 0.5, 0.25]), vec![0.5, 0.5]);
        assert!(step_ratios(&[1.0]).is_empty());
    }

    #[test]
    fn init_mode_names() {
        for m in [
            InitMode::TopRowNorm,
            InitMode::Zeros,
            InitMode::RandomFeasible,
            InitMode::MultiStart { starts: 7 },
        ] {
            assert_eq!(m.to_string().parse::<InitMode>().unwrap(), m);
        }
        assert!("multi-start:0".parse::<InitMode>().is_err());
    }
}
