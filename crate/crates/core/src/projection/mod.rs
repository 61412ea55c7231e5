//! Head and tail projections onto connected node subsets, plus the plain
//! top-s selector used for attributes.
//!
//! Two backends are available. [`Backend::Exact`] enumerates every connected
//! subset and is only usable on tiny graphs; [`Backend::PcstApprox`] runs a
//! prize-collecting Steiner tree search and scales to large networks.

mod exact;
mod pcst;

use std::fmt;
use std::str::FromStr;

pub use exact::{exact_project_oracle, DEFAULT_EXACT_CAP};
pub use pcst::{pcst_project, PcstOptions};

use crate::error::{Error, Result};
use crate::graph::{AttributeSubset, AttributedNetwork, IndexSet, NodeSubset};

/// Structural constraint family. Only connectivity is implemented; trees,
/// paths and pattern-matched subgraphs would slot in here.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstraintKind {
    ConnectedSubgraph,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Backend {
    Exact,
    PcstApprox,
}

impl Backend {
    /// `(c_T, c_H)` quality factors guaranteed by the backend.
    pub fn approx_factors(self) -> (f64, f64) {
        match self {
            Backend::Exact => (1.0, 1.0),
            Backend::PcstApprox => (7f64.sqrt(), (1.0f64 / 14.0).sqrt()),
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Exact => "exact",
            Backend::PcstApprox => "pcst",
        })
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Backend::Exact),
            "pcst" | "pcst-approx" => Ok(Backend::PcstApprox),
            other => Err(Error::Config(format!(
                "unknown backend {other:?} (expected exact or pcst)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProjectionMode {
    Head,
    Tail,
}

/// The support model: connected node subsets of size at most `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct TopologyConstraint {
    pub kind: ConstraintKind,
    pub k: usize,
    pub backend: Backend,
    pub exact_cap: usize,
    pub pcst: PcstOptions,
}

impl TopologyConstraint {
    pub fn connected(k: usize, backend: Backend) -> Self {
        TopologyConstraint {
            kind: ConstraintKind::ConnectedSubgraph,
            k,
            backend,
            exact_cap: DEFAULT_EXACT_CAP,
            pcst: PcstOptions::default(),
        }
    }

    pub fn approx_factors(&self) -> (f64, f64) {
        self.backend.approx_factors()
    }

    /// Same constraint with a different budget.
    pub fn with_budget(&self, k: usize) -> Self {
        TopologyConstraint { k, ..self.clone() }
    }

    /// Size bound the backend actually guarantees for a result.
    pub fn relaxed_budget(&self) -> usize {
        match self.backend {
            Backend::Exact => self.k,
            Backend::PcstApprox => self.pcst.budget(self.k),
        }
    }

    pub fn validate(&self, net: &AttributedNetwork) -> Result<()> {
        let n = net.node_count();
        if self.k == 0 || self.k > n {
            return Err(Error::Config(format!(
                "budget k = {} must lie in [1, {n}]",
                self.k
            )));
        }
        if self.backend == Backend::Exact && n > self.exact_cap.min(63) {
            return Err(Error::SizeLimit {
                n,
                cap: self.exact_cap.min(63),
            });
        }
        if !(self.pcst.relaxation >= 1.0) {
            return Err(Error::Config("pcst relaxation must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionResult {
    pub support: NodeSubset,
    /// `||x_S||_2`.
    pub captured_mass: f64,
    pub backend_used: Backend,
    pub relaxed_budget: usize,
    /// Set when the input carried no mass and the support is empty.
    pub degenerate: bool,
}

impl ProjectionResult {
    pub(crate) fn degenerate(backend: Backend, relaxed_budget: usize) -> Self {
        ProjectionResult {
            support: IndexSet::empty(),
            captured_mass: 0.0,
            backend_used: backend,
            relaxed_budget,
            degenerate: true,
        }
    }

    pub(crate) fn from_support(
        x: &[f64],
        support: NodeSubset,
        backend: Backend,
        relaxed_budget: usize,
    ) -> Self {
        let captured_mass = support.iter().map(|i| x[i] * x[i]).sum::<f64>().sqrt();
        ProjectionResult {
            support,
            captured_mass,
            backend_used: backend,
            relaxed_budget,
            degenerate: false,
        }
    }

    /// `||x - x_S||_2`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        x.iter()
            .enumerate()
            .filter(|(i, _)| !self.support.contains(*i))
            .map(|(_, v)| v * v)
            .sum::<f64>()
            .sqrt()
    }
}

fn check_input(x: &[f64], net: &AttributedNetwork) -> Result<()> {
    if x.len() != net.node_count() {
        return Err(Error::InvalidArgument(format!(
            "vector has length {}, network has {} nodes",
            x.len(),
            net.node_count()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "projection input is not finite".into(),
        ));
    }
    Ok(())
}

fn project(
    x: &[f64],
    c: &TopologyConstraint,
    net: &AttributedNetwork,
    mode: ProjectionMode,
) -> Result<ProjectionResult> {
    check_input(x, net)?;
    c.validate(net)?;
    match c.backend {
        Backend::Exact => exact_project_oracle(x, c.k, net, mode, c.exact_cap),
        Backend::PcstApprox => pcst_project(x, c.k, net, &c.pcst),
    }
}

/// Connected support capturing (approximately) the most `l2` mass of `x`.
pub fn head_project(
    x: &[f64],
    c: &TopologyConstraint,
    net: &AttributedNetwork,
) -> Result<ProjectionResult> {
    project(x, c, net, ProjectionMode::Head)
}

/// Connected support leaving (approximately) the least `l2` residual.
pub fn tail_project(
    x: &[f64],
    c: &TopologyConstraint,
    net: &AttributedNetwork,
) -> Result<ProjectionResult> {
    project(x, c, net, ProjectionMode::Tail)
}

/// Connected set of at most `limit` nodes grown best-first by `weights`
/// from the heaviest node: each step attaches the frontier node of largest
/// weight. Stays inside the component of the starting node.
pub fn grow_connected(net: &AttributedNetwork, weights: &[f64], limit: usize) -> NodeSubset {
    IndexSet::new(pcst::prize_first_tree(net, weights, None, limit.max(1)).0)
}

/// Indices of the `s` largest entries of `|v|`, ties to the lower index.
///
/// The flag is set when `v` is identically zero, in which case the choice
/// carries no information.
pub fn top_s_select(v: &[f64], s: usize) -> Result<(AttributeSubset, bool)> {
    if s == 0 {
        return Err(Error::InvalidArgument(
            "top-s selection needs s >= 1".into(),
        ));
    }
    if v.iter().any(|a| a.is_nan()) {
        return Err(Error::InvalidArgument(
            "top-s selection over NaN entries".into(),
        ));
    }
    let s = s.min(v.len());
    let mut order: Vec<usize> = (0..v.len()).collect();
    let key = |i: &usize| std::cmp::Reverse(crate::util::OrdF64(v[*i].abs()));
    if s < v.len() {
        order.select_nth_unstable_by(s, |a, b| key(a).cmp(&key(b)).then(a.cmp(b)));
    }
    order.truncate(s);
    let degenerate = v.iter().all(|&a| a == 0.0);
    Ok((IndexSet::new(order), degenerate))
}
