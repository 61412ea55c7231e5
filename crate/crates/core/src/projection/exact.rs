//! Exhaustive projection over all connected node subsets of size `<= k`.

use super::{Backend, ProjectionMode, ProjectionResult};
use crate::error::{Error, Result};
use crate::graph::{AttributedNetwork, IndexSet};

/// Default node cap for exhaustive enumeration.
pub const DEFAULT_EXACT_CAP: usize = 15;

/// Visits every connected set that extends `set` by nodes of `ext` and
/// of later exclusive neighborhoods, each exactly once (the smallest node
/// of the set is fixed by the caller through `above`). `closed` is `set`
/// plus its neighbors.
fn extend(
    set: u64,
    closed: u64,
    mut ext: u64,
    above: u64,
    k: usize,
    adj: &[u64],
    visit: &mut impl FnMut(u64),
) {
    visit(set);
    if set.count_ones() as usize == k {
        return;
    }
    while ext != 0 {
        let w = ext.trailing_zeros() as usize;
        ext &= ext - 1;
        let fresh = adj[w] & !closed & above;
        extend(
            set | (1 << w),
            closed | adj[w],
            ext | fresh,
            above,
            k,
            adj,
            visit,
        );
    }
}

fn mask_nodes(mask: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    let mut m = mask;
    while m != 0 {
        out.push(m.trailing_zeros() as usize);
        m &= m - 1;
    }
    out
}

/// True optimum of the head (`max ||x_S||`) or tail (`min ||x - x_S||`)
/// problem over connected subsets of size at most `k`.
///
/// Ties: head prefers the larger support, tail the smaller one; remaining
/// ties go to the lexicographically smallest node list.
pub fn exact_project_oracle(
    x: &[f64],
    k: usize,
    net: &AttributedNetwork,
    mode: ProjectionMode,
    cap: usize,
) -> Result<ProjectionResult> {
    let n = net.node_count();
    if x.len() != n {
        return Err(Error::InvalidArgument(format!(
            "vector has length {}, network has {n} nodes",
            x.len()
        )));
    }
    if n > cap || n > 63 {
        return Err(Error::SizeLimit {
            n,
            cap: cap.min(63),
        });
    }
    if k == 0 {
        return Err(Error::InvalidArgument("budget k must be at least 1".into()));
    }
    if x.iter().all(|&v| v == 0.0) {
        return Ok(ProjectionResult::degenerate(Backend::Exact, k));
    }
    let adj: Vec<u64> = (0..n)
        .map(|v| net.neighbors(v).iter().fold(0u64, |m, &u| m | (1 << u)))
        .collect();
    let sq: Vec<f64> = x.iter().map(|v| v * v).collect();
    let total: f64 = sq.iter().sum();
    let tol = 1e-12 * total.max(f64::MIN_POSITIVE);

    let mut best: Option<(f64, u64)> = None;
    let mut consider = |mask: u64| {
        let mut mass = 0.0;
        let mut m = mask;
        while m != 0 {
            mass += sq[m.trailing_zeros() as usize];
            m &= m - 1;
        }
        let better = match best {
            None => true,
            Some((bm, bmask)) => {
                if mass > bm + tol {
                    true
                } else if mass < bm - tol {
                    false
                } else {
                    let (a, b) = (mask.count_ones(), bmask.count_ones());
                    let size_pref = match mode {
                        ProjectionMode::Head => a.cmp(&b),
                        ProjectionMode::Tail => b.cmp(&a),
                    };
                    match size_pref {
                        std::cmp::Ordering::Greater => true,
                        std::cmp::Ordering::Less => false,
                        std::cmp::Ordering::Equal => mask_nodes(mask) < mask_nodes(bmask),
                    }
                }
            }
        };
        if better {
            best = Some((mass, mask));
        }
    };
    for v in 0..n {
        let above = !((1u64 << v) | ((1u64 << v) - 1));
        let set = 1u64 << v;
        extend(
            set,
            set | adj[v],
            adj[v] & above,
            above,
            k,
            &adj,
            &mut consider,
        );
    }
    let (_, mask) = best.expect("some singleton is always feasible");
    let support = IndexSet::new(mask_nodes(mask));
    Ok(ProjectionResult::from_support(
        x,
        support,
        Backend::Exact,
        k,
    ))
}
