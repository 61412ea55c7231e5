//! Attributed network data model.
//!
//! An [`AttributedNetwork`] couples an undirected, unweighted graph on `n`
//! nodes with a dense `n x p` attribute matrix `W` whose row `v` holds the
//! attribute vector of node `v`. The network is immutable once built and can
//! be shared freely between threads.

use std::collections::VecDeque;
use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

/// Sorted, duplicate-free list of indices (nodes or attributes).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct IndexSet(Vec<usize>);

/// Subset of node indices in `[0, n)`.
pub type NodeSubset = IndexSet;
/// Subset of attribute indices in `[0, p)`.
pub type AttributeSubset = IndexSet;

impl IndexSet {
    pub fn new(indices: impl IntoIterator<Item = usize>) -> Self {
        let mut v: Vec<usize> = indices.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        IndexSet(v)
    }

    pub fn empty() -> Self {
        IndexSet(Vec::new())
    }

    /// Builds a set and checks every index is below `bound`.
    pub fn checked(indices: impl IntoIterator<Item = usize>, bound: usize) -> Result<Self> {
        let set = Self::new(indices);
        if let Some(&last) = set.0.last() {
            if last >= bound {
                return Err(Error::InvalidArgument(format!(
                    "index {last} out of range [0, {bound})"
                )));
            }
        }
        Ok(set)
    }

    /// Indices of the nonzero entries of `v`.
    pub fn support_of(v: &[f64]) -> Self {
        IndexSet(
            v.iter()
                .enumerate()
                .filter(|(_, &x)| x != 0.0)
                .map(|(i, _)| i)
                .collect(),
        )
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut a, mut b) = (self.0.iter().peekable(), other.0.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&x), Some(&&y)) => {
                    if x < y {
                        out.push(x);
                        a.next();
                    } else if y < x {
                        out.push(y);
                        b.next();
                    } else {
                        out.push(x);
                        a.next();
                        b.next();
                    }
                }
                (Some(&&x), None) => {
                    out.push(x);
                    a.next();
                }
                (None, Some(&&y)) => {
                    out.push(y);
                    b.next();
                }
                (None, None) => break,
            }
        }
        IndexSet(out)
    }

    pub fn intersection_len(&self, other: &IndexSet) -> usize {
        let (mut i, mut j, mut count) = (0, 0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    count += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        count
    }
}

impl FromIterator<usize> for IndexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        IndexSet::new(iter)
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

/// Undirected graph plus dense attribute matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct AttributedNetwork {
    n: usize,
    p: usize,
    /// Canonical edge list, `u < v`, sorted.
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
    /// Row-major `n x p`.
    attributes: Vec<f64>,
}

impl AttributedNetwork {
    /// Builds a validated network from an edge list and attribute rows.
    ///
    /// Duplicate edges (in either orientation) are merged; self-loops and
    /// out-of-range endpoints are rejected.
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if rows.len() != n {
            return Err(Error::Validation(format!(
                "attribute matrix has {} rows but the network has {n} nodes",
                rows.len()
            )));
        }
        let p = rows.first().map_or(0, Vec::len);
        if let Some((v, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != p) {
            return Err(Error::Validation(format!(
                "attribute row {v} has {} columns, expected {p}",
                r.len()
            )));
        }
        Self::from_flat(n, p, edges, rows.into_iter().flatten().collect())
    }

    /// Builds a network from a row-major attribute buffer of length `n * p`.
    pub fn from_flat(
        n: usize,
        p: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        attributes: Vec<f64>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Validation(
                "network must have at least one node".into(),
            ));
        }
        if p == 0 {
            return Err(Error::Validation(
                "attribute matrix must have at least one column".into(),
            ));
        }
        if attributes.len() != n * p {
            return Err(Error::Validation(format!(
                "attribute buffer has {} entries, expected {n} x {p}",
                attributes.len()
            )));
        }
        if let Some(k) = attributes.iter().position(|a| !a.is_finite()) {
            return Err(Error::Validation(format!(
                "non-finite attribute value at node {}, attribute {}",
                k / p,
                k % p
            )));
        }
        let mut canon = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Validation(format!(
                    "edge ({u}, {v}) has an endpoint outside [0, {n})"
                )));
            }
            if u == v {
                return Err(Error::Validation(format!("self-loop on node {u}")));
            }
            canon.push((u.min(v), u.max(v)));
        }
        canon.sort_unstable();
        canon.dedup();
        let mut neighbors = vec![Vec::new(); n];
        for &(u, v) in &canon {
            neighbors[u].push(v);
            neighbors[v].push(u);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Ok(AttributedNetwork {
            n,
            p,
            edges: canon,
            neighbors,
            attributes,
        })
    }

    /// Same topology, replaced attribute matrix.
    pub fn with_attributes(&self, attributes: Vec<f64>) -> Result<Self> {
        if attributes.len() != self.n * self.p {
            return Err(Error::Validation(format!(
                "attribute buffer has {} entries, expected {} x {}",
                attributes.len(),
                self.n,
                self.p
            )));
        }
        if attributes.iter().any(|a| !a.is_finite()) {
            return Err(Error::Validation("non-finite attribute value".into()));
        }
        Ok(AttributedNetwork {
            attributes,
            ..self.clone()
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn attribute_count(&self) -> usize {
        self.p
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.neighbors.iter().map(Vec::len).collect()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors[u].binary_search(&v).is_ok()
    }

    /// Attribute vector `w_v`.
    pub fn row(&self, v: usize) -> &[f64] {
        &self.attributes[v * self.p..(v + 1) * self.p]
    }

    pub fn attribute(&self, v: usize, j: usize) -> f64 {
        self.attributes[v * self.p + j]
    }

    /// Row-major attribute buffer.
    pub fn attributes(&self) -> &[f64] {
        &self.attributes
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|v| self.attribute(v, j)).collect()
    }

    /// `A x` for the (implicit) adjacency matrix.
    pub fn adjacency_product(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (v, &xv) in x.iter().enumerate() {
            if xv != 0.0 {
                for &u in &self.neighbors[v] {
                    out[u] += xv;
                }
            }
        }
        out
    }

    /// Number of edges with both endpoints in `s`.
    pub fn induced_edge_count(&self, s: &NodeSubset) -> usize {
        s.iter()
            .map(|v| {
                self.neighbors[v]
                    .iter()
                    .filter(|&&u| u > v && s.contains(u))
                    .count()
            })
            .sum()
    }

    /// Whether the subgraph induced by `s` is connected.
    pub fn induced_subgraph_connected(&self, s: &NodeSubset) -> Result<bool> {
        let first = match s.as_slice().first() {
            Some(&v) => v,
            None => {
                return Err(Error::InvalidArgument(
                    "connectivity of an empty node set".into(),
                ))
            }
        };
        if let Some(&last) = s.as_slice().last() {
            if last >= self.n {
                return Err(Error::InvalidArgument(format!("node {last} out of range")));
            }
        }
        let mut seen = vec![false; s.len()];
        let pos = |v: usize| s.as_slice().binary_search(&v).ok();
        let mut queue = VecDeque::from([first]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(v) = queue.pop_front() {
            for &u in &self.neighbors[v] {
                if let Some(k) = pos(u) {
                    if !seen[k] {
                        seen[k] = true;
                        reached += 1;
                        queue.push_back(u);
                    }
                }
            }
        }
        Ok(reached == s.len())
    }

    /// Connected-component label of every node, labels in `[0, count)`.
    pub fn component_labels(&self) -> (Vec<usize>, usize) {
        let mut label = vec![usize::MAX; self.n];
        let mut count = 0;
        for start in 0..self.n {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = count;
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for &u in &self.neighbors[v] {
                    if label[u] == usize::MAX {
                        label[u] = count;
                        stack.push(u);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }

    pub fn is_connected(&self) -> bool {
        self.component_labels().1 == 1
    }

    /// Distinct nodes visited by a simple random walk from `start`, stopping
    /// once `size` nodes are collected. `None` if that takes more than
    /// `max_steps` moves (or the walk is stuck on an isolated node).
    pub fn random_walk_subset<R: Rng + ?Sized>(
        &self,
        start: usize,
        size: usize,
        max_steps: usize,
        rng: &mut R,
    ) -> Option<NodeSubset> {
        let mut seen = vec![false; self.n];
        let mut picked = vec![start];
        seen[start] = true;
        let mut v = start;
        let mut steps = 0;
        while picked.len() < size {
            if steps == max_steps || self.neighbors[v].is_empty() {
                return None;
            }
            v = self.neighbors[v][rng.random_range(0..self.neighbors[v].len())];
            steps += 1;
            if !seen[v] {
                seen[v] = true;
                picked.push(v);
            }
        }
        Some(IndexSet::new(picked))
    }
}
