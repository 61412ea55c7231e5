//! Synthetic benchmarks: planted coherent dense clusters, and connected
//! anomalous clusters with elevated attribute means.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::doc::{Document, Section};
use crate::error::{Error, Result};
use crate::graph::{AttributeSubset, AttributedNetwork, IndexSet, NodeSubset};

const CONNECT_RETRIES: usize = 100;

/// Planted clusters of a generated network.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundTruth {
    pub nodes: NodeSubset,
    pub attributes: AttributeSubset,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoherentSynthConfig {
    pub n_clusters_coherent: usize,
    pub n_clusters_incoherent: usize,
    pub n_attrs_total: usize,
    /// Coherent attributes per coherent cluster.
    pub n_attrs_coherent: usize,
    pub cluster_size: usize,
    /// Per-cluster sizes, coherent clusters first. Overrides `cluster_size`.
    pub cluster_sizes: Option<Vec<usize>>,
    pub p_in: f64,
    pub p_out: f64,
    pub coherent_std: f64,
    /// Coherent means are drawn from `[-mean_range, mean_range]`.
    pub mean_range: f64,
    pub rng_seed: u64,
}

impl Default for CoherentSynthConfig {
    fn default() -> Self {
        CoherentSynthConfig {
            n_clusters_coherent: 1,
            n_clusters_incoherent: 9,
            n_attrs_total: 100,
            n_attrs_coherent: 10,
            cluster_size: 30,
            cluster_sizes: None,
            p_in: 0.35,
            p_out: 0.1,
            coherent_std: 0.001f64.sqrt(),
            mean_range: 2.0,
            rng_seed: 0,
        }
    }
}

impl CoherentSynthConfig {
    pub fn sizes(&self) -> Vec<usize> {
        self.cluster_sizes.clone().unwrap_or_else(|| {
            vec![self.cluster_size; self.n_clusters_coherent + self.n_clusters_incoherent]
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(0.0 <= self.p_out && self.p_out < self.p_in && self.p_in <= 1.0) {
            return bad(format!(
                "need 0 <= p_out < p_in <= 1, got p_in = {}, p_out = {}",
                self.p_in, self.p_out
            ));
        }
        if self.n_attrs_total == 0 || self.n_attrs_coherent > self.n_attrs_total {
            return bad(format!(
                "need 1 <= n_attrs_total and n_attrs_coherent <= n_attrs_total, got {} and {}",
                self.n_attrs_total, self.n_attrs_coherent
            ));
        }
        if self.n_clusters_coherent == 0 {
            return bad("at least one coherent cluster is required".into());
        }
        let sizes = self.sizes();
        if sizes.len() != self.n_clusters_coherent + self.n_clusters_incoherent {
            return bad(format!(
                "{} cluster sizes given for {} clusters",
                sizes.len(),
                self.n_clusters_coherent + self.n_clusters_incoherent
            ));
        }
        if sizes.contains(&0) {
            return bad("cluster sizes must be positive".into());
        }
        if !(self.coherent_std >= 0.0 && self.coherent_std.is_finite() && self.mean_range >= 0.0) {
            return bad("coherent_std and mean_range must be finite and non-negative".into());
        }
        Ok(())
    }

    pub fn metadata(&self) -> Section {
        let mut s = Section::new("metadata");
        s.set("task", "coherent")
            .set("n_clusters_coherent", self.n_clusters_coherent)
            .set("n_clusters_incoherent", self.n_clusters_incoherent)
            .set("n_attrs_total", self.n_attrs_total)
            .set("n_attrs_coherent", self.n_attrs_coherent)
            .set_list("cluster_sizes", self.sizes())
            .set("p_in", self.p_in)
            .set("p_out", self.p_out)
            .set("coherent_std", self.coherent_std)
            .set("mean_rule", format!("uniform[-{0}, {0}]", self.mean_range))
            .set("rng_seed", self.rng_seed);
        s
    }
}

/// Undirected edges among `nodes` with probability `prob` per pair.
fn bernoulli_edges(
    rng: &mut ChaCha8Rng,
    nodes: &[usize],
    prob: f64,
    out: &mut Vec<(usize, usize)>,
) {
    for (a, &u) in nodes.iter().enumerate() {
        for &v in &nodes[a + 1..] {
            if rng.random_bool(prob) {
                out.push((u, v));
            }
        }
    }
}

fn edges_connect(count: usize, edges: &[(usize, usize)], local: impl Fn(usize) -> usize) -> bool {
    let mut parent: Vec<usize> = (0..count).collect();
    fn find(p: &mut [usize], mut a: usize) -> usize {
        while p[a] != a {
            p[a] = p[p[a]];
            a = p[a];
        }
        a
    }
    let mut components = count;
    for &(u, v) in edges {
        let (a, b) = (find(&mut parent, local(u)), find(&mut parent, local(v)));
        if a != b {
            parent[a] = b;
            components -= 1;
        }
    }
    components <= 1
}

/// Network with `n_clusters_coherent` planted coherent clusters, one truth
/// per coherent cluster. Node indices are shuffled so cluster membership is
/// not visible from index order.
pub fn generate_coherent_multi(
    cfg: &CoherentSynthConfig,
) -> Result<(AttributedNetwork, Vec<GroundTruth>)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let sizes = cfg.sizes();
    let n: usize = sizes.iter().sum();
    let p = cfg.n_attrs_total;
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let mut clusters = Vec::with_capacity(sizes.len());
    let mut label = vec![0usize; n];
    let mut offset = 0;
    for (c, &size) in sizes.iter().enumerate() {
        let mut members = perm[offset..offset + size].to_vec();
        members.sort_unstable();
        for &v in &members {
            label[v] = c;
        }
        clusters.push(members);
        offset += size;
    }

    let mut edges = Vec::new();
    for (c, members) in clusters.iter().enumerate() {
        let mut local = Vec::new();
        let mut tries = 0;
        loop {
            local.clear();
            bernoulli_edges(&mut rng, members, cfg.p_in, &mut local);
            let pos = |v: usize| members.binary_search(&v).unwrap();
            if c >= cfg.n_clusters_coherent || edges_connect(members.len(), &local, pos) {
                break;
            }
            tries += 1;
            if tries == CONNECT_RETRIES {
                return Err(Error::Generator(format!(
                    "coherent cluster {c} stayed disconnected after {CONNECT_RETRIES} draws; raise p_in or the cluster size"
                )));
            }
        }
        edges.append(&mut local);
    }
    for u in 0..n {
        for v in u + 1..n {
            if label[u] != label[v] && rng.random_bool(cfg.p_out) {
                edges.push((u, v));
            }
        }
    }

    let mut attrs: Vec<f64> = (0..n * p)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let mut truths = Vec::with_capacity(cfg.n_clusters_coherent);
    for members in &clusters[..cfg.n_clusters_coherent] {
        let mut cols = sample(&mut rng, p, cfg.n_attrs_coherent).into_vec();
        cols.sort_unstable();
        for &j in &cols {
            let mu = rng.random_range(-cfg.mean_range..=cfg.mean_range);
            let dist =
                Normal::new(mu, cfg.coherent_std).map_err(|e| Error::Generator(e.to_string()))?;
            for &v in members {
                attrs[v * p + j] = dist.sample(&mut rng);
            }
        }
        truths.push(GroundTruth {
            nodes: IndexSet::new(members.iter().copied()),
            attributes: IndexSet::new(cols),
        });
    }
    let net = AttributedNetwork::from_flat(n, p, edges, attrs)?;
    Ok((net, truths))
}

/// Single planted coherent cluster among incoherent dense clusters.
pub fn generate_coherent(cfg: &CoherentSynthConfig) -> Result<(AttributedNetwork, GroundTruth)> {
    let (net, mut truths) = generate_coherent_multi(cfg)?;
    Ok((net, truths.swap_remove(0)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BaseGraph {
    /// Each pair joined with the given probability.
    ErdosRenyi(f64),
    /// Row-major grid with `floor(sqrt(n))` columns.
    Grid,
    /// Random points in the unit square joined to their `k` nearest.
    Knn(usize),
}

impl fmt::Display for BaseGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseGraph::ErdosRenyi(q) => write!(f, "er:{q}"),
            BaseGraph::Grid => f.write_str("grid"),
            BaseGraph::Knn(k) => write!(f, "knn:{k}"),
        }
    }
}

impl FromStr for BaseGraph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::Config(format!(
                "unknown base graph {s:?} (expected grid, knn:K or er:Q)"
            ))
        };
        match s.split_once(':') {
            None if s == "grid" => Ok(BaseGraph::Grid),
            Some(("knn", k)) => Ok(BaseGraph::Knn(k.parse().map_err(|_| bad())?)),
            Some(("er", q)) => Ok(BaseGraph::ErdosRenyi(q.parse().map_err(|_| bad())?)),
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnomalySynthConfig {
    pub n: usize,
    pub p: usize,
    pub cluster_size: usize,
    pub n_attrs_anomalous: usize,
    pub signal_mu: f64,
    pub base_graph: BaseGraph,
    pub rng_seed: u64,
}

impl Default for AnomalySynthConfig {
    fn default() -> Self {
        AnomalySynthConfig {
            n: 400,
            p: 50,
            cluster_size: 30,
            n_attrs_anomalous: 5,
            signal_mu: 3.0,
            base_graph: BaseGraph::Grid,
            rng_seed: 0,
        }
    }
}

impl AnomalySynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.cluster_size == 0 || self.cluster_size > self.n {
            return Err(Error::Config(format!(
                "need 1 <= cluster_size <= n, got {} and {}",
                self.cluster_size, self.n
            )));
        }
        if self.p == 0 || self.n_attrs_anomalous > self.p {
            return Err(Error::Config(format!(
                "need 1 <= p and n_attrs_anomalous <= p, got {} and {}",
                self.p, self.n_attrs_anomalous
            )));
        }
        if !self.signal_mu.is_finite() {
            return Err(Error::Config("signal_mu must be finite".into()));
        }
        match self.base_graph {
            BaseGraph::ErdosRenyi(q) if !(0.0..=1.0).contains(&q) => Err(Error::Config(format!(
                "edge probability {q} outside [0, 1]"
            ))),
            BaseGraph::Knn(0) => Err(Error::Config("knn needs k >= 1".into())),
            _ => Ok(()),
        }
    }

    pub fn metadata(&self) -> Section {
        let mut s = Section::new("metadata");
        s.set("task", "anomalous")
            .set("n", self.n)
            .set("p", self.p)
            .set("cluster_size", self.cluster_size)
            .set("n_attrs_anomalous", self.n_attrs_anomalous)
            .set("signal_mu", self.signal_mu)
            .set("base_graph", self.base_graph)
            .set("rng_seed", self.rng_seed);
        s
    }
}

fn base_edges(n: usize, base: BaseGraph, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    match base {
        BaseGraph::ErdosRenyi(q) => {
            let all: Vec<usize> = (0..n).collect();
            bernoulli_edges(rng, &all, q, &mut edges);
        }
        BaseGraph::Grid => {
            let cols = ((n as f64).sqrt().floor() as usize).max(1);
            for v in 0..n {
                if (v + 1) % cols != 0 && v + 1 < n {
                    edges.push((v, v + 1));
                }
                if v + cols < n {
                    edges.push((v, v + cols));
                }
            }
        }
        BaseGraph::Knn(k) => {
            let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.random(), rng.random())).collect();
            for (u, &(ax, ay)) in pts.iter().enumerate() {
                let mut others: Vec<(f64, usize)> = pts
                    .iter()
                    .enumerate()
                    .filter(|&(v, _)| v != u)
                    .map(|(v, &(bx, by))| ((ax - bx).powi(2) + (ay - by).powi(2), v))
                    .collect();
                let k = k.min(others.len());
                if k == 0 {
                    continue;
                }
                others
                    .select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                edges.extend(others[..k].iter().map(|&(_, v)| (u.min(v), u.max(v))));
            }
        }
    }
    edges
}

/// Background `N(0, 1)` attributes on a connected base graph, with a
/// random-walk cluster whose anomalous attributes are `N(signal_mu, 1)`.
pub fn generate_anomalous(cfg: &AnomalySynthConfig) -> Result<(AttributedNetwork, GroundTruth)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let (n, p) = (cfg.n, cfg.p);
    let mut edges = None;
    for _ in 0..CONNECT_RETRIES {
        let e = base_edges(n, cfg.base_graph, &mut rng);
        if edges_connect(n, &e, |v| v) {
            edges = Some(e);
            break;
        }
    }
    let edges = edges.ok_or_else(|| {
        Error::Generator(format!(
            "base graph {} stayed disconnected after {CONNECT_RETRIES} draws",
            cfg.base_graph
        ))
    })?;
    let attrs: Vec<f64> = (0..n * p)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let net = AttributedNetwork::from_flat(n, p, edges, attrs)?;

    let start = rng.random_range(0..n);
    let nodes = net
        .random_walk_subset(start, cfg.cluster_size, 100 * n, &mut rng)
        .ok_or_else(|| {
            Error::Generator(format!(
                "random walk from node {start} did not reach {} nodes in {} steps",
                cfg.cluster_size,
                100 * n
            ))
        })?;
    let mut cols = sample(&mut rng, p, cfg.n_attrs_anomalous).into_vec();
    cols.sort_unstable();
    let mut attrs = net.attributes().to_vec();
    for v in nodes.iter() {
        for &j in &cols {
            let noise: f64 = StandardNormal.sample(&mut rng);
            attrs[v * p + j] = cfg.signal_mu + noise;
        }
    }
    let net = net.with_attributes(attrs)?;
    Ok((
        net,
        GroundTruth {
            nodes,
            attributes: IndexSet::new(cols),
        },
    ))
}

fn truth_section_name(i: usize) -> String {
    if i == 0 {
        "truth".to_string()
    } else {
        format!("truth.{i}")
    }
}

/// Truth document: one `[truth]` section per planted cluster followed by
/// the generator metadata.
pub fn truth_document(truths: &[GroundTruth], metadata: Section) -> Document {
    let mut doc = Document::new();
    for (i, t) in truths.iter().enumerate() {
        doc.section_mut(&truth_section_name(i))
            .set_list("nodes", t.nodes.iter())
            .set_list("attributes", t.attributes.iter());
    }
    doc.push(metadata);
    doc
}

pub fn write_truth(path: &Path, truths: &[GroundTruth], metadata: Section) -> Result<()> {
    truth_document(truths, metadata).write(path)
}

/// Reads every truth section of a truth file, in order.
pub fn read_truth(path: &Path) -> Result<Vec<GroundTruth>> {
    let doc = Document::read(path)?;
    let mut out = Vec::new();
    while let Some(s) = doc.section(&truth_section_name(out.len())) {
        out.push(GroundTruth {
            nodes: IndexSet::new(s.parse_list::<usize>("nodes")?),
            attributes: IndexSet::new(s.parse_list::<usize>("attributes")?),
        });
    }
    if out.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: "no [truth] section".into(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coherent_defaults_shape() {
        let (net, t) = generate_coherent(&CoherentSynthConfig::default()).unwrap();
        assert_eq!((net.node_count(), net.attribute_count()), (300, 100));
        assert_eq!((t.nodes.len(), t.attributes.len()), (30, 10));
        assert!(net.induced_subgraph_connected(&t.nodes).unwrap());
    }

    #[test]
    fn extreme_probabilities_give_cliques() {
        let cfg = CoherentSynthConfig {
            n_clusters_incoherent: 1,
            cluster_size: 5,
            n_attrs_total: 3,
            n_attrs_coherent: 1,
            p_in: 1.0,
            p_out: 0.0,
            ..Default::default()
        };
        let (net, t) = generate_coherent(&cfg).unwrap();
        assert_eq!(net.edge_count(), 20);
        assert_eq!(net.induced_edge_count(&t.nodes), 10);
        assert_eq!(net.component_labels().1, 2);
    }

    #[test]
    fn grid_base_and_walk() {
        let cfg = AnomalySynthConfig {
            n: 100,
            cluster_size: 10,
            ..Default::default()
        };
        let (net, t) = generate_anomalous(&cfg).unwrap();
        assert_eq!(net.edge_count(), 180);
        assert_eq!(t.nodes.len(), 10);
        assert!(net.induced_subgraph_connected(&t.nodes).unwrap());
    }

    #[test]
    fn base_graph_names() {
        for b in [
            BaseGraph::Grid,
            BaseGraph::Knn(6),
            BaseGraph::ErdosRenyi(0.25),
        ] {
            assert_eq!(b.to_string().parse::<BaseGraph>().unwrap(), b);
        }
        assert!("ring".parse::<BaseGraph>().is_err());
    }

    #[test]
    fn invalid_configs() {
        let c = CoherentSynthConfig {
            p_out: 0.5,
            ..Default::default()
        };
        assert!(generate_coherent(&c).is_err());
        let a = AnomalySynthConfig {
            cluster_size: 500,
            ..Default::default()
        };
        assert!(generate_anomalous(&a).is_err());
    }
}
