//! The `sgp` command line: generate, detect, evaluate, verify-rsc, bench.
//!
//! Every tunable can come from a flag, from a config document passed with
//! `--config`, or from the built-in default, in that order of precedence.
//! The config document uses the usual key-value format. Keys are flag
//! names without the leading dashes, looked up first in the section named
//! after the command and then in `[defaults]`:
//!
//! ```text
//! [defaults]
//! seed = 7
//! [detect]
//! score = elevated-mean
//! k = 30
//! ```
//!
//! Exit codes: 0 success, 1 usage/config/IO error, 2 detection finished
//! without meeting the convergence tolerance.

use std::ffi::OsString;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::doc::{Document, Section};
use crate::error::{Error, Result};
use crate::graph::{AttributedNetwork, IndexSet};
use crate::io::{load_network, network_summary, save_network};
use crate::metrics::{cluster_metrics, f_measure, mean_std};
use crate::projection::{Backend, TopologyConstraint};
use crate::pursuit::{
    extract_top_k_clusters, sg_pursuit, DeflationPolicy, InitMode, PursuitConfig,
};
use crate::results::{read_result, result_document, ClusterRecord};
use crate::rsc::{
    epsilon_terms, lemma_constants, normalize_spectral, rsc_report, sample_rsc_rss, SamplerConfig,
};
use crate::score::{Score, ScoreConfig, ScoreFunction, ScoreKind};
use crate::synth::{
    generate_anomalous, generate_coherent_multi, read_truth, write_truth, AnomalySynthConfig,
    BaseGraph, CoherentSynthConfig, GroundTruth,
};

pub const EDGE_FILE: &str = "edges.txt";
pub const ATTRIBUTE_FILE: &str = "attributes.txt";
pub const TRUTH_FILE: &str = "truth.txt";
pub const METADATA_FILE: &str = "metadata.txt";
pub const RESULT_FILE: &str = "result.txt";
pub const METRICS_FILE: &str = "metrics.txt";

/// Key excluded from determinism comparisons.
pub const TIMESTAMP_KEY: &str = "timestamp";

#[derive(Parser, Debug)]
#[command(
    name = "sgp",
    version,
    about = "Subspace cluster detection in attributed networks"
)]
struct Cli {
    /// Config document supplying defaults for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic network, its planted truth and metadata.
    Generate(GenerateArgs),
    /// Detect subspace clusters in a network.
    Detect(DetectArgs),
    /// Score a result against planted truth and compute cluster metrics.
    Evaluate(EvaluateArgs),
    /// Check restricted strong concavity/smoothness constants numerically.
    #[command(name = "verify-rsc")]
    VerifyRsc(VerifyArgs),
    /// Generate, detect and evaluate over several seeded trials.
    Bench(BenchArgs),
}

#[derive(Args, Debug, Clone, Default)]
struct SynthArgs {
    /// coherent | anomalous
    #[arg(long)]
    task: Option<String>,
    #[arg(long = "clusters-coherent")]
    clusters_coherent: Option<usize>,
    #[arg(long = "clusters-incoherent")]
    clusters_incoherent: Option<usize>,
    #[arg(long = "attrs-total")]
    attrs_total: Option<usize>,
    #[arg(long = "attrs-coherent")]
    attrs_coherent: Option<usize>,
    #[arg(long = "cluster-size")]
    cluster_size: Option<usize>,
    /// Space or comma separated per-cluster sizes, coherent clusters first.
    #[arg(long = "cluster-sizes")]
    cluster_sizes: Option<String>,
    #[arg(long = "p-in")]
    p_in: Option<f64>,
    #[arg(long = "p-out")]
    p_out: Option<f64>,
    #[arg(long = "coherent-std")]
    coherent_std: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long = "attrs-anomalous")]
    attrs_anomalous: Option<usize>,
    /// Elevated mean of anomalous attributes.
    #[arg(long)]
    mu: Option<f64>,
    /// grid | knn:K | er:Q
    #[arg(long = "base-graph")]
    base_graph: Option<String>,
}

#[derive(Args, Debug, Clone, Default)]
struct ScoreArgs {
    /// fisher | elevated-mean | coherence | coherence-density | nsq-error | logistic
    #[arg(long)]
    score: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    /// File with the `p` response values of the squared-error score.
    #[arg(long)]
    response: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
struct PursuitArgs {
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    s: Option<usize>,
    #[arg(long = "top-k")]
    top_k: Option<usize>,
    /// exact | pcst
    #[arg(long)]
    backend: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long = "max-iters")]
    max_iters: Option<usize>,
    /// top-row-norm | zeros | random | multi-start:N
    #[arg(long)]
    init: Option<String>,
    /// mean-fill | remove-nodes
    #[arg(long)]
    deflation: Option<String>,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[command(flatten)]
    synth: SynthArgs,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DetectArgs {
    /// Edge file.
    #[arg(long)]
    net: Option<PathBuf>,
    /// Attribute file.
    #[arg(long)]
    attrs: Option<PathBuf>,
    #[command(flatten)]
    score: ScoreArgs,
    #[command(flatten)]
    pursuit: PursuitArgs,
    #[arg(long)]
    seed: Option<u64>,
    /// Result file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[arg(long)]
    result: Option<PathBuf>,
    #[arg(long)]
    net: Option<PathBuf>,
    #[arg(long)]
    attrs: Option<PathBuf>,
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Average over every trial directory below this one instead.
    #[arg(long)]
    batch: Option<PathBuf>,
    /// Metrics file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    net: Option<PathBuf>,
    #[arg(long)]
    attrs: Option<PathBuf>,
    #[command(flatten)]
    score: ScoreArgs,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    s: Option<usize>,
    #[arg(long)]
    backend: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Rescale W so that ||W||_2^2 equals this value first.
    #[arg(long)]
    normalize: Option<f64>,
    /// Truth file; error-bound terms are evaluated at its indicator.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Report file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[command(flatten)]
    synth: SynthArgs,
    #[command(flatten)]
    score: ScoreArgs,
    #[command(flatten)]
    pursuit: PursuitArgs,
    #[arg(long)]
    trials: Option<usize>,
    /// Base seed; trial `t` uses `seed + t`.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Flag, then config document, then default; every resolved value is
/// echoed into `effective`.
struct Resolver {
    doc: Option<Document>,
    command: &'static str,
    effective: Section,
}

impl Resolver {
    fn new(doc: Option<Document>, command: &'static str) -> Self {
        let mut effective = Section::new("run");
        effective.set("command", command);
        Resolver {
            doc,
            command,
            effective,
        }
    }

    fn doc_value(&self, key: &str) -> Option<String> {
        let doc = self.doc.as_ref()?;
        [self.command, "defaults"]
            .iter()
            .find_map(|s| doc.section(s).and_then(|sec| sec.get(key)))
            .map(str::to_string)
    }

    fn opt<T: FromStr + Display>(&mut self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        let value = match flag {
            Some(v) => Some(v),
            None => match self.doc_value(key) {
                Some(raw) => Some(raw.parse().map_err(|_| {
                    Error::Config(format!(
                        "bad value {raw:?} for `{key}` in the config document"
                    ))
                })?),
                None => None,
            },
        };
        if let Some(v) = &value {
            self.effective.set(key, v);
        }
        Ok(value)
    }

    fn get<T: FromStr + Display>(&mut self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        match self.opt(flag, key)? {
            Some(v) => Ok(v),
            None => {
                self.effective.set(key, &default);
                Ok(default)
            }
        }
    }

    fn path(&mut self, flag: Option<PathBuf>, key: &str) -> Result<Option<PathBuf>> {
        let p = flag.or_else(|| self.doc_value(key).map(PathBuf::from));
        if let Some(p) = &p {
            self.effective.set(key, p.display());
        }
        Ok(p)
    }

    fn require_path(&mut self, flag: Option<PathBuf>, key: &str) -> Result<PathBuf> {
        self.path(flag, key)?
            .ok_or_else(|| Error::Config(format!("--{key} is required for `{}`", self.command)))
    }

    fn finish(mut self) -> Section {
        let now = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        self.effective.set(TIMESTAMP_KEY, now);
        self.effective
    }
}

enum SynthTask {
    Coherent(CoherentSynthConfig),
    Anomalous(AnomalySynthConfig),
}

impl SynthTask {
    fn name(&self) -> &'static str {
        match self {
            SynthTask::Coherent(_) => "coherent",
            SynthTask::Anomalous(_) => "anomalous",
        }
    }

    fn with_seed(&self, seed: u64) -> SynthTask {
        match self {
            SynthTask::Coherent(c) => SynthTask::Coherent(CoherentSynthConfig {
                rng_seed: seed,
                ..c.clone()
            }),
            SynthTask::Anomalous(c) => SynthTask::Anomalous(AnomalySynthConfig {
                rng_seed: seed,
                ..c.clone()
            }),
        }
    }

    fn generate(&self) -> Result<(AttributedNetwork, Vec<GroundTruth>, Section)> {
        match self {
            SynthTask::Coherent(c) => {
                let (net, truths) = generate_coherent_multi(c)?;
                Ok((net, truths, c.metadata()))
            }
            SynthTask::Anomalous(c) => {
                let (net, truth) = generate_anomalous(c)?;
                Ok((net, vec![truth], c.metadata()))
            }
        }
    }
}

fn parse_size_list(raw: &str) -> Result<Vec<usize>> {
    raw.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse()
                .map_err(|_| Error::Config(format!("bad cluster size {t:?}")))
        })
        .collect()
}

fn resolve_synth(a: &SynthArgs, seed: u64, r: &mut Resolver) -> Result<SynthTask> {
    let task = r.get(a.task.clone(), "task", "coherent".to_string())?;
    match task.as_str() {
        "coherent" => {
            let d = CoherentSynthConfig::default();
            let sizes = match r.opt(a.cluster_sizes.clone(), "cluster-sizes")? {
                Some(raw) => Some(parse_size_list(&raw)?),
                None => None,
            };
            let cfg = CoherentSynthConfig {
                n_clusters_coherent: r.get(
                    a.clusters_coherent,
                    "clusters-coherent",
                    d.n_clusters_coherent,
                )?,
                n_clusters_incoherent: r.get(
                    a.clusters_incoherent,
                    "clusters-incoherent",
                    d.n_clusters_incoherent,
                )?,
                n_attrs_total: r.get(a.attrs_total, "attrs-total", d.n_attrs_total)?,
                n_attrs_coherent: r.get(a.attrs_coherent, "attrs-coherent", d.n_attrs_coherent)?,
                cluster_size: r.get(a.cluster_size, "cluster-size", d.cluster_size)?,
                cluster_sizes: sizes,
                p_in: r.get(a.p_in, "p-in", d.p_in)?,
                p_out: r.get(a.p_out, "p-out", d.p_out)?,
                coherent_std: r.get(a.coherent_std, "coherent-std", d.coherent_std)?,
                mean_range: d.mean_range,
                rng_seed: seed,
            };
            cfg.validate()?;
            Ok(SynthTask::Coherent(cfg))
        }
        "anomalous" => {
            let d = AnomalySynthConfig::default();
            let base: BaseGraph = r
                .get(a.base_graph.clone(), "base-graph", d.base_graph.to_string())?
                .parse()?;
            let cfg = AnomalySynthConfig {
                n: r.get(a.n, "n", d.n)?,
                p: r.get(a.p, "p", d.p)?,
                cluster_size: r.get(a.cluster_size, "cluster-size", d.cluster_size)?,
                n_attrs_anomalous: r.get(
                    a.attrs_anomalous,
                    "attrs-anomalous",
                    d.n_attrs_anomalous,
                )?,
                signal_mu: r.get(a.mu, "mu", d.signal_mu)?,
                base_graph: base,
                rng_seed: seed,
            };
            cfg.validate()?;
            Ok(SynthTask::Anomalous(cfg))
        }
        other => Err(Error::Config(format!(
            "unknown task {other:?} (expected coherent or anomalous)"
        ))),
    }
}

fn read_response(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim_start().starts_with('#'))
        .flat_map(|(i, l)| l.split_whitespace().map(move |t| (i, t)))
        .map(|(i, t)| {
            t.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("bad response value {t:?}"),
            })
        })
        .collect()
}

/// Score plus the `r` used by the elevated-mean lemma.
fn resolve_score(
    a: &ScoreArgs,
    r: &mut Resolver,
    net: &AttributedNetwork,
    default_kind: ScoreKind,
    k: usize,
    require_response: bool,
) -> Result<Score> {
    let kind: ScoreKind = r
        .get(a.score.clone(), "score", default_kind.to_string())?
        .parse()?;
    let d = ScoreConfig::default();
    let response = match r.path(a.response.clone(), "response")? {
        Some(path) => Some(read_response(&path)?),
        None if kind == ScoreKind::NegSquaredError && require_response => {
            return Err(Error::Config("score nsq-error needs --response".into()))
        }
        None if kind == ScoreKind::NegSquaredError => Some(vec![0.0; net.attribute_count()]),
        None => None,
    };
    let cfg = ScoreConfig {
        sigma: r.get(a.sigma, "sigma", d.sigma)?,
        lambda: r.get(a.lambda, "lambda", d.lambda)?,
        response_c: response,
        r_sparsity: k,
        ..d
    };
    Score::new(kind, cfg, net)
}

struct PursuitPlan {
    cfg: PursuitConfig,
    constraint: TopologyConstraint,
    top_k: usize,
    deflation: DeflationPolicy,
}

fn resolve_pursuit(
    a: &PursuitArgs,
    seed: u64,
    r: &mut Resolver,
    default_init: InitMode,
) -> Result<PursuitPlan> {
    let k = r.get(a.k, "k", 10)?;
    let s = r.get(a.s, "s", 5)?;
    let mut cfg = PursuitConfig::new(k, s);
    cfg.epsilon = r.get(a.epsilon, "epsilon", cfg.epsilon)?;
    cfg.max_iters = r.get(a.max_iters, "max-iters", cfg.max_iters)?;
    cfg.init_mode = r
        .get(a.init.clone(), "init", default_init.to_string())?
        .parse()?;
    cfg.rng_seed = seed;
    let backend: Backend = r
        .get(
            a.backend.clone(),
            "backend",
            Backend::PcstApprox.to_string(),
        )?
        .parse()?;
    let top_k = r.get(a.top_k, "top-k", 1)?;
    let deflation = r
        .get(
            a.deflation.clone(),
            "deflation",
            DeflationPolicy::MeanFill.to_string(),
        )?
        .parse()?;
    Ok(PursuitPlan {
        cfg,
        constraint: TopologyConstraint::connected(k, backend),
        top_k,
        deflation,
    })
}

fn load_config(path: Option<&Path>) -> Result<Option<Document>> {
    path.map(Document::read).transpose()
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Outcome of a successful command.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    NotConverged,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::NotConverged => 2,
        }
    }
}

fn write_dataset(
    dir: &Path,
    net: &AttributedNetwork,
    truths: &[GroundTruth],
    meta: Section,
    run: Section,
) -> Result<()> {
    create_dir(dir)?;
    save_network(net, &dir.join(EDGE_FILE), &dir.join(ATTRIBUTE_FILE))?;
    write_truth(&dir.join(TRUTH_FILE), truths, meta.clone())?;
    let mut doc = network_summary(net);
    doc.push(meta);
    doc.push(run);
    doc.write(&dir.join(METADATA_FILE))
}

fn cmd_generate(a: GenerateArgs, config: Option<Document>) -> Result<Outcome> {
    let mut r = Resolver::new(config, "generate");
    let out = r.require_path(a.out, "out")?;
    let seed = r.get(a.seed, "seed", 0)?;
    let task = resolve_synth(&a.synth, seed, &mut r)?;
    let (net, truths, meta) = task.generate()?;
    write_dataset(&out, &net, &truths, meta, r.finish())?;
    log::info!(
        "wrote {} dataset with {} nodes to {}",
        task.name(),
        net.node_count(),
        out.display()
    );
    Ok(Outcome::Success)
}

fn detect_on(
    net: &AttributedNetwork,
    score: &Score,
    plan: &PursuitPlan,
) -> Result<Vec<ClusterRecord>> {
    let clusters = if plan.top_k > 1 {
        extract_top_k_clusters(
            net,
            score,
            &plan.constraint,
            &plan.cfg,
            plan.top_k,
            plan.deflation,
        )?
    } else {
        vec![sg_pursuit(net, score, &plan.constraint, &plan.cfg)?]
    };
    Ok(clusters.iter().map(ClusterRecord::from).collect())
}

fn outcome_of(clusters: &[ClusterRecord]) -> Outcome {
    if clusters.iter().all(|c| c.converged) {
        Outcome::Success
    } else {
        Outcome::NotConverged
    }
}

fn cmd_detect(a: DetectArgs, config: Option<Document>) -> Result<Outcome> {
    let mut r = Resolver::new(config, "detect");
    let edges = r.require_path(a.net, "net")?;
    let attrs = r.require_path(a.attrs, "attrs")?;
    let out = r.require_path(a.out, "out")?;
    let seed = r.get(a.seed, "seed", 0)?;
    let plan = resolve_pursuit(&a.pursuit, seed, &mut r, InitMode::TopRowNorm)?;
    let net = load_network(&edges, &attrs)?;
    let score = resolve_score(&a.score, &mut r, &net, ScoreKind::Fisher, plan.cfg.k, true)?;
    plan.constraint.validate(&net)?;
    let clusters = detect_on(&net, &score, &plan)?;
    r.effective
        .set("n", net.node_count())
        .set("p", net.attribute_count());
    result_document(r.finish(), &clusters).write(&out)?;
    let outcome = outcome_of(&clusters);
    if outcome == Outcome::NotConverged {
        log::warn!("detection stopped at the iteration cap before meeting the tolerance");
    }
    Ok(outcome)
}

/// Metrics of a result against optional truths.
pub fn evaluate_clusters(
    net: &AttributedNetwork,
    clusters: &[ClusterRecord],
    truths: Option<&[GroundTruth]>,
) -> Result<Document> {
    let (n, p) = (net.node_count(), net.attribute_count());
    for c in clusters {
        if c.nodes.iter().any(|v| v >= n) || c.attributes.iter().any(|j| j >= p) {
            return Err(Error::InvalidArgument(format!(
                "result indices exceed the network's {n} nodes / {p} attributes"
            )));
        }
    }
    let mut doc = Document::new();
    let mut dens = Vec::new();
    let mut sizes = Vec::new();
    let mut dists = Vec::new();
    for (i, c) in clusters.iter().enumerate() {
        let sec = doc.section_mut(&format!("cluster.{i}"));
        match cluster_metrics(net, &c.nodes, &c.attributes) {
            Some(m) => {
                sec.set("density", m.density)
                    .set("size", m.size)
                    .set("coherence_distance", m.coherence_distance)
                    .set("singleton", m.singleton);
                dens.push(m.density);
                sizes.push(m.size as f64);
                dists.push(m.coherence_distance);
            }
            None => {
                sec.set("size", 0);
            }
        }
    }
    let summary = doc.section_mut("summary");
    summary.set("clusters", clusters.len());
    if !dens.is_empty() {
        summary
            .set("density", mean_std(&dens).0)
            .set("size", mean_std(&sizes).0)
            .set("coherence_distance", mean_std(&dists).0);
    }
    if let Some(truths) = truths {
        let (mut node_fs, mut attr_fs) = (Vec::new(), Vec::new());
        for (t, truth) in truths.iter().enumerate() {
            // match each planted cluster to the detected cluster overlapping it best
            let best = clusters
                .iter()
                .enumerate()
                .map(|(i, c)| (f_measure(&truth.nodes, &c.nodes).f, i))
                .max_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
            let (node, attr, matched) = match best {
                Some((_, i)) => (
                    f_measure(&truth.nodes, &clusters[i].nodes),
                    f_measure(&truth.attributes, &clusters[i].attributes),
                    i.to_string(),
                ),
                None => {
                    let e = f_measure(&truth.nodes, &IndexSet::empty());
                    (e, e, "none".into())
                }
            };
            doc.section_mut(&format!("truth.{t}"))
                .set("matched_cluster", matched)
                .set("node_precision", node.precision)
                .set("node_recall", node.recall)
                .set("node_f", node.f)
                .set("attr_precision", attr.precision)
                .set("attr_recall", attr.recall)
                .set("attr_f", attr.f);
            node_fs.push(node.f);
            attr_fs.push(attr.f);
        }
        doc.section_mut("summary")
            .set("node_f", mean_std(&node_fs).0)
            .set("attr_f", mean_std(&attr_fs).0);
    }
    Ok(doc)
}

fn check_shape(run: &Section, net: &AttributedNetwork) -> Result<()> {
    for (key, actual) in [("n", net.node_count()), ("p", net.attribute_count())] {
        if let Some(stored) = run.parse_opt::<usize>(key)? {
            if stored != actual {
                return Err(Error::InvalidArgument(format!(
                    "result was computed with {key} = {stored}, the network has {actual}"
                )));
            }
        }
    }
    Ok(())
}

fn evaluate_dir(dir: &Path) -> Result<Document> {
    let net = load_network(&dir.join(EDGE_FILE), &dir.join(ATTRIBUTE_FILE))?;
    let (run, clusters) = read_result(&dir.join(RESULT_FILE))?;
    check_shape(&run, &net)?;
    let truth_path = dir.join(TRUTH_FILE);
    let truths = if truth_path.exists() {
        Some(read_truth(&truth_path)?)
    } else {
        None
    };
    evaluate_clusters(&net, &clusters, truths.as_deref())
}

/// Mean and standard deviation of every numeric summary key over trials.
pub fn batch_summary(trials: &[Document]) -> Document {
    let mut doc = Document::new();
    let mut keys: Vec<String> = Vec::new();
    for t in trials {
        if let Some(s) = t.section("summary") {
            for (k, _) in s.entries() {
                if !keys.contains(k) {
                    keys.push(k.clone());
                }
            }
        }
    }
    let sec = doc.section_mut("batch");
    sec.set("trials", trials.len());
    for key in keys {
        let values: Vec<f64> = trials
            .iter()
            .filter_map(|t| t.section("summary")?.parse_opt::<f64>(&key).ok().flatten())
            .collect();
        let (m, s) = mean_std(&values);
        sec.set(&format!("{key}_mean"), m)
            .set(&format!("{key}_std"), s);
    }
    doc
}

fn trial_dirs(root: &Path) -> Result<Vec<PathBuf>> {
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(root)
        .map_err(|e| Error::io(root, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join(RESULT_FILE).is_file())
        .collect();
    dirs.sort();
    if dirs.is_empty() {
        return Err(Error::Config(format!(
            "no trial directories with {RESULT_FILE} under {}",
            root.display()
        )));
    }
    Ok(dirs)
}

fn cmd_evaluate(a: EvaluateArgs, config: Option<Document>) -> Result<Outcome> {
    let mut r = Resolver::new(config, "evaluate");
    let out = r.require_path(a.out, "out")?;
    let mut doc = match r.path(a.batch, "batch")? {
        Some(root) => {
            let docs = trial_dirs(&root)?
                .iter()
                .map(|d| evaluate_dir(d))
                .collect::<Result<Vec<_>>>()?;
            batch_summary(&docs)
        }
        None => {
            let result = r.require_path(a.result, "result")?;
            let edges = r.require_path(a.net, "net")?;
            let attrs = r.require_path(a.attrs, "attrs")?;
            let net = load_network(&edges, &attrs)?;
            let (run, clusters) = read_result(&result)?;
            check_shape(&run, &net)?;
            let truths = match r.path(a.truth, "truth")? {
                Some(t) => Some(read_truth(&t)?),
                None => None,
            };
            evaluate_clusters(&net, &clusters, truths.as_deref())?
        }
    };
    doc.push(r.finish());
    doc.write(&out)?;
    Ok(Outcome::Success)
}

fn cmd_verify_rsc(a: VerifyArgs, config: Option<Document>) -> Result<Outcome> {
    let mut r = Resolver::new(config, "verify-rsc");
    let edges = r.require_path(a.net, "net")?;
    let attrs = r.require_path(a.attrs, "attrs")?;
    let out = r.require_path(a.out, "out")?;
    let k = r.get(a.k, "k", 5)?;
    let s = r.get(a.s, "s", 5)?;
    let trials = r.get(a.trials, "trials", 1000)?;
    let seed = r.get(a.seed, "seed", 0)?;
    let backend: Backend = r
        .get(a.backend, "backend", Backend::PcstApprox.to_string())?
        .parse()?;
    let mut net = load_network(&edges, &attrs)?;
    if let Some(target) = r.opt(a.normalize, "normalize")? {
        net = normalize_spectral(&net, target)?;
    }
    let score = resolve_score(&a.score, &mut r, &net, ScoreKind::Fisher, k, false)?;
    let kind = score.kind();
    let constraint = TopologyConstraint::connected(k, backend);
    constraint.validate(&net)?;
    let factors = constraint.approx_factors();
    let lemma = lemma_constants(kind, &net, score.config(), factors)?;
    if let Some(c) = lemma.as_ref().filter(|c| !c.applicable) {
        log::warn!("{}", c.note.as_deref().unwrap_or("lemma inapplicable"));
    }
    let sampler = SamplerConfig {
        k,
        s,
        trials,
        rng_seed: seed,
        mass: (kind == ScoreKind::ElevatedMean).then_some(k as f64),
    };
    let sample = sample_rsc_rss(&score, &net, &sampler, lemma.as_ref())?;
    let eps = match r.path(a.truth, "truth")? {
        Some(t) => {
            let truth = read_truth(&t)?.swap_remove(0);
            let mut x = vec![0.0; net.node_count()];
            let mut y = vec![0.0; net.attribute_count()];
            truth
                .nodes
                .iter()
                .for_each(|v| x[v] = score.domain_x().clamp(1.0));
            truth
                .attributes
                .iter()
                .for_each(|j| y[j] = score.domain_y().clamp(1.0));
            Some(epsilon_terms(&score, &net, &constraint, s, &x, &y)?)
        }
        None => None,
    };
    let mut doc = rsc_report(kind, lemma.as_ref(), &sample, factors, eps.as_ref());
    doc.push(r.finish());
    doc.write(&out)?;
    Ok(Outcome::Success)
}

fn default_score_for(task: &SynthTask) -> (ScoreKind, InitMode) {
    match task {
        SynthTask::Coherent(_) => (
            ScoreKind::CoherenceDensity,
            InitMode::MultiStart { starts: 4 },
        ),
        SynthTask::Anomalous(_) => (ScoreKind::ElevatedMean, InitMode::TopRowNorm),
    }
}

fn cmd_bench(a: BenchArgs, config: Option<Document>) -> Result<Outcome> {
    let mut r = Resolver::new(config, "bench");
    let out = r.require_path(a.out, "out")?;
    let trials = r.get(a.trials, "trials", 5)?;
    let base = r.get(a.seed, "seed", 0)?;
    let task = resolve_synth(&a.synth, base, &mut r)?;
    let (kind, init) = default_score_for(&task);
    let plan = resolve_pursuit(&a.pursuit, base, &mut r, init)?;
    // resolve score flags once for the echo; instances are rebuilt per trial
    let probe = task.with_seed(base).generate()?.0;
    let score_args = a.score.clone();
    resolve_score(&score_args, &mut r, &probe, kind, plan.cfg.k, true)?;
    let run = r.finish();
    create_dir(&out)?;

    let docs: Vec<Result<Document>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let seed = base + t;
            let dir = out.join(format!("trial-{t:03}"));
            let (net, truths, meta) = task.with_seed(seed).generate()?;
            let mut trial_run = run.clone();
            trial_run.set("trial", t).set("trial_seed", seed);
            write_dataset(&dir, &net, &truths, meta, trial_run.clone())?;
            let mut resolver = Resolver::new(None, "bench");
            let score = resolve_score(&score_args, &mut resolver, &net, kind, plan.cfg.k, true)?;
            let trial_plan = PursuitPlan {
                cfg: PursuitConfig {
                    rng_seed: seed,
                    ..plan.cfg.clone()
                },
                constraint: plan.constraint.clone(),
                top_k: plan.top_k,
                deflation: plan.deflation,
            };
            let clusters = detect_on(&net, &score, &trial_plan)?;
            trial_run
                .set("n", net.node_count())
                .set("p", net.attribute_count());
            result_document(trial_run.clone(), &clusters).write(&dir.join(RESULT_FILE))?;
            let mut metrics = evaluate_clusters(&net, &clusters, Some(&truths))?;
            let converged = clusters.iter().all(|c| c.converged);
            metrics
                .section_mut("summary")
                .set("converged", if converged { 1 } else { 0 });
            metrics.write(&dir.join(METRICS_FILE))?;
            Ok(metrics)
        })
        .collect();
    let docs = docs.into_iter().collect::<Result<Vec<_>>>()?;
    let mut summary = batch_summary(&docs);
    summary.push(run);
    summary.write(&out.join("summary.txt"))?;
    Ok(Outcome::Success)
}

fn init_logging() {
    let raw = std::env::var("SGP_LOG_LEVEL").unwrap_or_default();
    let level = match raw.to_ascii_lowercase().as_str() {
        "error" => log::LevelFilter::Error,
        "info" => log::LevelFilter::Info,
        "debug" => log::LevelFilter::Debug,
        _ => log::LevelFilter::Warn,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .try_init();
    if !raw.is_empty()
        && !matches!(
            raw.to_ascii_lowercase().as_str(),
            "error" | "warn" | "info" | "debug"
        )
    {
        log::warn!("SGP_LOG_LEVEL={raw:?} not understood; using warn");
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = load_config(cli.config.as_deref()).and_then(|config| match cli.command {
        Command::Generate(a) => cmd_generate(a, config),
        Command::Detect(a) => cmd_detect(a, config),
        Command::Evaluate(a) => cmd_evaluate(a, config),
        Command::VerifyRsc(a) => cmd_verify_rsc(a, config),
        Command::Bench(a) => cmd_bench(a, config),
    });
    match result {
        Ok(outcome) => outcome.exit_code(),
        Err(e) => {
            eprintln!("sgp: error: {e}");
            1
        }
    }
}
