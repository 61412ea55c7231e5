use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use sgpursuit::doc::{Document, Section};
use sgpursuit::results::{read_result, result_document, ClusterRecord};
use sgpursuit::synth::read_truth;

/// Runs the binary; returns the exit code and stderr.
fn sgp(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_sgp"))
        .args(args)
        .env("SGP_LOG_LEVEL", "error")
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn without_timestamp(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with("timestamp ="))
        .collect::<Vec<_>>()
        .join("\n")
}

fn read(path: &Path) -> Document {
    Document::read(path).unwrap()
}

fn generate(dir: &Path, extra: &[&str]) {
    let mut args = vec!["generate", "--out", s(dir)];
    args.extend_from_slice(extra);
    let (code, err) = sgp(&args);
    assert_eq!(code, 0, "{err}");
}

fn toy(dir: &Path) -> (PathBuf, PathBuf) {
    let (e, a) = (dir.join("edges.txt"), dir.join("attributes.txt"));
    fs::write(&e, "# no edges\n").unwrap();
    fs::write(&a, "5\n").unwrap();
    (e, a)
}

#[test]
fn generate_writes_four_deterministic_files() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    generate(&a, &["--task", "coherent", "--seed", "7"]);
    let mut names: Vec<String> = fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        ["attributes.txt", "edges.txt", "metadata.txt", "truth.txt"]
    );
    let first: Vec<String> = names
        .iter()
        .map(|n| without_timestamp(&a.join(n)))
        .collect();
    // the output path is echoed into the metadata, so rerun in place
    generate(&a, &["--task", "coherent", "--seed", "7"]);
    for (name, before) in names.iter().zip(&first) {
        assert_eq!(&without_timestamp(&a.join(name)), before, "{name}");
    }
    let meta = read(&a.join("metadata.txt"));
    assert_eq!(meta.section("metadata").unwrap().get("rng_seed"), Some("7"));
    assert_eq!(meta.section("network").unwrap().get("nodes"), Some("300"));
}

#[test]
fn missing_out_is_a_usage_error() {
    let (code, err) = sgp(&["generate", "--task", "coherent"]);
    assert_eq!(code, 1);
    assert!(err.contains("--out"), "{err}");
    assert_eq!(sgp(&["no-such-command"]).0, 1);
    assert_eq!(sgp(&["generate", "--bogus-flag", "1"]).0, 1);
}

#[test]
fn null_signal_dataset() {
    let tmp = tempfile::tempdir().unwrap();
    generate(
        tmp.path(),
        &["--task", "anomalous", "--mu", "0", "--n", "100"],
    );
    let meta = read(&tmp.path().join("metadata.txt"));
    assert_eq!(
        meta.section("metadata").unwrap().get("signal_mu"),
        Some("0")
    );
    assert_eq!(
        read_truth(&tmp.path().join("truth.txt")).unwrap()[0]
            .nodes
            .len(),
        30
    );
}

#[test]
fn detect_on_single_node_toy() {
    let tmp = tempfile::tempdir().unwrap();
    let (e, a) = toy(tmp.path());
    let out = tmp.path().join("result.txt");
    let args = [
        "detect",
        "--net",
        s(&e),
        "--attrs",
        s(&a),
        "--score",
        "fisher",
        "--k",
        "1",
        "--s",
        "1",
        "--out",
        s(&out),
    ];
    let (code, err) = sgp(&args);
    assert_eq!(code, 0, "{err}");
    let (run, clusters) = read_result(&out).unwrap();
    assert_eq!(clusters.len(), 1);
    assert_eq!(
        (
            clusters[0].nodes.as_slice(),
            clusters[0].attributes.as_slice()
        ),
        (&[0][..], &[0][..])
    );
    assert_eq!(run.get("score"), Some("fisher"));
    // re-running rewrites identical bytes apart from the timestamp
    let first = without_timestamp(&out);
    assert_eq!(sgp(&args).0, 0);
    assert_eq!(without_timestamp(&out), first);
}

#[test]
fn iteration_cap_exit_code() {
    let tmp = tempfile::tempdir().unwrap();
    generate(tmp.path(), &["--task", "anomalous", "--seed", "1"]);
    let d = tmp.path();
    let out = d.join("result.txt");
    let (code, _) = sgp(&[
        "detect",
        "--net",
        s(&d.join("edges.txt")),
        "--attrs",
        s(&d.join("attributes.txt")),
        "--score",
        "elevated-mean",
        "--k",
        "30",
        "--max-iters",
        "1",
        "--out",
        s(&out),
    ]);
    assert_eq!(code, 2);
    assert!(!read_result(&out).unwrap().1[0].converged);
}

#[test]
fn exact_backend_refused_on_large_network() {
    let tmp = tempfile::tempdir().unwrap();
    generate(tmp.path(), &["--task", "anomalous", "--n", "1000"]);
    let d = tmp.path();
    let (code, err) = sgp(&[
        "detect",
        "--net",
        s(&d.join("edges.txt")),
        "--attrs",
        s(&d.join("attributes.txt")),
        "--backend",
        "exact",
        "--out",
        s(&d.join("r.txt")),
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("enumeration cap of 15"), "{err}");
    assert!(!d.join("r.txt").exists());
}

#[test]
fn top_k_detect_writes_two_clusters() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    generate(
        d,
        &[
            "--clusters-coherent",
            "2",
            "--clusters-incoherent",
            "4",
            "--cluster-size",
            "20",
        ],
    );
    let out = d.join("result.txt");
    let (code, err) = sgp(&[
        "detect",
        "--net",
        s(&d.join("edges.txt")),
        "--attrs",
        s(&d.join("attributes.txt")),
        "--score",
        "coherence-density",
        "--init",
        "multi-start:4",
        "--k",
        "20",
        "--s",
        "10",
        "--top-k",
        "2",
        "--out",
        s(&out),
    ]);
    assert!(code == 0 || code == 2, "{err}");
    let clusters = read_result(&out).unwrap().1;
    assert_eq!(clusters.len(), 2);
    let metrics = d.join("metrics.txt");
    let (code, err) = sgp(&[
        "evaluate",
        "--result",
        s(&out),
        "--net",
        s(&d.join("edges.txt")),
        "--attrs",
        s(&d.join("attributes.txt")),
        "--truth",
        s(&d.join("truth.txt")),
        "--out",
        s(&metrics),
    ]);
    assert_eq!(code, 0, "{err}");
    let doc = read(&metrics);
    for t in ["truth.0", "truth.1"] {
        let f: f64 = doc.section(t).unwrap().parse("node_f").unwrap();
        assert!(f >= 0.8, "{t}: {f}");
    }
}

fn perfect_result(dir: &Path) -> PathBuf {
    let truth = read_truth(&dir.join("truth.txt")).unwrap().remove(0);
    let rec = ClusterRecord {
        nodes: truth.nodes,
        attributes: truth.attributes,
        score: 1.0,
        converged: true,
        iterations: 1,
        objective: vec![1.0],
        step_norms: vec![0.0],
    };
    let path = dir.join("result.txt");
    result_document(Section::new("run"), &[rec])
        .write(&path)
        .unwrap();
    path
}

#[test]
fn evaluate_perfect_and_result_only() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    generate(d, &["--task", "anomalous", "--seed", "3"]);
    let result = perfect_result(d);
    let (net, attrs) = (d.join("edges.txt"), d.join("attributes.txt"));
    let with_truth = d.join("m1.txt");
    let truth = d.join("truth.txt");
    let base = [
        "evaluate",
        "--result",
        s(&result),
        "--net",
        s(&net),
        "--attrs",
        s(&attrs),
    ];
    let mut args = base.to_vec();
    args.extend(["--truth", s(&truth), "--out", s(&with_truth)]);
    assert_eq!(sgp(&args).0, 0);
    let summary = read(&with_truth).section("summary").unwrap().clone();
    assert_eq!(summary.parse::<f64>("node_f").unwrap(), 1.0);
    assert_eq!(summary.parse::<f64>("attr_f").unwrap(), 1.0);
    assert_eq!(summary.parse::<f64>("size").unwrap(), 30.0);

    let only = d.join("m2.txt");
    let mut args = base.to_vec();
    args.extend(["--out", s(&only)]);
    assert_eq!(sgp(&args).0, 0);
    let doc = read(&only);
    assert!(doc.section("summary").unwrap().get("node_f").is_none());
    assert!(doc.section("truth.0").is_none());
    assert!(doc
        .section("cluster.0")
        .unwrap()
        .get("coherence_distance")
        .is_some());
}

#[test]
fn evaluate_rejects_mismatched_shapes() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    generate(d, &["--task", "anomalous", "--n", "100"]);
    let mut run = Section::new("run");
    run.set("n", 400).set("p", 50);
    let result = d.join("result.txt");
    result_document(run, &[]).write(&result).unwrap();
    let (code, err) = sgp(&[
        "evaluate",
        "--result",
        s(&result),
        "--net",
        s(&d.join("edges.txt")),
        "--attrs",
        s(&d.join("attributes.txt")),
        "--out",
        s(&d.join("m.txt")),
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("n = 400"), "{err}");
}

#[test]
fn bench_and_batch_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("bench");
    let (code, err) = sgp(&[
        "bench",
        "--task",
        "anomalous",
        "--n",
        "100",
        "--k",
        "10",
        "--cluster-size",
        "10",
        "--trials",
        "3",
        "--seed",
        "5",
        "--out",
        s(&out),
    ]);
    assert_eq!(code, 0, "{err}");
    let per_trial: Vec<f64> = (0..3)
        .map(|t| {
            read(&out.join(format!("trial-{t:03}/metrics.txt")))
                .section("summary")
                .unwrap()
                .parse("node_f")
                .unwrap()
        })
        .collect();
    let mean = per_trial.iter().sum::<f64>() / 3.0;
    let std = (per_trial.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 3.0).sqrt();
    let batch = tmp.path().join("batch.txt");
    assert_eq!(
        sgp(&["evaluate", "--batch", s(&out), "--out", s(&batch)]).0,
        0
    );
    let sec = read(&batch).section("batch").unwrap().clone();
    assert_eq!(sec.parse::<usize>("trials").unwrap(), 3);
    assert!((sec.parse::<f64>("node_f_mean").unwrap() - mean).abs() < 1e-12);
    assert!((sec.parse::<f64>("node_f_std").unwrap() - std).abs() < 1e-12);
    let summary = read(&out.join("summary.txt"));
    assert!(
        (summary
            .section("batch")
            .unwrap()
            .parse::<f64>("node_f_mean")
            .unwrap()
            - mean)
            .abs()
            < 1e-12
    );
    assert_eq!(
        read(&out.join("trial-001/metadata.txt"))
            .section("metadata")
            .unwrap()
            .get("rng_seed"),
        Some("6")
    );
}

#[test]
fn verify_rsc_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    generate(d, &["--task", "anomalous", "--n", "100", "--p", "20"]);
    let (net, attrs) = (d.join("edges.txt"), d.join("attributes.txt"));
    let run = |extra: &[&str]| {
        let out = d.join("report.txt");
        let mut args = vec![
            "verify-rsc",
            "--net",
            s(&net),
            "--attrs",
            s(&attrs),
            "--trials",
            "300",
            "--out",
            s(&out),
        ];
        args.extend_from_slice(extra);
        let (code, err) = sgp(&args);
        assert_eq!(code, 0, "{err}");
        read(&out)
    };
    let normalized = run(&["--score", "fisher", "--normalize", "0.9"]);
    assert_eq!(
        normalized.section("rsc").unwrap().get("lemma"),
        Some("applicable")
    );
    assert_eq!(
        normalized.section("empirical").unwrap().get("violations"),
        Some("0")
    );
    assert!(
        normalized.section("lemma.appendix").is_some()
            && normalized.section("lemma.statement").is_some()
    );

    // raw N(0, 1) attributes have ||W||^2 far above 1
    let scaled = run(&["--score", "fisher"]);
    assert_eq!(
        scaled.section("rsc").unwrap().get("lemma"),
        Some("inapplicable")
    );
    assert!(scaled
        .section("rsc")
        .unwrap()
        .get("note")
        .unwrap()
        .starts_with("lemma inapplicable"));

    let coherence = run(&["--score", "coherence"]);
    assert_eq!(
        coherence.section("rsc").unwrap().get("note"),
        Some("no lemma constants; empirical only")
    );

    let truth = d.join("truth.txt");
    let with_truth = run(&[
        "--score",
        "fisher",
        "--normalize",
        "0.9",
        "--truth",
        s(&truth),
    ]);
    assert!(with_truth
        .section("epsilon")
        .unwrap()
        .get("eps_x_2k")
        .is_some());
}

#[test]
fn config_precedence_and_echo() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.txt");
    fs::write(
        &cfg,
        "[defaults]\nseed = 11\np = 40\n[generate]\ntask = anomalous\nn = 64\n",
    )
    .unwrap();
    let out = tmp.path().join("data");
    let (code, err) = sgp(&[
        "--config",
        s(&cfg),
        "generate",
        "--p",
        "12",
        "--out",
        s(&out),
    ]);
    assert_eq!(code, 0, "{err}");
    let meta = read(&out.join("metadata.txt"));
    let m = meta.section("metadata").unwrap();
    // flag beats config, config beats default
    assert_eq!(m.get("p"), Some("12"));
    assert_eq!(m.get("n"), Some("64"));
    assert_eq!(m.get("rng_seed"), Some("11"));
    assert_eq!(m.get("cluster_size"), Some("30"));
    let run = meta.section("run").unwrap();
    for (k, v) in [
        ("p", "12"),
        ("n", "64"),
        ("seed", "11"),
        ("task", "anomalous"),
        ("mu", "3"),
    ] {
        assert_eq!(run.get(k), Some(v), "{k}");
    }
    assert!(run.get("timestamp").is_some());

    fs::write(&cfg, "[generate]\nn = many\n").unwrap();
    let (code, err) = sgp(&[
        "--config",
        s(&cfg),
        "generate",
        "--task",
        "anomalous",
        "--out",
        s(&out),
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("`n`"), "{err}");
}
