//! End-to-end tests of the `lpx` binary: exit codes, diagnostics, artifact
//! layout, and reproducibility of the full pipeline.

use std::path::Path;
use std::process::Output;

use lpx_cli::io::AttributionsFile;
use lpx_core::ExplainerKind;

fn lpx(args: &[&str]) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_lpx"))
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn run_ok(args: &[&str]) -> Output {
    let out = lpx(args);
    assert!(
        out.status.success(),
        "`lpx {}` failed:\n{}",
        args.join(" "),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn run_err(args: &[&str]) -> String {
    let out = lpx(args);
    assert!(!out.status.success(), "`lpx {}` unexpectedly succeeded", args.join(" "));
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const TINY_SBM: &str = r#"
seed = 11

[dataset]
kind = "sbm"
block_sizes = [8, 8]
p_in = 0.8
p_out = 0.05

[split]
test_fraction = 0.2

[model]
encoder = "gin"
decoder = "inner_product"
hidden_dim = 8
embed_dim = 4

[training]
epochs = 30
lr = 0.005

[explain]
methods = ["integrated_gradients", "random"]
ig_steps = 8
max_targets = 3

[evaluate]
protocol = "insdel"
realizations = 5
"#;

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn run_pipeline(config: &str, out: &Path) {
    let out = out.to_str().unwrap();
    for cmd in ["generate", "train", "explain", "evaluate", "report"] {
        run_ok(&[cmd, "--config", config, "--out", out]);
    }
}

#[test]
fn pipeline_runs_end_to_end_from_one_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), TINY_SBM);
    let out = dir.path().join("run");
    run_pipeline(&config, &out);

    for name in [
        "graph.txt",
        "features.txt",
        "dataset.json",
        "split.json",
        "checkpoint.json",
        "train_metrics.json",
        "attributions.json",
        "results.json",
        "curves.json",
        "summary.txt",
        "curves_edges_insertion.svg",
    ] {
        assert!(out.join(name).exists(), "missing artifact {name}");
    }
}

#[test]
fn reruns_into_fresh_directories_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), TINY_SBM);
    let (out_a, out_b) = (dir.path().join("a"), dir.path().join("b"));
    run_pipeline(&config, &out_a);
    run_pipeline(&config, &out_b);

    let mut names: Vec<String> = std::fs::read_dir(&out_a)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert!(names.len() >= 10, "artifacts went missing: {names:?}");
    for name in names {
        let a = std::fs::read(out_a.join(&name)).unwrap();
        let b = std::fs::read(out_b.join(&name)).unwrap();
        assert!(a == b, "{name} differs between identical runs");
    }
}

#[test]
fn seed_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), TINY_SBM);
    let read = |out: &Path| std::fs::read(out.join("split.json")).unwrap();

    let (out1, out2, out3) = (dir.path().join("s1"), dir.path().join("s2"), dir.path().join("s3"));
    run_ok(&["generate", "--config", &config, "--out", out1.to_str().unwrap(), "--seed", "1"]);
    run_ok(&["generate", "--config", &config, "--out", out2.to_str().unwrap(), "--seed", "2"]);
    run_ok(&["generate", "--config", &config, "--out", out3.to_str().unwrap(), "--seed", "1"]);

    assert_ne!(read(&out1), read(&out2), "different seeds should change the split");
    assert_eq!(read(&out1), read(&out3), "equal seeds should reproduce the split");
}

#[test]
fn malformed_config_field_is_named_in_the_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &format!("{TINY_SBM}\n[training2]\nepochs = 1\n"));
    let stderr = run_err(&["generate", "--config", &config, "--out", "unused"]);
    assert!(stderr.contains("training2"), "stderr was: {stderr}");
    assert!(stderr.starts_with("error:"), "stderr was: {stderr}");
}

#[test]
fn missing_input_file_is_named_in_the_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"
[dataset]
kind = "files"
graph = "/nonexistent/star.txt"
features = "/nonexistent/features.txt"

[model]
encoder = "gin"
decoder = "inner_product"
"#,
    );
    let out = dir.path().join("run");
    let stderr = run_err(&["generate", "--config", &config, "--out", out.to_str().unwrap()]);
    assert!(stderr.contains("/nonexistent/star.txt"), "stderr was: {stderr}");
}

#[test]
fn evaluate_without_attributions_names_the_missing_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), TINY_SBM);
    let out = dir.path().join("run");
    let out_str = out.to_str().unwrap().to_string();
    run_ok(&["generate", "--config", &config, "--out", &out_str]);
    run_ok(&["train", "--config", &config, "--out", &out_str]);
    let stderr = run_err(&["evaluate", "--config", &config, "--out", &out_str]);
    assert!(stderr.contains("attributions.json"), "stderr was: {stderr}");
}

#[test]
fn ring_lattice_without_rewiring_has_exactly_n_times_half_k_edges() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"
[dataset]
kind = "watts_strogatz"
n = 100
k = 4
beta = 0.0

[model]
encoder = "gin"
decoder = "inner_product"
"#,
    );
    let out = dir.path().join("run");
    run_ok(&["generate", "--config", &config, "--out", out.to_str().unwrap()]);

    let text = std::fs::read_to_string(out.join("graph.txt")).unwrap();
    let edge_lines = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("nodes") && !l.trim().is_empty())
        .count();
    assert_eq!(edge_lines, 200);
}

/// A five-node star around node 0 whose held-out edge is (0, 1): the
/// remaining spokes pull the prediction in known directions, so the signed
/// attributions must come out positive for (0, 2), negative for (0, 3),
/// and zero for the neutral spoke (0, 4).
#[test]
fn star_fixture_reproduces_the_attribution_sign_pattern() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("star_graph.txt");
    let features = dir.path().join("star_features.txt");
    std::fs::write(&graph, "nodes 5\n0 1\n0 2\n0 3\n0 4\n").unwrap();
    std::fs::write(&features, "0.5 0.5\n1 0\n1 0\n0 1\n0.5 0.5\n").unwrap();

    // Seed 3 makes the split hold out exactly (0, 1).
    let config = write_config(
        dir.path(),
        &format!(
            r#"
seed = 3

[dataset]
kind = "files"
graph = "{}"
features = "{}"

[split]
test_fraction = 0.25

[model]
encoder = "mean_aggregation"
decoder = "cosine"

[training]
epochs = 5

[explain]
ig_steps = 64
"#,
            graph.display(),
            features.display()
        ),
    );
    let out = dir.path().join("run");
    let out_str = out.to_str().unwrap().to_string();
    for cmd in ["generate", "train", "explain"] {
        run_ok(&[cmd, "--config", &config, "--out", &out_str]);
    }

    let file: AttributionsFile =
        serde_json::from_str(&std::fs::read_to_string(out.join("attributions.json")).unwrap())
            .unwrap();
    assert!(file.skipped.is_empty(), "skipped: {:?}", file.skipped);
    assert_eq!(file.records.len(), ExplainerKind::ALL.len());

    for record in &file.records {
        assert_eq!(record.target, (0, 1));
        let score = |e| record.edge_score(e).unwrap();
        match record.method {
            ExplainerKind::IntegratedGradients
            | ExplainerKind::Deconvolution
            | ExplainerKind::Lrp => {
                assert!(score((0, 2)) > 1e-4, "{}: {}", record.method, score((0, 2)));
                assert!(score((0, 3)) < -1e-4, "{}: {}", record.method, score((0, 3)));
                assert!(score((0, 4)).abs() < 1e-9, "{}: {}", record.method, score((0, 4)));
            }
            ExplainerKind::GnnExplainer | ExplainerKind::Random => {
                assert!(record.edge_scores.iter().all(|&s| (0.0..=1.0).contains(&s)));
            }
        }
    }
}
