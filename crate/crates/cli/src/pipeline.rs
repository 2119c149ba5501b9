//! The five pipeline stages behind the subcommands.
//!
//! Each stage reads its inputs from the run's output directory and writes
//! its artifacts back there, so `generate → train → explain → evaluate →
//! report` composes through the filesystem and any stage can be re-run in
//! isolation.

use std::path::Path;

use anyhow::{bail, Context, Result};

use lpx_core::{
    build_graph, evaluate_ground_truth, evaluate_insdel, generate_sbm, generate_ws, median,
    receptive_hops, sample_std, split_edges, Attribution, Curve, CurveKind, CurveSource, Edge,
    EdgeSplit, Error, ExplainerKind, Graph, GtRow, InsdelConfig, InsdelRow, LabeledGraph,
    Subject, TrainedModel,
};

use crate::config::{ExplainConfig, Protocol, RunConfig};
use crate::io::{
    self, Aggregate, AttributionsFile, CheckpointFile, CurvesFile, DatasetFile, MetricsFile,
    ResultsFile, SkippedTarget, SplitFile,
};
use crate::plot::{self, Series};

pub const GRAPH_FILE: &str = "graph.txt";
pub const FEATURES_FILE: &str = "features.txt";
pub const DATASET_FILE: &str = "dataset.json";
pub const SPLIT_FILE: &str = "split.json";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const TRAIN_METRICS_FILE: &str = "train_metrics.json";
pub const ATTRIBUTIONS_FILE: &str = "attributions.json";
pub const RESULTS_FILE: &str = "results.json";
pub const CURVES_FILE: &str = "curves.json";
pub const SUMMARY_FILE: &str = "summary.txt";

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Generates (or imports) the dataset and freezes the train/test split.
pub fn cmd_generate(config: &RunConfig) -> Result<()> {
    let out = config.out_dir();
    io::ensure_dir(out)?;

    let (graph, kind, labels, random_edges) = match &config.dataset {
        d @ crate::config::DatasetConfig::Sbm { .. } => {
            let lg = generate_sbm(&d.sbm(config.data_seed()).unwrap())?;
            (lg.graph, Some(lg.kind), lg.labels, lg.random_edges)
        }
        d @ crate::config::DatasetConfig::WattsStrogatz { .. } => {
            let lg = generate_ws(&d.ws(config.data_seed()).unwrap())?;
            (lg.graph, Some(lg.kind), lg.labels, lg.random_edges)
        }
        crate::config::DatasetConfig::Files { graph, features } => {
            let (n, edges) = io::parse_graph(&read_text(graph)?)
                .with_context(|| format!("invalid graph file {}", graph.display()))?;
            let x = io::parse_features(&read_text(features)?)
                .with_context(|| format!("invalid feature file {}", features.display()))?;
            (build_graph(n, &edges, x)?, None, None, Vec::new())
        }
    };

    io::write_text(&out.join(GRAPH_FILE), &io::graph_to_string(graph.num_nodes(), graph.edges()))?;
    io::write_text(&out.join(FEATURES_FILE), &io::features_to_string(graph.features()))?;
    io::write_json(
        &out.join(DATASET_FILE),
        &DatasetFile {
            tool_version: io::TOOL_VERSION.to_string(),
            config: config.clone(),
            kind,
            num_nodes: graph.num_nodes(),
            num_edges: graph.num_edges(),
            num_features: graph.num_features(),
            labels,
            random_edges,
        },
    )?;

    let split = split_edges(&graph, config.split.test_fraction, config.split_seed())?;
    io::write_json(
        &out.join(SPLIT_FILE),
        &SplitFile {
            tool_version: io::TOOL_VERSION.to_string(),
            config: config.clone(),
            seed: split.seed,
            num_nodes: graph.num_nodes(),
            train_edges: split.train_graph.edges().to_vec(),
            test_pos: split.test_pos.clone(),
            test_neg: split.test_neg.clone(),
        },
    )?;

    println!(
        "generated {} nodes, {} edges ({} held out), {} features -> {}",
        graph.num_nodes(),
        graph.num_edges(),
        split.test_pos.len(),
        graph.num_features(),
        out.display()
    );
    Ok(())
}

fn load_dataset_file(out: &Path) -> Result<DatasetFile> {
    io::read_json(&out.join(DATASET_FILE))
}

fn load_split(out: &Path) -> Result<SplitFile> {
    io::read_json(&out.join(SPLIT_FILE))
}

/// Reconstructs the training graph: split edges over the full node set
/// with the stored features.
fn load_train_graph(out: &Path, split: &SplitFile) -> Result<Graph> {
    let (num_nodes, _) = io::parse_graph(&read_text(&out.join(GRAPH_FILE))?)?;
    if num_nodes != split.num_nodes {
        bail!(
            "{} says {} nodes but {} says {}; artifacts are from different runs",
            GRAPH_FILE,
            num_nodes,
            SPLIT_FILE,
            split.num_nodes
        );
    }
    let features = io::parse_features(&read_text(&out.join(FEATURES_FILE))?)?;
    Ok(build_graph(num_nodes, &split.train_edges, features)?)
}

/// Trains the configured model on the train split and checkpoints it.
pub fn cmd_train(config: &RunConfig) -> Result<()> {
    let out = config.out_dir();
    let split_file = load_split(out)?;
    let train_graph = load_train_graph(out, &split_file)?;
    let split = EdgeSplit {
        train_graph,
        test_pos: split_file.test_pos.clone(),
        test_neg: split_file.test_neg.clone(),
        seed: split_file.seed,
    };

    let model = lpx_core::train(&config.model, &config.train_config(), &split)?;
    let meta = model.meta.clone().expect("training always records its run");

    io::write_json(&out.join(CHECKPOINT_FILE), &CheckpointFile::from_model(config, &model)?)?;
    io::write_json(
        &out.join(TRAIN_METRICS_FILE),
        &MetricsFile {
            tool_version: io::TOOL_VERSION.to_string(),
            config: config.clone(),
            meta: meta.clone(),
        },
    )?;

    let fmt_opt = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.4}"));
    println!(
        "trained {} + {} for {} epochs: loss {:.4}, test auc {}, accuracy {}",
        config.model.encoder.as_str(),
        config.model.decoder.as_str(),
        meta.epochs,
        meta.final_loss,
        fmt_opt(meta.test_auc),
        fmt_opt(meta.test_accuracy),
    );
    Ok(())
}

fn load_model(out: &Path, config: &RunConfig) -> Result<TrainedModel> {
    let ckpt: CheckpointFile = io::read_json(&out.join(CHECKPOINT_FILE))?;
    if ckpt.model != config.model {
        bail!(
            "checkpoint in {} was trained with a different model configuration; \
             re-run train or fix [model]",
            out.display()
        );
    }
    ckpt.to_model()
}

fn run_explainer(
    model: &TrainedModel,
    g: &Graph,
    target: Edge,
    kind: ExplainerKind,
    cfg: &ExplainConfig,
    seed: u64,
) -> lpx_core::Result<Attribution> {
    match kind {
        ExplainerKind::IntegratedGradients => {
            lpx_core::integrated_gradients(model, g, target, cfg.ig_steps)
        }
        ExplainerKind::Deconvolution => lpx_core::deconvolution(model, g, target),
        ExplainerKind::Lrp => lpx_core::lrp(model, g, target, cfg.lrp_epsilon),
        ExplainerKind::GnnExplainer => {
            lpx_core::gnn_explainer(model, g, target, &cfg.gnn_explainer, seed)
        }
        ExplainerKind::Random => lpx_core::random_attribution(model, g, target, seed),
    }
}

/// Attributes every held-out positive edge with each configured method.
pub fn cmd_explain(config: &RunConfig) -> Result<()> {
    let out = config.out_dir();
    if config.explain.methods.is_empty() {
        bail!("no explainers configured: [explain] methods is empty");
    }
    let split_file = load_split(out)?;
    let train_graph = load_train_graph(out, &split_file)?;
    let model = load_model(out, config)?;

    let mut targets: Vec<Edge> = split_file.test_pos.clone();
    if let Some(cap) = config.explain.max_targets {
        targets.truncate(cap);
    }

    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for &target in &targets {
        let mut per_target = Vec::new();
        let mut skip_reason = None;
        for &kind in &config.explain.methods {
            match run_explainer(&model, &train_graph, target, kind, &config.explain, config.seed) {
                Ok(attr) => per_target.push(attr),
                // Scope problems are method-independent: skip the target
                // once rather than once per method.
                Err(e @ (Error::Degenerate(_) | Error::RefusedTarget(..))) => {
                    skip_reason = Some(e.to_string());
                    break;
                }
                Err(e) => {
                    return Err(e).with_context(|| {
                        format!("explaining ({}, {}) with {kind}", target.0, target.1)
                    });
                }
            }
        }
        match skip_reason {
            Some(reason) => skipped.push(SkippedTarget { target, reason }),
            None => records.extend(per_target),
        }
    }

    io::write_json(
        &out.join(ATTRIBUTIONS_FILE),
        &AttributionsFile {
            tool_version: io::TOOL_VERSION.to_string(),
            config: config.clone(),
            records: records.clone(),
            skipped: skipped.clone(),
        },
    )?;

    println!(
        "explained {} targets with {} methods: {} records, {} skipped",
        targets.len() - skipped.len(),
        config.explain.methods.len(),
        records.len(),
        skipped.len()
    );
    Ok(())
}

fn aggregate(method: ExplainerKind, metric: &str, values: &[f64]) -> Aggregate {
    Aggregate {
        method: method.as_str().to_string(),
        metric: metric.to_string(),
        median: median(values),
        std: sample_std(values),
        count: values.len(),
    }
}

/// Methods actually present in the rows, in canonical order.
fn methods_present<T>(rows: &[T], method_of: impl Fn(&T) -> ExplainerKind) -> Vec<ExplainerKind> {
    ExplainerKind::ALL
        .into_iter()
        .filter(|&k| rows.iter().any(|r| method_of(r) == k))
        .collect()
}

fn gt_aggregates(rows: &[GtRow]) -> Vec<Aggregate> {
    let mut aggs = Vec::new();
    for method in methods_present(rows, |r: &GtRow| r.method) {
        let picks: [(&str, fn(&GtRow) -> Option<f64>); 6] = [
            ("sensitivity", |r| r.combined.sensitivity),
            ("specificity", |r| r.combined.specificity),
            ("edge_sensitivity", |r| r.edges.sensitivity),
            ("edge_specificity", |r| r.edges.specificity),
            ("feature_sensitivity", |r| r.features.sensitivity),
            ("feature_specificity", |r| r.features.specificity),
        ];
        for (name, pick) in picks {
            let values: Vec<f64> =
                rows.iter().filter(|r| r.method == method).filter_map(pick).collect();
            aggs.push(aggregate(method, name, &values));
        }
    }
    aggs
}

fn insdel_aggregates(rows: &[InsdelRow]) -> Vec<Aggregate> {
    let mut aggs = Vec::new();
    for method in methods_present(rows, |r: &InsdelRow| r.method) {
        let picks: [(&str, fn(&InsdelRow) -> f64); 4] = [
            ("edge_insertion", |r| r.edge_insertion.score),
            ("edge_deletion", |r| r.edge_deletion.score),
            ("feature_insertion", |r| r.feature_insertion.score),
            ("feature_deletion", |r| r.feature_deletion.score),
        ];
        for (name, pick) in picks {
            let values: Vec<f64> =
                rows.iter().filter(|r| r.method == method).map(pick).collect();
            aggs.push(aggregate(method, name, &values));
        }
    }
    aggs
}

/// Scores the stored attributions with the configured protocol.
pub fn cmd_evaluate(config: &RunConfig) -> Result<()> {
    let out = config.out_dir();
    let split_file = load_split(out)?;
    let train_graph = load_train_graph(out, &split_file)?;
    let model = load_model(out, config)?;
    let attrs: AttributionsFile = io::read_json(&out.join(ATTRIBUTIONS_FILE))?;
    if attrs.records.is_empty() {
        bail!("no attributions to evaluate in {}", out.display());
    }

    let results = match config.evaluate.protocol {
        Protocol::GroundTruth => {
            let dataset = load_dataset_file(out)?;
            let Some(kind) = dataset.kind else {
                bail!(
                    "dataset in {} was loaded from files and has no ground truth; \
                     use the insdel protocol",
                    out.display()
                );
            };
            let data = LabeledGraph {
                graph: train_graph,
                kind,
                labels: dataset.labels,
                random_edges: dataset.random_edges,
            };
            let rows = evaluate_ground_truth(
                &data,
                receptive_hops(&config.model),
                &attrs.records,
                config.evaluate.threshold,
            )?;
            let aggregates = gt_aggregates(&rows);
            ResultsFile {
                tool_version: io::TOOL_VERSION.to_string(),
                config: config.clone(),
                protocol: Protocol::GroundTruth,
                gt_rows: Some(rows),
                insdel_rows: None,
                aggregates,
            }
        }
        Protocol::Insdel => {
            let insdel_config = InsdelConfig {
                realizations: config.evaluate.realizations,
                step: config.evaluate.step,
                seed: config.seed,
            };
            let report = evaluate_insdel(&model, &train_graph, &attrs.records, &insdel_config)?;
            io::write_json(
                &out.join(CURVES_FILE),
                &CurvesFile {
                    tool_version: io::TOOL_VERSION.to_string(),
                    config: config.clone(),
                    records: report.curves,
                },
            )?;
            let aggregates = insdel_aggregates(&report.rows);
            ResultsFile {
                tool_version: io::TOOL_VERSION.to_string(),
                config: config.clone(),
                protocol: Protocol::Insdel,
                gt_rows: None,
                insdel_rows: Some(report.rows),
                aggregates,
            }
        }
    };

    let n_rows = results
        .gt_rows
        .as_ref()
        .map_or(0, Vec::len)
        .max(results.insdel_rows.as_ref().map_or(0, Vec::len));
    io::write_json(&out.join(RESULTS_FILE), &results)?;
    println!(
        "evaluated {} rows under the {} protocol -> {}",
        n_rows,
        match config.evaluate.protocol {
            Protocol::GroundTruth => "ground_truth",
            Protocol::Insdel => "insdel",
        },
        out.join(RESULTS_FILE).display()
    );
    Ok(())
}

fn fmt_stat(v: Option<f64>) -> String {
    v.map_or("undefined".to_string(), |v| format!("{v:.4}"))
}

fn summary_text(results: &ResultsFile) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "model: {} + {}\nprotocol: {}\nseed: {}\n\n",
        results.config.model.encoder.as_str(),
        results.config.model.decoder.as_str(),
        match results.protocol {
            Protocol::GroundTruth => "ground_truth",
            Protocol::Insdel => "insdel",
        },
        results.config.seed
    ));
    s.push_str(&format!(
        "{:<22} {:<22} {:>12} {:>12} {:>6}\n",
        "method", "metric", "median", "std", "n"
    ));
    s.push_str(&format!("{}\n", "-".repeat(78)));
    for a in &results.aggregates {
        s.push_str(&format!(
            "{:<22} {:<22} {:>12} {:>12} {:>6}\n",
            a.method,
            a.metric,
            fmt_stat(a.median),
            fmt_stat(a.std),
            a.count
        ));
    }
    s
}

/// Pointwise mean of a set of curves on a fixed fraction grid.
fn mean_on_grid(curves: &[&Curve], grid: &[f64]) -> Option<Vec<f64>> {
    if curves.is_empty() {
        return None;
    }
    Some(
        grid.iter()
            .map(|&x| curves.iter().map(|c| c.value_at(x)).sum::<f64>() / curves.len() as f64)
            .collect(),
    )
}

fn curve_charts(curves: &CurvesFile, methods: &[ExplainerKind]) -> Vec<(String, String)> {
    let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    let mut charts = Vec::new();
    for subject in [Subject::Edges, Subject::Features] {
        for kind in [CurveKind::Insertion, CurveKind::Deletion] {
            let of = |source: CurveSource| -> Vec<&Curve> {
                curves
                    .records
                    .iter()
                    .filter(|r| {
                        r.curve.subject == subject && r.curve.kind == kind && r.source == source
                    })
                    .map(|r| &r.curve)
                    .collect()
            };
            let mut series = Vec::new();
            for (i, &method) in methods.iter().enumerate() {
                if let Some(ys) = mean_on_grid(&of(CurveSource::Explainer(method)), &grid) {
                    series.push(Series {
                        label: method.as_str().to_string(),
                        color: plot::PALETTE[i % plot::PALETTE.len()].to_string(),
                        dashed: false,
                        xs: grid.clone(),
                        ys,
                    });
                }
            }
            if let Some(ys) = mean_on_grid(&of(CurveSource::RandomBaseline), &grid) {
                series.push(Series {
                    label: "random baseline".to_string(),
                    color: "#7f7f7f".to_string(),
                    dashed: true,
                    xs: grid.clone(),
                    ys,
                });
            }
            if series.is_empty() {
                continue;
            }
            let (subject_name, kind_name) = (
                match subject {
                    Subject::Edges => "edges",
                    Subject::Features => "features",
                },
                match kind {
                    CurveKind::Insertion => "insertion",
                    CurveKind::Deletion => "deletion",
                },
            );
            let svg = plot::line_chart(
                &format!("{subject_name}: {kind_name}"),
                &format!("fraction of {subject_name}"),
                "model output",
                &series,
            );
            charts.push((format!("curves_{subject_name}_{kind_name}.svg"), svg));
        }
    }
    charts
}

fn score_boxes(results: &ResultsFile) -> Vec<(String, String)> {
    let mut charts = Vec::new();
    if let Some(rows) = &results.gt_rows {
        let picks: [(&str, fn(&GtRow) -> Option<f64>); 2] = [
            ("sensitivity", |r| r.combined.sensitivity),
            ("specificity", |r| r.combined.specificity),
        ];
        for (name, pick) in picks {
            let groups: Vec<(String, Vec<f64>)> = methods_present(rows, |r: &GtRow| r.method)
                .into_iter()
                .map(|m| {
                    let values =
                        rows.iter().filter(|r| r.method == m).filter_map(pick).collect();
                    (m.as_str().to_string(), values)
                })
                .collect();
            let svg = plot::box_plot(&format!("{name} by method"), name, &groups);
            charts.push((format!("scores_{name}.svg"), svg));
        }
    }
    if let Some(rows) = &results.insdel_rows {
        let picks: [(&str, fn(&InsdelRow) -> f64); 4] = [
            ("edge_insertion", |r| r.edge_insertion.score),
            ("edge_deletion", |r| r.edge_deletion.score),
            ("feature_insertion", |r| r.feature_insertion.score),
            ("feature_deletion", |r| r.feature_deletion.score),
        ];
        for (name, pick) in picks {
            let groups: Vec<(String, Vec<f64>)> = methods_present(rows, |r: &InsdelRow| r.method)
                .into_iter()
                .map(|m| {
                    let values = rows.iter().filter(|r| r.method == m).map(pick).collect();
                    (m.as_str().to_string(), values)
                })
                .collect();
            let svg = plot::box_plot(&format!("{name} area score by method"), "area score", &groups);
            charts.push((format!("scores_{name}.svg"), svg));
        }
    }
    charts
}

/// Renders the plain-text summary and the SVG plots from stored results.
pub fn cmd_report(config: &RunConfig) -> Result<()> {
    let out = config.out_dir();
    let results: ResultsFile = io::read_json(&out.join(RESULTS_FILE))?;
    if results.aggregates.is_empty() {
        bail!("results in {} contain no aggregates; nothing to report", out.display());
    }

    io::write_text(&out.join(SUMMARY_FILE), &summary_text(&results))?;
    let mut written = vec![SUMMARY_FILE.to_string()];

    let mut charts = score_boxes(&results);
    if results.protocol == Protocol::Insdel {
        let curves: CurvesFile = io::read_json(&out.join(CURVES_FILE))?;
        let methods = methods_present(
            results.insdel_rows.as_deref().unwrap_or(&[]),
            |r: &InsdelRow| r.method,
        );
        charts.extend(curve_charts(&curves, &methods));
    }
    for (name, svg) in charts {
        io::write_text(&out.join(&name), &svg)?;
        written.push(name);
    }

    println!("report: wrote {} in {}", written.join(", "), out.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{DatasetConfig, EvaluateConfig, SplitConfig, TrainingConfig};
    use lpx_core::{DecoderKind, EncoderKind, ModelConfig};
    use std::path::PathBuf;

    fn tiny_config(out: PathBuf) -> RunConfig {
        RunConfig {
            seed: 11,
            out: Some(out),
            dataset: DatasetConfig::Sbm {
                block_sizes: vec![8, 8],
                p_in: 0.8,
                p_out: 0.05,
            },
            split: SplitConfig { test_fraction: 0.2 },
            model: ModelConfig {
                hidden_dim: 8,
                embed_dim: 4,
                ..ModelConfig::new(EncoderKind::Gin, DecoderKind::InnerProduct)
            },
            training: TrainingConfig { epochs: 30, lr: 0.005, ..TrainingConfig::default() },
            explain: crate::config::ExplainConfig {
                methods: vec![ExplainerKind::IntegratedGradients, ExplainerKind::Random],
                ig_steps: 8,
                max_targets: Some(4),
                ..crate::config::ExplainConfig::default()
            },
            evaluate: EvaluateConfig { realizations: 5, ..EvaluateConfig::default() },
        }
    }

    #[test]
    fn full_pipeline_round_trips_through_the_filesystem() {
        let dir = tempfile::tempdir().unwrap();
        let config = tiny_config(dir.path().to_path_buf());

        cmd_generate(&config).unwrap();
        let split: SplitFile = io::read_json(&dir.path().join(SPLIT_FILE)).unwrap();
        assert!(!split.test_pos.is_empty());
        assert_eq!(split.test_pos.len(), split.test_neg.len());

        cmd_train(&config).unwrap();
        let model = load_model(dir.path(), &config).unwrap();
        assert_eq!(model.config, config.model);
        assert!(model.meta.unwrap().final_loss.is_finite());

        cmd_explain(&config).unwrap();
        let attrs: AttributionsFile =
            io::read_json(&dir.path().join(ATTRIBUTIONS_FILE)).unwrap();
        let explained = 4 - attrs.skipped.len();
        assert_eq!(attrs.records.len(), 2 * explained);

        cmd_evaluate(&config).unwrap();
        let results: ResultsFile = io::read_json(&dir.path().join(RESULTS_FILE)).unwrap();
        assert!(results.gt_rows.is_some());
        assert!(!results.aggregates.is_empty());

        cmd_report(&config).unwrap();
        let summary = std::fs::read_to_string(dir.path().join(SUMMARY_FILE)).unwrap();
        assert!(summary.contains("integrated_gradients"));
        assert!(dir.path().join("scores_sensitivity.svg").exists());
    }

    #[test]
    fn insdel_protocol_writes_curves_and_charts() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = tiny_config(dir.path().to_path_buf());
        config.evaluate.protocol = Protocol::Insdel;

        cmd_generate(&config).unwrap();
        cmd_train(&config).unwrap();
        cmd_explain(&config).unwrap();
        cmd_evaluate(&config).unwrap();
        let curves: CurvesFile = io::read_json(&dir.path().join(CURVES_FILE)).unwrap();
        assert!(!curves.records.is_empty());

        cmd_report(&config).unwrap();
        for name in
            ["curves_edges_insertion.svg", "curves_features_deletion.svg", "scores_edge_insertion.svg"]
        {
            assert!(dir.path().join(name).exists(), "missing {name}");
        }
        let svg =
            std::fs::read_to_string(dir.path().join("curves_edges_insertion.svg")).unwrap();
        // Two methods plus the shared random baseline.
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert!(svg.contains("fraction of edges"));
        assert!(svg.contains("model output"));
    }

    #[test]
    fn ground_truth_protocol_refuses_file_datasets() {
        let dir = tempfile::tempdir().unwrap();
        let graph_path = dir.path().join("in_graph.txt");
        let features_path = dir.path().join("in_features.txt");
        std::fs::write(&graph_path, "nodes 5\n0 1\n1 2\n2 3\n3 4\n0 2\n").unwrap();
        std::fs::write(
            &features_path,
            "1 0 0 0 0\n0 1 0 0 0\n0 0 1 0 0\n0 0 0 1 0\n0 0 0 0 1\n",
        )
        .unwrap();

        let mut config = tiny_config(dir.path().to_path_buf());
        config.dataset =
            DatasetConfig::Files { graph: graph_path, features: features_path };
        config.split.test_fraction = 0.3;
        config.explain.max_targets = None;

        cmd_generate(&config).unwrap();
        cmd_train(&config).unwrap();
        cmd_explain(&config).unwrap();
        let err = cmd_evaluate(&config).unwrap_err().to_string();
        assert!(err.contains("no ground truth"), "error was: {err}");

        config.evaluate.protocol = Protocol::Insdel;
        cmd_evaluate(&config).unwrap();
        cmd_report(&config).unwrap();
    }

    #[test]
    fn train_without_generate_names_the_missing_file() {
        let dir = tempfile::tempdir().unwrap();
        let config = tiny_config(dir.path().to_path_buf());
        let err = cmd_train(&config).unwrap_err();
        assert!(format!("{err:#}").contains(SPLIT_FILE), "error was: {err:#}");
    }

    #[test]
    fn explain_rejects_a_checkpoint_for_a_different_model() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = tiny_config(dir.path().to_path_buf());
        cmd_generate(&config).unwrap();
        cmd_train(&config).unwrap();

        config.model.decoder = DecoderKind::Cosine;
        let err = cmd_explain(&config).unwrap_err().to_string();
        assert!(err.contains("different model configuration"), "error was: {err}");
    }
}
