//! Artifact persistence: file formats, schemas, and deterministic writers.
//!
//! Every structured artifact embeds the resolved run configuration and the
//! tool version, so any file on disk identifies the run that produced it.
//! Floats are serialized with 17 significant digits, which round-trips
//! `f64` exactly and keeps repeated runs byte-identical.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter, Serializer};

use lpx_core::{
    Attribution, CurveRecord, Edge, GeneratorKind, GtRow, InsdelRow, Mat, ModelConfig, TrainMeta,
    TrainedModel,
};

use crate::config::{Protocol, RunConfig};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Formats a float with 17 significant digits (scientific notation), the
/// shortest width that is lossless for every `f64`.
pub fn fmt_f64(value: f64) -> String {
    format!("{value:.16e}")
}

/// Pretty JSON with the lossless float format above.
struct SciFormatter<'a> {
    inner: PrettyFormatter<'a>,
}

impl Formatter for SciFormatter<'_> {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W>(&mut self, w: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.begin_array(w)
    }

    fn end_array<W>(&mut self, w: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.end_array(w)
    }

    fn begin_array_value<W>(&mut self, w: &mut W, first: bool) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.begin_array_value(w, first)
    }

    fn end_array_value<W>(&mut self, w: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.end_array_value(w)
    }

    fn begin_object<W>(&mut self, w: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.begin_object(w)
    }

    fn end_object<W>(&mut self, w: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.end_object(w)
    }

    fn begin_object_key<W>(&mut self, w: &mut W, first: bool) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.begin_object_key(w, first)
    }

    fn begin_object_value<W>(&mut self, w: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.begin_object_value(w)
    }

    fn end_object_value<W>(&mut self, w: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.end_object_value(w)
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let formatter = SciFormatter { inner: PrettyFormatter::new() };
    let mut ser = Serializer::with_formatter(&mut out, formatter);
    value.serialize(&mut ser).context("cannot serialize to JSON")?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &to_json_string(value)?)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("invalid contents in {}", path.display()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub fn ensure_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path)
        .with_context(|| format!("cannot create directory {}", path.display()))
}

/// Renders the line-oriented graph format: comments, a `nodes <N>` header,
/// then one `u v` pair per line.
pub fn graph_to_string(num_nodes: usize, edges: &[Edge]) -> String {
    let mut s = String::new();
    s.push_str(&format!("# undirected graph, written by lpx {TOOL_VERSION}\n"));
    s.push_str(&format!("nodes {num_nodes}\n"));
    for (u, v) in edges {
        s.push_str(&format!("{u} {v}\n"));
    }
    s
}

pub fn parse_graph(text: &str) -> Result<(usize, Vec<Edge>)> {
    let mut num_nodes = None;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let lineno = idx + 1;
        if num_nodes.is_none() {
            let rest = line
                .strip_prefix("nodes")
                .with_context(|| format!("line {lineno}: expected `nodes <N>` header, got `{line}`"))?;
            let n: usize = rest
                .trim()
                .parse()
                .with_context(|| format!("line {lineno}: invalid node count `{}`", rest.trim()))?;
            num_nodes = Some(n);
            continue;
        }
        let mut parts = line.split_whitespace();
        let (u, v) = match (parts.next(), parts.next(), parts.next()) {
            (Some(u), Some(v), None) => (u, v),
            _ => bail!("line {lineno}: expected `u v`, got `{line}`"),
        };
        let u: usize = u.parse().with_context(|| format!("line {lineno}: invalid node id `{u}`"))?;
        let v: usize = v.parse().with_context(|| format!("line {lineno}: invalid node id `{v}`"))?;
        edges.push((u, v));
    }
    let num_nodes = num_nodes.context("graph file has no `nodes <N>` header")?;
    Ok((num_nodes, edges))
}

/// Renders the feature matrix, one node per row, space-separated.
pub fn features_to_string(features: &Mat) -> String {
    let mut s = String::new();
    for row in features.rows() {
        let cells: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
        s.push_str(&cells.join(" "));
        s.push('\n');
    }
    s
}

pub fn parse_features(text: &str) -> Result<Mat> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|cell| {
                cell.parse::<f64>()
                    .with_context(|| format!("line {lineno}: invalid value `{cell}`"))
            })
            .collect::<Result<_>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                bail!(
                    "line {lineno}: row has {} values, expected {}",
                    row.len(),
                    first.len()
                );
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("feature file has no rows");
    }
    let (n, f) = (rows.len(), rows[0].len());
    Mat::from_shape_vec((n, f), rows.into_iter().flatten().collect())
        .context("cannot assemble feature matrix")
}

/// Side information accompanying `graph.txt` / `features.txt`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetFile {
    pub tool_version: String,
    pub config: RunConfig,
    /// Absent when the graph was loaded from files rather than generated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<GeneratorKind>,
    pub num_nodes: usize,
    pub num_edges: usize,
    pub num_features: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<usize>>,
    pub random_edges: Vec<Edge>,
}

/// Train/test edge split in original node ids.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitFile {
    pub tool_version: String,
    pub config: RunConfig,
    pub seed: u64,
    pub num_nodes: usize,
    pub train_edges: Vec<Edge>,
    pub test_pos: Vec<Edge>,
    pub test_neg: Vec<Edge>,
}

/// One named parameter matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamArray {
    pub shape: [usize; 2],
    pub data: Vec<f64>,
}

impl ParamArray {
    pub fn from_mat(m: &Mat) -> ParamArray {
        ParamArray {
            shape: [m.nrows(), m.ncols()],
            data: m.iter().copied().collect(),
        }
    }

    pub fn to_mat(&self) -> Result<Mat> {
        Mat::from_shape_vec((self.shape[0], self.shape[1]), self.data.clone()).with_context(|| {
            format!(
                "parameter data has {} values, shape {}x{} needs {}",
                self.data.len(),
                self.shape[0],
                self.shape[1],
                self.shape[0] * self.shape[1]
            )
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointFile {
    pub tool_version: String,
    pub config: RunConfig,
    pub model: ModelConfig,
    pub num_features: usize,
    pub params: BTreeMap<String, ParamArray>,
    pub meta: TrainMeta,
}

impl CheckpointFile {
    pub fn from_model(config: &RunConfig, model: &TrainedModel) -> Result<CheckpointFile> {
        let meta = model
            .meta
            .clone()
            .context("model carries no training record; cannot checkpoint")?;
        Ok(CheckpointFile {
            tool_version: TOOL_VERSION.to_string(),
            config: config.clone(),
            model: model.config.clone(),
            num_features: model.num_features,
            params: model
                .parameters()
                .iter()
                .map(|(k, m)| (k.clone(), ParamArray::from_mat(m)))
                .collect(),
            meta,
        })
    }

    pub fn to_model(&self) -> Result<TrainedModel> {
        let params = self
            .params
            .iter()
            .map(|(k, p)| Ok((k.clone(), p.to_mat()?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        let mut model = TrainedModel::from_parameters(self.model.clone(), self.num_features, params)
            .context("checkpoint parameters do not fit the model configuration")?;
        model.meta = Some(self.meta.clone());
        Ok(model)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsFile {
    pub tool_version: String,
    pub config: RunConfig,
    pub meta: TrainMeta,
}

/// A test edge the explainer refused, with the reason.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkippedTarget {
    pub target: Edge,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttributionsFile {
    pub tool_version: String,
    pub config: RunConfig,
    pub records: Vec<Attribution>,
    pub skipped: Vec<SkippedTarget>,
}

/// Median ± sample standard deviation of one metric for one method.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Aggregate {
    pub method: String,
    pub metric: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub median: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std: Option<f64>,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultsFile {
    pub tool_version: String,
    pub config: RunConfig,
    pub protocol: Protocol,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gt_rows: Option<Vec<GtRow>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub insdel_rows: Option<Vec<InsdelRow>>,
    pub aggregates: Vec<Aggregate>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvesFile {
    pub tool_version: String,
    pub config: RunConfig,
    pub records: Vec<CurveRecord>,
}
