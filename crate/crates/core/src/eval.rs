//! Evaluation of link predictors and their explanations.
//!
//! `roc_auc` ranks positive against negative scores and backs the model
//! quality numbers. Attribution quality is measured two ways: agreement
//! with synthetic ground truth (sensitivity and specificity after
//! binarization) and perturbation curves, where scope edges or features are
//! inserted or deleted in score order and the prediction's response is
//! integrated into a single signed area score against a random baseline.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::explain::{receptive_hops, Attribution, ExplainerKind};
use crate::graph::{canonical, k_hop_subgraph, Edge, Graph};
use crate::model::TrainedModel;
use crate::rng::{derive_seed, rng_from};
use crate::synth::{GroundTruth, LabeledGraph};
use crate::tensor::{Mat, Tape};

/// Stream tag for random-baseline shuffles.
const SEED_BASELINE: u64 = 5;

/// Area under the ROC curve via the rank-sum statistic; ties get midranks.
pub fn roc_auc(pos: &[f64], neg: &[f64]) -> Result<f64> {
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::InvalidArgument(
            "roc_auc needs at least one positive and one negative score".into(),
        ));
    }
    if pos.iter().chain(neg).any(|v| v.is_nan()) {
        return Err(Error::InvalidArgument("roc_auc scores must not be NaN".into()));
    }

    let mut all: Vec<(f64, bool)> = pos
        .iter()
        .map(|&s| (s, true))
        .chain(neg.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j < all.len() && all[j].0 == all[i].0 {
            j += 1;
        }
        // 1-based ranks i+1 ..= j share the midrank.
        let midrank = (i + 1 + j) as f64 / 2.0;
        rank_sum += midrank * all[i..j].iter().filter(|e| e.1).count() as f64;
        i = j;
    }

    let np = pos.len() as f64;
    let nn = neg.len() as f64;
    Ok((rank_sum - np * (np + 1.0) / 2.0) / (np * nn))
}

/// How attribution scores are turned into binary importance decisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdRule {
    /// 0.5 for mask-valued scores, 0 for signed scores; the boundary itself
    /// counts as unimportant.
    Fixed,
    /// Per-mask threshold maximising TPR - FPR (Youden) against the ground
    /// truth; elements at the chosen threshold count as important.
    RocOptimal,
}

/// Binarized importance decisions for one attribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMasks {
    pub edges: Vec<bool>,
    pub features: Vec<bool>,
}

/// Threshold with the best Youden index under the rule `score >= t`,
/// including the empty selection (`t = +inf`); ties prefer the sparser mask.
fn youden_threshold(scores: &[f64], truth: &[bool]) -> Result<f64> {
    let pos = truth.iter().filter(|&&b| b).count();
    let neg = truth.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::Degenerate(format!(
            "optimal threshold undefined: ground truth is all {}",
            if pos == 0 { "negative" } else { "positive" }
        )));
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let (mut tp, mut fp) = (0usize, 0usize);
    let mut best = (0.0, f64::INFINITY);
    let mut k = 0;
    while k < idx.len() {
        let t = scores[idx[k]];
        while k < idx.len() && scores[idx[k]] == t {
            if truth[idx[k]] {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        let j = tp as f64 / pos as f64 - fp as f64 / neg as f64;
        if j > best.0 {
            best = (j, t);
        }
    }
    Ok(best.1)
}

/// Binarize an attribution against its ground truth.
///
/// Both structures must describe the same target over the same scope. With
/// [`ThresholdRule::RocOptimal`] the edge and feature masks each get their
/// own threshold; a mask whose truth has only one class is refused, since
/// its ROC curve is degenerate.
pub fn binarize(attr: &Attribution, truth: &GroundTruth, rule: ThresholdRule) -> Result<BinaryMasks> {
    if canonical(attr.target) != canonical(truth.target) {
        return Err(Error::InvalidArgument(format!(
            "attribution explains {:?} but ground truth describes {:?}",
            attr.target, truth.target
        )));
    }
    if attr.scope_edges != truth.scope_edges {
        return Err(Error::InvalidArgument(format!(
            "attribution and ground-truth scopes differ for target {:?}",
            attr.target
        )));
    }
    if attr.feature_scores.len() != truth.feature_mask.len() {
        return Err(Error::InvalidArgument(format!(
            "attribution scores {} feature columns, ground truth {}",
            attr.feature_scores.len(),
            truth.feature_mask.len()
        )));
    }
    if attr
        .edge_scores
        .iter()
        .chain(&attr.feature_scores)
        .any(|v| !v.is_finite())
    {
        return Err(Error::InvalidArgument(format!(
            "attribution for {:?} contains non-finite scores",
            attr.target
        )));
    }

    let masks = match rule {
        ThresholdRule::Fixed => {
            let t = if attr.signed { 0.0 } else { 0.5 };
            BinaryMasks {
                edges: attr.edge_scores.iter().map(|&s| s > t).collect(),
                features: attr.feature_scores.iter().map(|&s| s > t).collect(),
            }
        }
        ThresholdRule::RocOptimal => {
            let te = youden_threshold(&attr.edge_scores, &truth.edge_mask)?;
            let tf = youden_threshold(&attr.feature_scores, &truth.feature_mask)?;
            BinaryMasks {
                edges: attr.edge_scores.iter().map(|&s| s >= te).collect(),
                features: attr.feature_scores.iter().map(|&s| s >= tf).collect(),
            }
        }
    };
    Ok(masks)
}

/// Classification counts of predicted vs true importance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub true_pos: usize,
    pub false_pos: usize,
    pub true_neg: usize,
    pub false_neg: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.true_pos + self.false_pos + self.true_neg + self.false_neg
    }

    /// Element-wise sum, for pooling edge and feature decisions.
    pub fn combined(&self, other: &ConfusionMatrix) -> ConfusionMatrix {
        ConfusionMatrix {
            true_pos: self.true_pos + other.true_pos,
            false_pos: self.false_pos + other.false_pos,
            true_neg: self.true_neg + other.true_neg,
            false_neg: self.false_neg + other.false_neg,
        }
    }

    /// Retrieval metrics; a zero denominator yields `None`, never a fake 0.
    pub fn metrics(&self) -> GtMetrics {
        let ratio = |num: usize, den: usize| {
            if den == 0 {
                None
            } else {
                Some(num as f64 / den as f64)
            }
        };
        let sensitivity = ratio(self.true_pos, self.true_pos + self.false_neg);
        GtMetrics {
            sensitivity,
            specificity: ratio(self.true_neg, self.true_neg + self.false_pos),
            precision: ratio(self.true_pos, self.true_pos + self.false_pos),
            recall: sensitivity,
        }
    }
}

/// Count agreement between a predicted mask and the true one.
pub fn confusion(pred: &[bool], truth: &[bool]) -> Result<ConfusionMatrix> {
    if pred.len() != truth.len() {
        return Err(Error::InvalidArgument(format!(
            "confusion needs equal lengths, got {} predictions for {} truths",
            pred.len(),
            truth.len()
        )));
    }
    let mut cm = ConfusionMatrix::default();
    for (&p, &t) in pred.iter().zip(truth) {
        match (p, t) {
            (true, true) => cm.true_pos += 1,
            (true, false) => cm.false_pos += 1,
            (false, false) => cm.true_neg += 1,
            (false, true) => cm.false_neg += 1,
        }
    }
    Ok(cm)
}

/// Ground-truth agreement metrics; `recall` duplicates `sensitivity` under
/// its retrieval name.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GtMetrics {
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
}

/// Direction of a perturbation curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Insertion,
    Deletion,
}

/// What gets perturbed: scope edges or feature columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subject {
    Edges,
    Features,
}

/// Model output as a function of the fraction of elements perturbed.
/// `xs` runs from 0 to 1 inclusive; `ys` are target-pair probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub kind: CurveKind,
    pub subject: Subject,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl Curve {
    /// Linear interpolation between samples, clamped to the end values.
    pub fn value_at(&self, x: f64) -> f64 {
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= *self.xs.last().unwrap() {
            return *self.ys.last().unwrap();
        }
        let k = self.xs.partition_point(|&v| v <= x);
        let (x0, x1) = (self.xs[k - 1], self.xs[k]);
        let (y0, y1) = (self.ys[k - 1], self.ys[k]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

/// Default perturbation granularity: one element at a time while exact
/// evaluation is cheap, 5% batches on large scopes.
pub fn default_step(count: usize) -> usize {
    if count <= 200 {
        1
    } else {
        (count as f64 * 0.05).ceil() as usize
    }
}

/// Indices sorted by descending score; ties broken by ascending index so
/// rankings are total and deterministic.
pub fn rank_descending(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx
}

/// The target's scope graph plus everything needed to re-run predictions.
struct PerturbCtx {
    edges: Arc<Vec<Edge>>,
    features: Mat,
    local_target: Edge,
}

fn perturb_ctx(model: &TrainedModel, g: &Graph, target: Edge) -> Result<PerturbCtx> {
    let (i, j) = canonical(target);
    if i == j || j >= g.num_nodes() {
        return Err(Error::InvalidArgument(format!(
            "invalid perturbation target ({i}, {j})"
        )));
    }
    let hops = receptive_hops(&model.config);
    let scope = k_hop_subgraph(g, &[i, j], hops)?;
    if scope.graph.num_edges() == 0 {
        return Err(Error::Degenerate(format!(
            "no edges within {hops} hops of ({i}, {j}); nothing to perturb"
        )));
    }
    let local_target = (
        scope.local(i).expect("seed node is always in its own scope"),
        scope.local(j).expect("seed node is always in its own scope"),
    );
    Ok(PerturbCtx {
        edges: scope.graph.edges_arc(),
        features: scope.graph.features().clone(),
        local_target,
    })
}

fn predict_perturbed(model: &TrainedModel, ctx: &PerturbCtx, x: &Mat, w: &Mat) -> Result<f64> {
    let mut tape = Tape::new();
    let xv = tape.constant(x.clone());
    let wv = tape.constant(w.clone());
    let p = model.forward(&mut tape, &ctx.edges, xv, wv, &[ctx.local_target])?;
    Ok(tape.scalar(p))
}

fn check_order(order: &[usize], count: usize, what: &str) -> Result<()> {
    let mut seen = vec![false; count];
    if order.len() != count {
        return Err(Error::InvalidArgument(format!(
            "perturbation order ranks {} {what} but the scope has {count}",
            order.len()
        )));
    }
    for &k in order {
        if k >= count || seen[k] {
            return Err(Error::InvalidArgument(format!(
                "perturbation order is not a permutation of the {count} scope {what}"
            )));
        }
        seen[k] = true;
    }
    Ok(())
}

/// Trace the model output while elements are zeroed (deletion) or restored
/// (insertion) in the given rank order, `step` elements per batch.
///
/// Deleting an edge sets its weight to zero; deleting a feature zeroes its
/// column across the scope. The opposite subject keeps its full values, so
/// insertion at x=1 and deletion at x=0 both equal the unperturbed output.
pub fn perturbation_curve(
    model: &TrainedModel,
    g: &Graph,
    target: Edge,
    order: &[usize],
    kind: CurveKind,
    subject: Subject,
    step: usize,
) -> Result<Curve> {
    if step == 0 {
        return Err(Error::InvalidArgument("perturbation step must be >= 1".into()));
    }
    let ctx = perturb_ctx(model, g, target)?;
    let full_x = ctx.features.clone();
    let full_w = Mat::ones((ctx.edges.len(), 1));
    let count = match subject {
        Subject::Edges => ctx.edges.len(),
        Subject::Features => full_x.ncols(),
    };
    check_order(
        order,
        count,
        match subject {
            Subject::Edges => "edges",
            Subject::Features => "feature columns",
        },
    )?;

    let (mut x, mut w) = match kind {
        CurveKind::Deletion => (full_x.clone(), full_w.clone()),
        CurveKind::Insertion => match subject {
            Subject::Edges => (full_x.clone(), Mat::zeros(full_w.raw_dim())),
            Subject::Features => (Mat::zeros(full_x.raw_dim()), full_w.clone()),
        },
    };

    let mut xs = vec![0.0];
    let mut ys = vec![predict_perturbed(model, &ctx, &x, &w)?];
    let mut done = 0usize;
    for batch in order.chunks(step) {
        for &k in batch {
            match (kind, subject) {
                (CurveKind::Deletion, Subject::Edges) => w[(k, 0)] = 0.0,
                (CurveKind::Deletion, Subject::Features) => x.column_mut(k).fill(0.0),
                (CurveKind::Insertion, Subject::Edges) => w[(k, 0)] = 1.0,
                (CurveKind::Insertion, Subject::Features) => {
                    x.column_mut(k).assign(&full_x.column(k))
                }
            }
        }
        done += batch.len();
        xs.push(done as f64 / count as f64);
        ys.push(predict_perturbed(model, &ctx, &x, &w)?);
    }
    Ok(Curve { kind, subject, xs, ys })
}

/// Average perturbation curve over uniformly shuffled orders.
///
/// The shuffle stream depends on the seed, target, and subject — but not on
/// the direction — so insertion and deletion baselines for one target are
/// averaged over the same set of orders.
pub fn random_baseline(
    model: &TrainedModel,
    g: &Graph,
    target: Edge,
    kind: CurveKind,
    subject: Subject,
    realizations: usize,
    step: usize,
    seed: u64,
) -> Result<Curve> {
    if realizations == 0 {
        return Err(Error::InvalidArgument(
            "random baseline needs at least one realization".into(),
        ));
    }
    let ctx = perturb_ctx(model, g, target)?;
    let count = match subject {
        Subject::Edges => ctx.edges.len(),
        Subject::Features => ctx.features.ncols(),
    };
    let (ti, tj) = canonical(target);
    let mut rng = rng_from(derive_seed(
        seed,
        &[ti as u64, tj as u64, SEED_BASELINE, subject as u64],
    ));

    use rand::seq::SliceRandom;
    let mut mean: Option<Curve> = None;
    for _ in 0..realizations {
        let mut order: Vec<usize> = (0..count).collect();
        order.shuffle(&mut rng);
        let curve = perturbation_curve(model, g, target, &order, kind, subject, step)?;
        match &mut mean {
            None => mean = Some(curve),
            Some(m) => {
                for (acc, y) in m.ys.iter_mut().zip(&curve.ys) {
                    *acc += y;
                }
            }
        }
    }
    let mut curve = mean.expect("realizations >= 1");
    for y in &mut curve.ys {
        *y /= realizations as f64;
    }
    Ok(curve)
}

/// Areas between an explainer curve and the random baseline.
///
/// `a_plus`/`a_minus` integrate where the explainer runs above/below the
/// baseline; `u`/`l` are the baseline's headroom to the output ceiling 1 and
/// floor 0. The score normalises each side by the room available to it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaScore {
    pub a_plus: f64,
    pub a_minus: f64,
    pub u: f64,
    pub l: f64,
    pub score: f64,
    pub mode: CurveKind,
}

fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| (x[1] - x[0]) * (y[0] + y[1]) / 2.0)
        .sum()
}

/// Signed area score of an explainer curve against a baseline on a shared
/// grid. Insertion rewards running above the baseline, deletion below; the
/// two modes are exact negations of each other. A 0/0 ratio counts as 0.
pub fn area_score(explainer: &Curve, baseline: &Curve, mode: CurveKind) -> Result<AreaScore> {
    if explainer.xs != baseline.xs {
        return Err(Error::InvalidArgument(
            "area score needs curves sampled on the same grid".into(),
        ));
    }
    let above: Vec<f64> = explainer
        .ys
        .iter()
        .zip(&baseline.ys)
        .map(|(&e, &r)| (e - r).max(0.0))
        .collect();
    let below: Vec<f64> = explainer
        .ys
        .iter()
        .zip(&baseline.ys)
        .map(|(&e, &r)| (r - e).max(0.0))
        .collect();
    let headroom: Vec<f64> = baseline.ys.iter().map(|&r| 1.0 - r).collect();

    let a_plus = trapezoid(&explainer.xs, &above);
    let a_minus = trapezoid(&explainer.xs, &below);
    let u = trapezoid(&explainer.xs, &headroom);
    let l = trapezoid(&explainer.xs, &baseline.ys);

    let ratio = |a: f64, b: f64| if a == 0.0 && b == 0.0 { 0.0 } else { a / b };
    let s_ins = ratio(a_plus, u) - ratio(a_minus, l);
    let score = match mode {
        CurveKind::Insertion => s_ins,
        CurveKind::Deletion => -s_ins,
    };
    Ok(AreaScore { a_plus, a_minus, u, l, score, mode })
}

/// Median of a sample; `None` when empty. Even sizes average the middle two.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    })
}

/// Sample standard deviation (n − 1 denominator); `None` below two values.
pub fn sample_std(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Some(var.sqrt())
}

/// Ground-truth agreement for one (explainer, target) pair. `combined`
/// pools the edge and feature decisions into a single confusion matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GtRow {
    pub target: Edge,
    pub method: ExplainerKind,
    pub edges: GtMetrics,
    pub features: GtMetrics,
    pub combined: GtMetrics,
}

/// Compare attributions against generator ground truth.
///
/// `hops` must match the receptive field the attributions were computed
/// with, so scopes line up. Targets the ground truth refuses (cross-block,
/// no common neighbour) are skipped, as are targets whose truth has only
/// one class when the threshold rule needs a ROC curve.
pub fn evaluate_ground_truth(
    data: &LabeledGraph,
    hops: usize,
    attrs: &[Attribution],
    rule: ThresholdRule,
) -> Result<Vec<GtRow>> {
    if attrs.is_empty() {
        return Err(Error::InvalidArgument("no attributions to evaluate".into()));
    }
    let mut rows = Vec::new();
    for attr in attrs {
        let truth = match data.ground_truth(attr.target, hops) {
            Ok(t) => t,
            Err(Error::RefusedTarget(_, _)) => continue,
            Err(e) => return Err(e),
        };
        let masks = match binarize(attr, &truth, rule) {
            Ok(m) => m,
            Err(Error::Degenerate(_)) => continue,
            Err(e) => return Err(e),
        };
        let edge_cm = confusion(&masks.edges, &truth.edge_mask)?;
        let feat_cm = confusion(&masks.features, &truth.feature_mask)?;
        rows.push(GtRow {
            target: canonical(attr.target),
            method: attr.method,
            edges: edge_cm.metrics(),
            features: feat_cm.metrics(),
            combined: edge_cm.combined(&feat_cm).metrics(),
        });
    }
    Ok(rows)
}

/// Insertion/deletion area scores for one (explainer, target) pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InsdelRow {
    pub target: Edge,
    pub method: ExplainerKind,
    pub edge_insertion: AreaScore,
    pub edge_deletion: AreaScore,
    pub feature_insertion: AreaScore,
    pub feature_deletion: AreaScore,
}

/// Settings for the insertion/deletion protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InsdelConfig {
    /// Shuffled orders averaged into the random baseline.
    #[serde(default = "default_realizations")]
    pub realizations: usize,
    /// Batch size per curve step; `None` picks [`default_step`] per scope.
    #[serde(default)]
    pub step: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

fn default_realizations() -> usize {
    50
}

impl Default for InsdelConfig {
    fn default() -> Self {
        InsdelConfig { realizations: default_realizations(), step: None, seed: 0 }
    }
}

/// Who produced a stored curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveSource {
    Explainer(ExplainerKind),
    RandomBaseline,
}

/// One curve kept for reporting, tagged with its target and origin.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveRecord {
    pub target: Edge,
    pub source: CurveSource,
    pub curve: Curve,
}

/// Result table plus every curve behind it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InsdelReport {
    pub rows: Vec<InsdelRow>,
    pub curves: Vec<CurveRecord>,
}

/// Run the insertion/deletion protocol for a batch of attributions.
///
/// Attributions are grouped by target so all methods for one target are
/// scored against the same random baselines. `g` must be the graph the
/// model message-passes over (the training graph), matching the scope the
/// attributions were computed on.
pub fn evaluate_insdel(
    model: &TrainedModel,
    g: &Graph,
    attrs: &[Attribution],
    cfg: &InsdelConfig,
) -> Result<InsdelReport> {
    if attrs.is_empty() {
        return Err(Error::InvalidArgument("no attributions to evaluate".into()));
    }
    if cfg.realizations == 0 {
        return Err(Error::InvalidArgument(
            "random baseline needs at least one realization".into(),
        ));
    }

    let mut by_target: BTreeMap<Edge, Vec<&Attribution>> = BTreeMap::new();
    for attr in attrs {
        by_target.entry(canonical(attr.target)).or_default().push(attr);
    }

    let mut rows = Vec::new();
    let mut curves = Vec::new();
    for (&target, group) in &by_target {
        let mut baselines = BTreeMap::new();
        for subject in [Subject::Edges, Subject::Features] {
            let count = match subject {
                Subject::Edges => group[0].scope_edges.len(),
                Subject::Features => group[0].feature_scores.len(),
            };
            let step = cfg.step.unwrap_or_else(|| default_step(count));
            for kind in [CurveKind::Insertion, CurveKind::Deletion] {
                let curve = random_baseline(
                    model,
                    g,
                    target,
                    kind,
                    subject,
                    cfg.realizations,
                    step,
                    cfg.seed,
                )?;
                curves.push(CurveRecord {
                    target,
                    source: CurveSource::RandomBaseline,
                    curve: curve.clone(),
                });
                baselines.insert((subject as u64, kind as u64), (curve, step));
            }
        }

        for attr in group {
            let mut scored = |subject: Subject, kind: CurveKind| -> Result<AreaScore> {
                let scores = match subject {
                    Subject::Edges => &attr.edge_scores,
                    Subject::Features => &attr.feature_scores,
                };
                let (baseline, step) = &baselines[&(subject as u64, kind as u64)];
                let order = rank_descending(scores);
                let curve = perturbation_curve(model, g, target, &order, kind, subject, *step)?;
                let area = area_score(&curve, baseline, kind)?;
                curves.push(CurveRecord {
                    target,
                    source: CurveSource::Explainer(attr.method),
                    curve,
                });
                Ok(area)
            };
            rows.push(InsdelRow {
                target,
                method: attr.method,
                edge_insertion: scored(Subject::Edges, CurveKind::Insertion)?,
                edge_deletion: scored(Subject::Edges, CurveKind::Deletion)?,
                feature_insertion: scored(Subject::Features, CurveKind::Insertion)?,
                feature_deletion: scored(Subject::Features, CurveKind::Deletion)?,
            });
        }
    }
    Ok(InsdelReport { rows, curves })
}
