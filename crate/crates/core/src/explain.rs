//! Attribution methods for individual link predictions.
//!
//! Every explainer answers the same question: which edges and which feature
//! columns inside the receptive field of a target pair drive the model's
//! probability for that pair? The gradient family (integrated gradients,
//! deconvolution, layer-wise relevance propagation) returns signed scores
//! where the sign encodes the direction of influence. The mask family
//! (GNNExplainer and the random baseline) returns scores in `[0, 1]`.
//! Scores are reported raw; thresholding is the evaluator's job.
//!
//! All methods restrict themselves to the k-hop subgraph around the target
//! endpoints, where k is the model's message-passing depth — nothing outside
//! that scope can influence the prediction, so scoring it would be noise.

use ndarray::Axis;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{canonical, k_hop_subgraph, Edge, Graph, Scope};
use crate::model::{EncoderKind, ModelConfig, TrainedModel};
use crate::rng::{edge_seed, rng_from};
use crate::tensor::{Mat, Mode, Tape, Var};

/// Stream tag for GNNExplainer mask initialisation.
const SEED_MASK: u64 = 3;
/// Stream tag for the random-scores baseline.
const SEED_RANDOM: u64 = 4;

/// Probability floor inside mask-learning losses, so `log` stays finite.
const PROB_FLOOR: f64 = 1e-7;
/// Clamp bounds for mask values inside the entropy regulariser.
const ENTROPY_FLOOR: f64 = 1e-12;

/// The attribution methods this crate implements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExplainerKind {
    IntegratedGradients,
    Deconvolution,
    Lrp,
    GnnExplainer,
    Random,
}

impl ExplainerKind {
    pub const ALL: [ExplainerKind; 5] = [
        ExplainerKind::IntegratedGradients,
        ExplainerKind::Deconvolution,
        ExplainerKind::Lrp,
        ExplainerKind::GnnExplainer,
        ExplainerKind::Random,
    ];

    /// Signed methods attribute direction; mask methods only magnitude.
    pub fn signed(self) -> bool {
        matches!(
            self,
            ExplainerKind::IntegratedGradients | ExplainerKind::Deconvolution | ExplainerKind::Lrp
        )
    }

    /// The serialization name, for tables and file names.
    pub fn as_str(self) -> &'static str {
        match self {
            ExplainerKind::IntegratedGradients => "integrated_gradients",
            ExplainerKind::Deconvolution => "deconvolution",
            ExplainerKind::Lrp => "lrp",
            ExplainerKind::GnnExplainer => "gnn_explainer",
            ExplainerKind::Random => "random",
        }
    }
}

impl std::fmt::Display for ExplainerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Importance scores for one target pair, over its explanation scope.
///
/// `scope_nodes` are original node ids in ascending order; `scope_edges` are
/// original-id canonical pairs in ascending order, aligned with
/// `edge_scores`. `feature_scores` has one entry per feature column.
/// Gradient methods also keep the per-node, per-column attribution matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Attribution {
    pub method: ExplainerKind,
    pub target: Edge,
    pub scope_nodes: Vec<usize>,
    pub scope_edges: Vec<Edge>,
    pub edge_scores: Vec<f64>,
    pub feature_scores: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_feature_scores: Option<Mat>,
    /// Whether scores carry sign information (see [`ExplainerKind::signed`]).
    pub signed: bool,
}

impl Attribution {
    /// Score of an edge given in original node ids, if it lies in the scope.
    pub fn edge_score(&self, e: Edge) -> Option<f64> {
        let e = canonical(e);
        self.scope_edges
            .binary_search(&e)
            .ok()
            .map(|k| self.edge_scores[k])
    }
}

/// How many hops of the input graph can influence one output embedding.
pub fn receptive_hops(config: &ModelConfig) -> usize {
    match config.encoder {
        EncoderKind::MeanAggregation => 1,
        EncoderKind::GcnVgae | EncoderKind::Gin => config.layers,
    }
}

/// The target pair's explanation scope plus its local re-indexing.
struct ScopeCtx {
    scope: Scope,
    local_target: Edge,
}

fn scoped(model: &TrainedModel, g: &Graph, target: Edge) -> Result<ScopeCtx> {
    let (i, j) = canonical(target);
    if i == j {
        return Err(Error::InvalidArgument(format!(
            "cannot explain a self-pair ({i}, {j})"
        )));
    }
    if j >= g.num_nodes() {
        return Err(Error::InvalidArgument(format!(
            "target node {j} outside 0..{}",
            g.num_nodes()
        )));
    }
    let hops = receptive_hops(&model.config);
    let scope = k_hop_subgraph(g, &[i, j], hops)?;
    if scope.graph.num_edges() == 0 {
        return Err(Error::Degenerate(format!(
            "no edges within {hops} hops of ({i}, {j}); nothing to attribute"
        )));
    }
    let local_target = (
        scope.local(i).expect("seed node is always in its own scope"),
        scope.local(j).expect("seed node is always in its own scope"),
    );
    Ok(ScopeCtx { scope, local_target })
}

fn attribution(
    ctx: ScopeCtx,
    method: ExplainerKind,
    target: Edge,
    edge_scores: Vec<f64>,
    feature_scores: Vec<f64>,
    node_feature_scores: Option<Mat>,
) -> Attribution {
    Attribution {
        method,
        target: canonical(target),
        scope_edges: ctx.scope.edges_original(),
        scope_nodes: ctx.scope.nodes,
        edge_scores,
        feature_scores,
        node_feature_scores,
        signed: method.signed(),
    }
}

/// Run the model on the scope graph with `x` and `w` registered as
/// differentiable inputs, returning the probability variable and the leaves.
fn scope_forward(
    model: &TrainedModel,
    tape: &mut Tape,
    ctx: &ScopeCtx,
    x_value: Mat,
    w_value: Mat,
) -> Result<(Var, Var, Var)> {
    let x = tape.input(x_value, true);
    let w = tape.input(w_value, true);
    let p = model.forward(tape, &ctx.scope.graph.edges_arc(), x, w, &[ctx.local_target])?;
    Ok((p, x, w))
}

fn column_vec(m: &Mat) -> Vec<f64> {
    m.column(0).to_vec()
}

fn column_sums(m: &Mat) -> Vec<f64> {
    m.sum_axis(Axis(0)).to_vec()
}

/// Integrated gradients along the straight path from an all-zero graph
/// (no features, zero edge weights) to the observed one.
///
/// The integral is approximated by a midpoint Riemann sum with `steps`
/// evaluations, which converges to the exact path integral and satisfies
/// completeness: the attributions sum to `p(input) - p(baseline)` up to
/// discretisation error.
pub fn integrated_gradients(
    model: &TrainedModel,
    g: &Graph,
    target: Edge,
    steps: usize,
) -> Result<Attribution> {
    if steps == 0 {
        return Err(Error::InvalidArgument(
            "integrated gradients needs at least one step".into(),
        ));
    }
    let ctx = scoped(model, g, target)?;
    let sg = &ctx.scope.graph;
    let x_full = sg.features().clone();
    let w_full = Mat::ones((sg.num_edges(), 1));
    let mut grad_x = Mat::zeros(x_full.raw_dim());
    let mut grad_w = Mat::zeros(w_full.raw_dim());
    for t in 0..steps {
        let alpha = (t as f64 + 0.5) / steps as f64;
        let mut tape = Tape::new();
        let (p, x, w) = scope_forward(model, &mut tape, &ctx, &x_full * alpha, &w_full * alpha)?;
        let grads = tape.backward(p, Mode::Standard)?;
        if let Some(gx) = grads.get(x) {
            grad_x += gx;
        }
        if let Some(gw) = grads.get(w) {
            grad_w += gw;
        }
    }
    let scale = 1.0 / steps as f64;
    // (input - baseline) * average gradient; the baseline is zero and the
    // observed edge weights are one, so the edge factor drops out.
    let attr_x = &x_full * &grad_x * scale;
    let attr_w = grad_w * scale;
    Ok(attribution(
        ctx,
        ExplainerKind::IntegratedGradients,
        target,
        column_vec(&attr_w),
        column_sums(&attr_x),
        Some(attr_x),
    ))
}

/// Deconvolution: a single backward pass where ReLU passes the positive part
/// of the incoming signal instead of gating on its forward activation.
pub fn deconvolution(model: &TrainedModel, g: &Graph, target: Edge) -> Result<Attribution> {
    let ctx = scoped(model, g, target)?;
    let sg = &ctx.scope.graph;
    let mut tape = Tape::new();
    let (p, x, w) = scope_forward(
        model,
        &mut tape,
        &ctx,
        sg.features().clone(),
        Mat::ones((sg.num_edges(), 1)),
    )?;
    let grads = tape.backward(p, Mode::Deconv)?;
    let attr_x = grads
        .get(x)
        .cloned()
        .unwrap_or_else(|| Mat::zeros(sg.features().raw_dim()));
    let attr_w = grads
        .get(w)
        .cloned()
        .unwrap_or_else(|| Mat::zeros((sg.num_edges(), 1)));
    Ok(attribution(
        ctx,
        ExplainerKind::Deconvolution,
        target,
        column_vec(&attr_w),
        column_sums(&attr_x),
        Some(attr_x),
    ))
}

/// Layer-wise relevance propagation with the epsilon rule.
///
/// The predicted probability is redistributed backwards through the tape;
/// whatever lands on the feature matrix and on the edge-weight vector is the
/// attribution. Smaller `epsilon` preserves more relevance but is less
/// numerically forgiving around small activations.
pub fn lrp(model: &TrainedModel, g: &Graph, target: Edge, epsilon: f64) -> Result<Attribution> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "lrp epsilon must be positive and finite, got {epsilon}"
        )));
    }
    let ctx = scoped(model, g, target)?;
    let sg = &ctx.scope.graph;
    let mut tape = Tape::new();
    let (p, x, w) = scope_forward(
        model,
        &mut tape,
        &ctx,
        sg.features().clone(),
        Mat::ones((sg.num_edges(), 1)),
    )?;
    let rel = tape.lrp_backward(p, epsilon)?;
    let attr_x = rel
        .get(x)
        .cloned()
        .unwrap_or_else(|| Mat::zeros(sg.features().raw_dim()));
    let attr_w = rel
        .get(w)
        .cloned()
        .unwrap_or_else(|| Mat::zeros((sg.num_edges(), 1)));
    Ok(attribution(
        ctx,
        ExplainerKind::Lrp,
        target,
        column_vec(&attr_w),
        column_sums(&attr_x),
        Some(attr_x),
    ))
}

/// Hyper-parameters for GNNExplainer mask optimisation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GnnExplainerConfig {
    #[serde(default = "default_mask_epochs")]
    pub epochs: usize,
    #[serde(default = "default_mask_lr")]
    pub lr: f64,
    #[serde(default = "default_mask_momentum")]
    pub momentum: f64,
    /// Weight of the mask size penalty (sum of mask entries, so the pressure
    /// on each entry does not shrink as scopes grow).
    #[serde(default = "default_mask_sparsity")]
    pub sparsity: f64,
    /// Weight of the binary entropy penalty that pushes masks towards 0/1.
    #[serde(default = "default_mask_entropy")]
    pub entropy_weight: f64,
}

fn default_mask_epochs() -> usize {
    100
}

fn default_mask_lr() -> f64 {
    0.01
}

fn default_mask_momentum() -> f64 {
    0.9
}

fn default_mask_sparsity() -> f64 {
    0.005
}

fn default_mask_entropy() -> f64 {
    0.1
}

impl Default for GnnExplainerConfig {
    fn default() -> Self {
        GnnExplainerConfig {
            epochs: default_mask_epochs(),
            lr: default_mask_lr(),
            momentum: default_mask_momentum(),
            sparsity: default_mask_sparsity(),
            entropy_weight: default_mask_entropy(),
        }
    }
}

impl GnnExplainerConfig {
    fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0) || !self.lr.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "mask learning rate must be positive and finite, got {}",
                self.lr
            )));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidArgument(format!(
                "mask momentum must lie in [0, 1), got {}",
                self.momentum
            )));
        }
        if self.sparsity < 0.0 || self.entropy_weight < 0.0 {
            return Err(Error::InvalidArgument(
                "mask penalty weights must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Mean binary entropy of a matrix of values in (0, 1).
fn binary_entropy_mean(tape: &mut Tape, m: Var) -> Result<Var> {
    let (rows, cols) = tape.shape(m);
    let mc = tape.clamp(m, ENTROPY_FLOOR, 1.0 - ENTROPY_FLOOR)?;
    let log_m = tape.log(mc)?;
    let lhs = tape.mul(mc, log_m)?;
    let neg = tape.scale(mc, -1.0)?;
    let one_minus = tape.add_scalar(neg, 1.0)?;
    let log_om = tape.log(one_minus)?;
    let rhs = tape.mul(one_minus, log_om)?;
    let sum = tape.add(lhs, rhs)?;
    let total = tape.sum_all(sum)?;
    tape.scale(total, -1.0 / (rows * cols) as f64)
}

/// One evaluation of the mask objective; gradients wrt both logit matrices.
fn mask_objective(
    model: &TrainedModel,
    ctx: &ScopeCtx,
    edge_logits: &Mat,
    feat_logits: &Mat,
    config: &GnnExplainerConfig,
) -> Result<(f64, Mat, Mat)> {
    let sg = &ctx.scope.graph;
    let mut tape = Tape::new();
    let el = tape.input(edge_logits.clone(), true);
    let fl = tape.input(feat_logits.clone(), true);
    let edge_mask = tape.sigmoid(el)?;
    let feat_mask = tape.sigmoid(fl)?;
    let x = tape.constant(sg.features().clone());
    let x_masked = tape.col_scale(x, feat_mask)?;
    let p = model.forward(
        &mut tape,
        &sg.edges_arc(),
        x_masked,
        edge_mask,
        &[ctx.local_target],
    )?;
    let p_safe = tape.clamp(p, PROB_FLOOR, 1.0)?;
    let log_p = tape.log(p_safe)?;
    let mut loss = tape.scale(log_p, -1.0)?;
    if config.sparsity > 0.0 {
        let edge_size = tape.sum_all(edge_mask)?;
        let edge_size = tape.scale(edge_size, config.sparsity)?;
        let feat_size = tape.sum_all(feat_mask)?;
        let feat_size = tape.scale(feat_size, config.sparsity)?;
        loss = tape.add(loss, edge_size)?;
        loss = tape.add(loss, feat_size)?;
    }
    if config.entropy_weight > 0.0 {
        let edge_ent = binary_entropy_mean(&mut tape, edge_mask)?;
        let edge_ent = tape.scale(edge_ent, config.entropy_weight)?;
        let feat_ent = binary_entropy_mean(&mut tape, feat_mask)?;
        let feat_ent = tape.scale(feat_ent, config.entropy_weight)?;
        loss = tape.add(loss, edge_ent)?;
        loss = tape.add(loss, feat_ent)?;
    }
    let grads = tape.backward(loss, Mode::Standard)?;
    let grad_e = grads
        .get(el)
        .cloned()
        .unwrap_or_else(|| Mat::zeros(edge_logits.raw_dim()));
    let grad_f = grads
        .get(fl)
        .cloned()
        .unwrap_or_else(|| Mat::zeros(feat_logits.raw_dim()));
    Ok((tape.scalar(loss), grad_e, grad_f))
}

fn sigmoid_mat(m: &Mat) -> Mat {
    m.mapv(|v| 1.0 / (1.0 + (-v).exp()))
}

/// GNNExplainer: learn soft masks over scope edges and feature columns that
/// keep the target probability high while staying small and near-binary.
///
/// Mask logits start from a standard normal draw seeded by `(seed, target)`,
/// so each target optimises an independent but reproducible mask. The final
/// sigmoid masks are the scores.
pub fn gnn_explainer(
    model: &TrainedModel,
    g: &Graph,
    target: Edge,
    config: &GnnExplainerConfig,
    seed: u64,
) -> Result<Attribution> {
    config.validate()?;
    let ctx = scoped(model, g, target)?;
    let sg = &ctx.scope.graph;
    let mut rng = rng_from(edge_seed(seed, canonical(target), SEED_MASK));
    let normal = Normal::new(0.0, 1.0).expect("unit normal is well-formed");
    let mut edge_logits =
        Mat::from_shape_fn((sg.num_edges(), 1), |_| normal.sample(&mut rng));
    let mut feat_logits =
        Mat::from_shape_fn((1, sg.num_features()), |_| normal.sample(&mut rng));
    let mut vel_e = Mat::zeros(edge_logits.raw_dim());
    let mut vel_f = Mat::zeros(feat_logits.raw_dim());
    for _ in 0..config.epochs {
        let (_, grad_e, grad_f) = mask_objective(model, &ctx, &edge_logits, &feat_logits, config)?;
        vel_e = &vel_e * config.momentum + &grad_e;
        vel_f = &vel_f * config.momentum + &grad_f;
        edge_logits.scaled_add(-config.lr, &vel_e);
        feat_logits.scaled_add(-config.lr, &vel_f);
    }
    let edge_mask = sigmoid_mat(&edge_logits);
    let feat_mask = sigmoid_mat(&feat_logits);
    Ok(attribution(
        ctx,
        ExplainerKind::GnnExplainer,
        target,
        column_vec(&edge_mask),
        feat_mask.row(0).to_vec(),
        None,
    ))
}

/// Uniform random scores, seeded per `(seed, target)`: the sanity baseline
/// every method should beat. Edge scores are drawn first, then features.
pub fn random_attribution(
    model: &TrainedModel,
    g: &Graph,
    target: Edge,
    seed: u64,
) -> Result<Attribution> {
    let ctx = scoped(model, g, target)?;
    let sg = &ctx.scope.graph;
    let mut rng = rng_from(edge_seed(seed, canonical(target), SEED_RANDOM));
    let edge_scores: Vec<f64> = (0..sg.num_edges()).map(|_| rng.gen()).collect();
    let feature_scores: Vec<f64> = (0..sg.num_features()).map(|_| rng.gen()).collect();
    Ok(attribution(
        ctx,
        ExplainerKind::Random,
        target,
        edge_scores,
        feature_scores,
        None,
    ))
}
