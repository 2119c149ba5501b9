//! Graph neural link predictors built on the shared tape.
//!
//! Two trainable encoders (a variational graph autoencoder over GCN layers
//! and a GIN stack) plus a parameter-free mean-aggregation reference model,
//! each combined with an inner-product or cosine decoder that turns a pair
//! of node embeddings into a link probability. Training runs full-batch
//! gradient descent with momentum on binary cross-entropy over the train
//! edges and freshly resampled non-edges each epoch. Every forward runs
//! through `Tape`, so the same code path serves training, prediction, and
//! the gradient-based explainers.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::roc_auc;
use crate::graph::{sample_non_edges, Edge, EdgeSplit, Graph};
use crate::rng::{derive_seed, rng_from};
use crate::tensor::{Mat, Mode, Tape, Var};

/// Stream tags so init, training noise, and negative sampling never share
/// a generator state.
const SEED_INIT: u64 = 1;
const SEED_TRAIN: u64 = 2;

/// Floor for binary cross-entropy log arguments. Applied as the affine map
/// `p -> floor + (1 - 2 floor) p` rather than a clamp: a clamp has zero
/// gradient below the floor, so a badly saturated model would stop
/// receiving any signal from exactly the pairs it gets most wrong.
const BCE_FLOOR: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncoderKind {
    /// Variational graph autoencoder: shared GCN layers feeding GCN mean and
    /// log-variance heads. Outside training only the mean path runs.
    GcnVgae,
    /// Graph isomorphism network: sum aggregation into a two-layer MLP.
    Gin,
    /// Parameter-free white-box reference: x_i plus the weighted neighbour
    /// mean, where the divisor stays fixed at the unweighted degree.
    MeanAggregation,
}

impl EncoderKind {
    /// The serialized name, for messages and reports.
    pub fn as_str(self) -> &'static str {
        match self {
            EncoderKind::GcnVgae => "gcn_vgae",
            EncoderKind::Gin => "gin",
            EncoderKind::MeanAggregation => "mean_aggregation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderKind {
    /// sigmoid(z_i . z_j)
    InnerProduct,
    /// (cos(z_i, z_j) + 1) / 2, clamped to [0, 1].
    Cosine,
}

impl DecoderKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DecoderKind::InnerProduct => "inner_product",
            DecoderKind::Cosine => "cosine",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub encoder: EncoderKind,
    pub decoder: DecoderKind,
    /// Message-passing depth; the VGAE heads count as the final layer.
    #[serde(default = "default_layers")]
    pub layers: usize,
    #[serde(default = "default_hidden_dim")]
    pub hidden_dim: usize,
    #[serde(default = "default_embed_dim")]
    pub embed_dim: usize,
    /// Self-loop weight in GIN aggregation: (1 + eps) h_u + sum over neighbours.
    #[serde(default)]
    pub gin_epsilon: f64,
}

fn default_layers() -> usize {
    2
}

fn default_hidden_dim() -> usize {
    32
}

fn default_embed_dim() -> usize {
    16
}

impl ModelConfig {
    pub fn new(encoder: EncoderKind, decoder: DecoderKind) -> Self {
        ModelConfig {
            encoder,
            decoder,
            layers: default_layers(),
            hidden_dim: default_hidden_dim(),
            embed_dim: default_embed_dim(),
            gin_epsilon: 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.layers == 0 {
            return Err(Error::InvalidArgument("layers must be at least 1".into()));
        }
        if self.hidden_dim == 0 || self.embed_dim == 0 {
            return Err(Error::InvalidArgument(
                "hidden_dim and embed_dim must be positive".into(),
            ));
        }
        if !self.gin_epsilon.is_finite() {
            return Err(Error::InvalidArgument("gin_epsilon must be finite".into()));
        }
        Ok(())
    }
}

/// Parameter names and shapes implied by a configuration, in name order.
pub fn expected_shapes(
    config: &ModelConfig,
    num_features: usize,
) -> BTreeMap<String, (usize, usize)> {
    let mut shapes = BTreeMap::new();
    match config.encoder {
        EncoderKind::MeanAggregation => {}
        EncoderKind::GcnVgae => {
            let mut d_in = num_features;
            for l in 0..config.layers - 1 {
                shapes.insert(format!("gcn{l}.weight"), (d_in, config.hidden_dim));
                shapes.insert(format!("gcn{l}.bias"), (1, config.hidden_dim));
                d_in = config.hidden_dim;
            }
            for head in ["mu", "logvar"] {
                shapes.insert(format!("{head}.weight"), (d_in, config.embed_dim));
                shapes.insert(format!("{head}.bias"), (1, config.embed_dim));
            }
        }
        EncoderKind::Gin => {
            let mut d_in = num_features;
            for l in 0..config.layers {
                let d_out = if l + 1 == config.layers {
                    config.embed_dim
                } else {
                    config.hidden_dim
                };
                shapes.insert(format!("gin{l}.mlp0.weight"), (d_in, config.hidden_dim));
                shapes.insert(format!("gin{l}.mlp0.bias"), (1, config.hidden_dim));
                shapes.insert(format!("gin{l}.mlp1.weight"), (config.hidden_dim, d_out));
                shapes.insert(format!("gin{l}.mlp1.bias"), (1, d_out));
                d_in = d_out;
            }
        }
    }
    shapes
}

/// Width of the embedding rows the decoder sees.
pub fn embedding_dim(config: &ModelConfig, num_features: usize) -> usize {
    match config.encoder {
        EncoderKind::MeanAggregation => num_features,
        _ => config.embed_dim,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainMeta {
    pub epochs: usize,
    pub seed: u64,
    /// Loss of the final parameters on one more resampled batch.
    pub final_loss: f64,
    /// Held-out ranking quality; absent when the split has no test pairs.
    pub test_auc: Option<f64>,
    pub test_accuracy: Option<f64>,
}

/// A configuration bound to concrete parameters. Construction validates
/// every parameter's name and shape, so a value of this type can always
/// run forward.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub config: ModelConfig,
    pub num_features: usize,
    params: BTreeMap<String, Mat>,
    pub meta: Option<TrainMeta>,
}

/// Encoder output: the embedding actually used downstream plus the
/// variational pieces when the encoder has them.
struct Encoded {
    z: Var,
    mu: Var,
    logvar: Option<Var>,
}

fn param_var(params: &BTreeMap<String, Var>, name: &str) -> Result<Var> {
    params
        .get(name)
        .copied()
        .ok_or_else(|| Error::InvalidArgument(format!("missing parameter variable {name}")))
}

/// Symmetrically normalized propagation with an implicit self loop. With
/// unit weights this is D^{-1/2} (A + I) D^{-1/2} h; degrees are taken as
/// 1 + incident weight so the normalization stays differentiable in w.
fn gcn_propagate(tape: &mut Tape, edges: &Arc<Vec<Edge>>, h: Var, w: Var) -> Result<Var> {
    let n = tape.shape(h).0;
    let ones = tape.constant(Mat::ones((n, 1)));
    let wdeg = tape.neighbor_sum(ones, w, edges.clone())?;
    let deg = tape.add_scalar(wdeg, 1.0)?;
    let dis = tape.rsqrt(deg)?;
    let dinv = tape.mul(dis, dis)?;
    let scaled = tape.row_scale(h, dis)?;
    let agg = tape.neighbor_sum(scaled, w, edges.clone())?;
    let from_neighbours = tape.row_scale(agg, dis)?;
    let from_self = tape.row_scale(h, dinv)?;
    tape.add(from_neighbours, from_self)
}

fn linear(tape: &mut Tape, h: Var, weight: Var, bias: Var) -> Result<Var> {
    let s = tape.matmul(h, weight)?;
    tape.add_row(s, bias)
}

/// Mean KL divergence from rows of N(mu, exp(logvar)) to the standard normal.
fn gaussian_kl(tape: &mut Tape, mu: Var, logvar: Var) -> Result<Var> {
    let n = tape.shape(mu).0 as f64;
    let mu2 = tape.mul(mu, mu)?;
    let var = tape.exp(logvar)?;
    let t = tape.add_scalar(logvar, 1.0)?;
    let t = tape.sub(t, mu2)?;
    let t = tape.sub(t, var)?;
    let s = tape.sum_all(t)?;
    tape.scale(s, -0.5 / n)
}

impl TrainedModel {
    pub fn from_parameters(
        config: ModelConfig,
        num_features: usize,
        params: BTreeMap<String, Mat>,
    ) -> Result<Self> {
        config.validate()?;
        if num_features == 0 {
            return Err(Error::InvalidArgument("num_features must be positive".into()));
        }
        let shapes = expected_shapes(&config, num_features);
        for (name, &(r, c)) in &shapes {
            match params.get(name) {
                None => {
                    return Err(Error::InvalidArgument(format!("missing parameter {name}")))
                }
                Some(m) if m.dim() != (r, c) => {
                    return Err(Error::InvalidArgument(format!(
                        "parameter {name}: expected {r}x{c}, got {}x{}",
                        m.nrows(),
                        m.ncols()
                    )))
                }
                Some(m) if m.iter().any(|v| !v.is_finite()) => {
                    return Err(Error::NonFinite("model parameter"))
                }
                _ => {}
            }
        }
        if let Some(extra) = params.keys().find(|k| !shapes.contains_key(*k)) {
            return Err(Error::InvalidArgument(format!(
                "unexpected parameter {extra}"
            )));
        }
        Ok(TrainedModel {
            config,
            num_features,
            params,
            meta: None,
        })
    }

    /// Glorot-uniform weights and zero biases, deterministic per seed.
    ///
    /// The first matrix of each GIN block consumes a summed neighborhood, so
    /// its input arrives roughly `1 + degree` times larger than the unit
    /// scale the Glorot bound assumes; on graphs of any density that starts
    /// the decoder logits deeply saturated. Folding an assumed neighborhood
    /// multiplicity into that matrix's fan-in keeps early logits responsive.
    pub fn init(config: ModelConfig, num_features: usize, seed: u64) -> Result<Self> {
        const SUM_FAN: usize = 16;
        let shapes = expected_shapes(&config, num_features);
        let mut rng = rng_from(derive_seed(seed, &[SEED_INIT]));
        let mut params = BTreeMap::new();
        for (name, &(r, c)) in &shapes {
            let m = if name.ends_with(".bias") {
                Mat::zeros((r, c))
            } else {
                let fan_in = if name.ends_with(".mlp0.weight") {
                    r * (1 + SUM_FAN)
                } else {
                    r
                };
                let a = (6.0 / (fan_in + c) as f64).sqrt();
                let data: Vec<f64> = (0..r * c).map(|_| rng.gen_range(-a..a)).collect();
                Mat::from_shape_vec((r, c), data).expect("matching length")
            };
            params.insert(name.clone(), m);
        }
        Self::from_parameters(config, num_features, params)
    }

    pub fn parameters(&self) -> &BTreeMap<String, Mat> {
        &self.params
    }

    fn constant_params(&self, tape: &mut Tape) -> BTreeMap<String, Var> {
        self.params
            .iter()
            .map(|(k, m)| (k.clone(), tape.constant(m.clone())))
            .collect()
    }

    fn encode_with(
        &self,
        tape: &mut Tape,
        edges: &Arc<Vec<Edge>>,
        x: Var,
        w: Var,
        params: &BTreeMap<String, Var>,
        noise: Option<Var>,
    ) -> Result<Encoded> {
        let (n, f) = tape.shape(x);
        if f != self.num_features {
            return Err(Error::ShapeMismatch {
                expected: format!("{n}x{}", self.num_features),
                got: format!("{n}x{f}"),
                context: "encode features",
            });
        }
        if tape.shape(w) != (edges.len(), 1) {
            return Err(Error::ShapeMismatch {
                expected: format!("{}x1", edges.len()),
                got: format!("{}x{}", tape.shape(w).0, tape.shape(w).1),
                context: "encode edge weights",
            });
        }
        for (name, &(r, c)) in &expected_shapes(&self.config, self.num_features) {
            let v = param_var(params, name)?;
            if tape.shape(v) != (r, c) {
                return Err(Error::InvalidArgument(format!(
                    "parameter variable {name}: expected {r}x{c}, got {}x{}",
                    tape.shape(v).0,
                    tape.shape(v).1
                )));
            }
        }
        if noise.is_some() && self.config.encoder != EncoderKind::GcnVgae {
            return Err(Error::InvalidArgument(
                "only the variational encoder takes reparameterization noise".into(),
            ));
        }

        match self.config.encoder {
            EncoderKind::MeanAggregation => {
                let mut deg = Mat::zeros((n, 1));
                for &(u, v) in edges.iter() {
                    deg[(u, 0)] += 1.0;
                    deg[(v, 0)] += 1.0;
                }
                let inv = tape.constant(deg.mapv(|d| 1.0 / d.max(1.0)));
                let agg = tape.neighbor_sum(x, w, edges.clone())?;
                let mean = tape.row_scale(agg, inv)?;
                let z = tape.add(mean, x)?;
                Ok(Encoded {
                    z,
                    mu: z,
                    logvar: None,
                })
            }
            EncoderKind::GcnVgae => {
                let mut h = x;
                for l in 0..self.config.layers - 1 {
                    let weight = param_var(params, &format!("gcn{l}.weight"))?;
                    let bias = param_var(params, &format!("gcn{l}.bias"))?;
                    let s = tape.matmul(h, weight)?;
                    let p = gcn_propagate(tape, edges, s, w)?;
                    let a = tape.add_row(p, bias)?;
                    h = tape.relu(a)?;
                }
                let mu = self.gcn_head(tape, edges, h, w, params, "mu")?;
                match noise {
                    None => Ok(Encoded {
                        z: mu,
                        mu,
                        logvar: None,
                    }),
                    Some(noise) => {
                        let logvar = self.gcn_head(tape, edges, h, w, params, "logvar")?;
                        if tape.shape(noise) != tape.shape(mu) {
                            return Err(Error::InvalidArgument(format!(
                                "noise shape {:?} does not match embeddings {:?}",
                                tape.shape(noise),
                                tape.shape(mu)
                            )));
                        }
                        let half = tape.scale(logvar, 0.5)?;
                        let std = tape.exp(half)?;
                        let jitter = tape.mul(std, noise)?;
                        let z = tape.add(mu, jitter)?;
                        Ok(Encoded {
                            z,
                            mu,
                            logvar: Some(logvar),
                        })
                    }
                }
            }
            EncoderKind::Gin => {
                let mut h = x;
                for l in 0..self.config.layers {
                    let agg = tape.neighbor_sum(h, w, edges.clone())?;
                    let scaled_self = tape.scale(h, 1.0 + self.config.gin_epsilon)?;
                    let pre = tape.add(scaled_self, agg)?;
                    let w0 = param_var(params, &format!("gin{l}.mlp0.weight"))?;
                    let b0 = param_var(params, &format!("gin{l}.mlp0.bias"))?;
                    let w1 = param_var(params, &format!("gin{l}.mlp1.weight"))?;
                    let b1 = param_var(params, &format!("gin{l}.mlp1.bias"))?;
                    let a0 = linear(tape, pre, w0, b0)?;
                    let r = tape.relu(a0)?;
                    h = linear(tape, r, w1, b1)?;
                }
                Ok(Encoded {
                    z: h,
                    mu: h,
                    logvar: None,
                })
            }
        }
    }

    fn gcn_head(
        &self,
        tape: &mut Tape,
        edges: &Arc<Vec<Edge>>,
        h: Var,
        w: Var,
        params: &BTreeMap<String, Var>,
        head: &str,
    ) -> Result<Var> {
        let weight = param_var(params, &format!("{head}.weight"))?;
        let bias = param_var(params, &format!("{head}.bias"))?;
        let s = tape.matmul(h, weight)?;
        let p = gcn_propagate(tape, edges, s, w)?;
        tape.add_row(p, bias)
    }

    /// Deterministic embeddings on a tape: features `x` (n, num_features)
    /// and one weight per edge in `w` (|edges|, 1).
    pub fn encode(&self, tape: &mut Tape, edges: &Arc<Vec<Edge>>, x: Var, w: Var) -> Result<Var> {
        let params = self.constant_params(tape);
        self.encode_with(tape, edges, x, w, &params, None).map(|e| e.z)
    }

    /// Pair probabilities from embedding rows. A zero embedding row has no
    /// direction, so under the cosine decoder it scores 0.5 against anything.
    pub fn decode(&self, tape: &mut Tape, z: Var, pairs: &[Edge]) -> Result<Var> {
        match self.config.decoder {
            DecoderKind::InnerProduct => {
                let d = self.pair_dots(tape, z, pairs, false)?;
                tape.sigmoid(d)
            }
            DecoderKind::Cosine => {
                let c = self.pair_dots(tape, z, pairs, true)?;
                let half = tape.scale(c, 0.5)?;
                let p = tape.add_scalar(half, 0.5)?;
                tape.clamp(p, 0.0, 1.0)
            }
        }
    }

    /// Pre-sigmoid pair scores of the inner-product decoder; `None` for
    /// decoders without a logit form (cosine maps to [0, 1] directly).
    fn decode_logits(&self, tape: &mut Tape, z: Var, pairs: &[Edge]) -> Result<Option<Var>> {
        match self.config.decoder {
            DecoderKind::InnerProduct => Ok(Some(self.pair_dots(tape, z, pairs, false)?)),
            DecoderKind::Cosine => Ok(None),
        }
    }

    fn pair_dots(&self, tape: &mut Tape, z: Var, pairs: &[Edge], normalize: bool) -> Result<Var> {
        if pairs.is_empty() {
            return Err(Error::InvalidArgument("decode needs at least one pair".into()));
        }
        let is = Arc::new(pairs.iter().map(|e| e.0).collect::<Vec<_>>());
        let js = Arc::new(pairs.iter().map(|e| e.1).collect::<Vec<_>>());
        let mut zi = tape.gather_rows(z, is)?;
        let mut zj = tape.gather_rows(z, js)?;
        if normalize {
            zi = tape.row_normalize(zi)?;
            zj = tape.row_normalize(zj)?;
        }
        tape.dot_rows(zi, zj)
    }

    /// Encode then decode in one call; `pairs` index rows of `x`.
    pub fn forward(
        &self,
        tape: &mut Tape,
        edges: &Arc<Vec<Edge>>,
        x: Var,
        w: Var,
        pairs: &[Edge],
    ) -> Result<Var> {
        let z = self.encode(tape, edges, x, w)?;
        self.decode(tape, z, pairs)
    }

    /// Forward with caller-registered parameter variables, for checking the
    /// model's gradients against its own parameters.
    pub fn forward_with_params(
        &self,
        tape: &mut Tape,
        edges: &Arc<Vec<Edge>>,
        x: Var,
        w: Var,
        params: &BTreeMap<String, Var>,
        pairs: &[Edge],
    ) -> Result<Var> {
        let z = self.encode_with(tape, edges, x, w, params, None)?.z;
        self.decode(tape, z, pairs)
    }

    /// Embeddings of a graph under unit edge weights.
    pub fn embeddings(&self, g: &Graph) -> Result<Mat> {
        let mut tape = Tape::new();
        let x = tape.constant(g.features().clone());
        let w = tape.constant(Mat::ones((g.num_edges(), 1)));
        let z = self.encode(&mut tape, &g.edges_arc(), x, w)?;
        Ok(tape.value(z).clone())
    }

    /// Link probabilities for node pairs, message-passing over `g`.
    pub fn predict(&self, g: &Graph, pairs: &[Edge]) -> Result<Vec<f64>> {
        let mut tape = Tape::new();
        let x = tape.constant(g.features().clone());
        let w = tape.constant(Mat::ones((g.num_edges(), 1)));
        let p = self.forward(&mut tape, &g.edges_arc(), x, w, pairs)?;
        Ok(tape.value(p).column(0).to_vec())
    }

    pub fn predict_edge(&self, g: &Graph, e: Edge) -> Result<f64> {
        Ok(self.predict(g, &[e])?[0])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_lr")]
    pub lr: f64,
    #[serde(default = "default_momentum")]
    pub momentum: f64,
    /// Weight on the KL regularizer of the variational encoder; the
    /// regularizer is the mean per-node divergence, so 0.1 keeps it on the
    /// order of the edge-level cross-entropy.
    #[serde(default = "default_kl_weight")]
    pub kl_weight: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_epochs() -> usize {
    200
}

fn default_lr() -> f64 {
    0.01
}

fn default_momentum() -> f64 {
    0.9
}

fn default_kl_weight() -> f64 {
    0.1
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: default_epochs(),
            lr: default_lr(),
            momentum: default_momentum(),
            kl_weight: default_kl_weight(),
            seed: 0,
        }
    }
}

/// One full-batch pass: loss value, and per-parameter gradients when asked.
/// `log(1 + e^x)` as `relu(x) + log(1 + e^-|x|)`, which neither overflows
/// nor loses the gradient at large |x|.
fn softplus(tape: &mut Tape, x: Var) -> Result<Var> {
    let pos = tape.relu(x)?;
    let flipped = tape.scale(x, -1.0)?;
    let neg = tape.relu(flipped)?;
    let magnitude = tape.add(pos, neg)?;
    let damped = tape.scale(magnitude, -1.0)?;
    let e = tape.exp(damped)?;
    let shifted = tape.add_scalar(e, 1.0)?;
    let tail = tape.log(shifted)?;
    tape.add(pos, tail)
}

fn loss_pass(
    model: &TrainedModel,
    g: &Graph,
    neg_count: usize,
    kl_weight: f64,
    rng: &mut ChaCha8Rng,
    want_grads: bool,
) -> Result<(f64, BTreeMap<String, Mat>)> {
    let negatives = sample_non_edges(g, neg_count, rng)?;
    let noise_mat = if model.config.encoder == EncoderKind::GcnVgae {
        let d = embedding_dim(&model.config, model.num_features);
        let normal = Normal::new(0.0, 1.0).expect("valid standard deviation");
        let data: Vec<f64> = (0..g.num_nodes() * d).map(|_| normal.sample(rng)).collect();
        Some(Mat::from_shape_vec((g.num_nodes(), d), data).expect("matching length"))
    } else {
        None
    };

    let mut tape = Tape::new();
    let mut param_vars = BTreeMap::new();
    for (name, m) in &model.params {
        param_vars.insert(name.clone(), tape.input(m.clone(), want_grads));
    }
    let x = tape.constant(g.features().clone());
    let w = tape.constant(Mat::ones((g.num_edges(), 1)));
    let noise = noise_mat.map(|m| tape.constant(m));
    let enc = model.encode_with(&mut tape, &g.edges_arc(), x, w, &param_vars, noise)?;

    // Binary cross-entropy over positives and negatives. The inner-product
    // decoder is scored in logit space (softplus form): probability-space
    // BCE through a sigmoid has vanishing gradients once pairs saturate,
    // which made badly overshot models unrecoverable. The cosine decoder is
    // bounded and cannot saturate that way, so it keeps the probability
    // form with log arguments floored away from zero.
    let (pos_s, neg_s) = match model.decode_logits(&mut tape, enc.z, g.edges())? {
        Some(pos_logit) => {
            let neg_logit = model
                .decode_logits(&mut tape, enc.z, &negatives)?
                .expect("decoder kind fixed within one pass");
            let pos_flip = tape.scale(pos_logit, -1.0)?;
            let pos_sp = softplus(&mut tape, pos_flip)?;
            let neg_sp = softplus(&mut tape, neg_logit)?;
            (tape.sum_all(pos_sp)?, tape.sum_all(neg_sp)?)
        }
        None => {
            let guard = |tape: &mut Tape, p: Var| -> Result<Var> {
                let scaled = tape.scale(p, 1.0 - 2.0 * BCE_FLOOR)?;
                tape.add_scalar(scaled, BCE_FLOOR)
            };
            let pos_p = model.decode(&mut tape, enc.z, g.edges())?;
            let neg_p = model.decode(&mut tape, enc.z, &negatives)?;
            let pos_c = guard(&mut tape, pos_p)?;
            let pos_l = tape.log(pos_c)?;
            let pos_nl = tape.scale(pos_l, -1.0)?;
            let neg_flip = tape.scale(neg_p, -1.0)?;
            let neg_1mp = tape.add_scalar(neg_flip, 1.0)?;
            let neg_c = guard(&mut tape, neg_1mp)?;
            let neg_l = tape.log(neg_c)?;
            let neg_nl = tape.scale(neg_l, -1.0)?;
            (tape.sum_all(pos_nl)?, tape.sum_all(neg_nl)?)
        }
    };
    let total = tape.add(pos_s, neg_s)?;
    let count = (g.num_edges() + negatives.len()) as f64;
    let mut loss = tape.scale(total, 1.0 / count)?;
    if let Some(logvar) = enc.logvar {
        let kl = gaussian_kl(&mut tape, enc.mu, logvar)?;
        let weighted = tape.scale(kl, kl_weight)?;
        loss = tape.add(loss, weighted)?;
    }

    let loss_value = tape.scalar(loss);
    let mut grads = BTreeMap::new();
    if want_grads && !param_vars.is_empty() {
        let computed = tape.backward(loss, Mode::Standard)?;
        for (name, var) in &param_vars {
            let shape = model.params[name].dim();
            let grad = computed
                .get(*var)
                .cloned()
                .unwrap_or_else(|| Mat::zeros(shape));
            grads.insert(name.clone(), grad);
        }
    }
    Ok((loss_value, grads))
}

fn diverged(e: Error, epoch: usize) -> Error {
    match e {
        Error::NonFinite(op) => {
            Error::Diverged(format!("non-finite value in {op} at epoch {epoch}"))
        }
        other => other,
    }
}

/// Fit a model to the train split. The result depends only on the configs
/// and seed, so equal inputs give bitwise identical parameters.
/// Shrink the final weight matrix until the median |z_i·z_j| over the
/// training edges is at most one. Freshly initialized sum-aggregation
/// encoders produce embedding dots that grow with depth and degree — message
/// passing correlates neighbouring rows, so each layer's sum grows like the
/// degree itself — which parks the starting logits deep in the flat tails of
/// the sigmoid, where descent either stalls or overshoots. One scalar on the
/// last layer moves them into the responsive range without changing any
/// ranking the initial model expresses.
fn calibrate_embedding_scale(model: &mut TrainedModel, g: &Graph) -> Result<()> {
    let last = match model.config.encoder {
        EncoderKind::Gin => format!("gin{}.mlp1.weight", model.config.layers - 1),
        EncoderKind::GcnVgae => "mu.weight".to_string(),
        EncoderKind::MeanAggregation => return Ok(()),
    };
    let z = model.embeddings(g)?;
    let mut dots: Vec<f64> = g
        .edges()
        .iter()
        .map(|&(u, v)| z.row(u).dot(&z.row(v)).abs())
        .collect();
    dots.sort_by(f64::total_cmp);
    let c = dots[dots.len() / 2];
    if c.is_finite() && c > 1.0 {
        let s = (1.0 / c).sqrt();
        *model.params.get_mut(&last).expect("validated shapes") *= s;
    }
    Ok(())
}

pub fn train(config: &ModelConfig, tc: &TrainConfig, split: &EdgeSplit) -> Result<TrainedModel> {
    if !(tc.lr > 0.0 && tc.lr.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "lr must be positive, got {}",
            tc.lr
        )));
    }
    if !(0.0..1.0).contains(&tc.momentum) {
        return Err(Error::InvalidArgument(format!(
            "momentum must lie in [0, 1), got {}",
            tc.momentum
        )));
    }
    if !(tc.kl_weight >= 0.0 && tc.kl_weight.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "kl_weight must be non-negative, got {}",
            tc.kl_weight
        )));
    }
    let g = &split.train_graph;
    if g.num_edges() == 0 {
        return Err(Error::InvalidGraph("training needs at least one edge".into()));
    }
    let total_pairs = g.num_nodes() * (g.num_nodes() - 1) / 2;
    let neg_count = g.num_edges().min(total_pairs - g.num_edges());
    if neg_count == 0 {
        return Err(Error::Degenerate(
            "complete graph leaves no negative pairs to sample".into(),
        ));
    }

    let mut model = TrainedModel::init(config.clone(), g.num_features(), tc.seed)?;
    calibrate_embedding_scale(&mut model, g)?;
    let mut velocity: BTreeMap<String, Mat> = model
        .params
        .iter()
        .map(|(k, m)| (k.clone(), Mat::zeros(m.dim())))
        .collect();
    let mut rng = rng_from(derive_seed(tc.seed, &[SEED_TRAIN]));

    for epoch in 0..tc.epochs {
        let (_, grads) = loss_pass(&model, g, neg_count, tc.kl_weight, &mut rng, true)
            .map_err(|e| diverged(e, epoch))?;
        for (name, grad) in grads {
            let v = velocity.get_mut(&name).expect("velocity tracks params");
            *v *= tc.momentum;
            *v += &grad;
            model
                .params
                .get_mut(&name)
                .expect("gradients track params")
                .scaled_add(-tc.lr, v);
        }
    }
    let (final_loss, _) = loss_pass(&model, g, neg_count, tc.kl_weight, &mut rng, false)
        .map_err(|e| diverged(e, tc.epochs))?;

    let (test_auc, test_accuracy) = if split.test_pos.is_empty() || split.test_neg.is_empty() {
        (None, None)
    } else {
        let pos = model.predict(g, &split.test_pos)?;
        let neg = model.predict(g, &split.test_neg)?;
        let auc = roc_auc(&pos, &neg)?;
        let hits = pos.iter().filter(|&&p| p > 0.5).count()
            + neg.iter().filter(|&&p| p <= 0.5).count();
        let acc = hits as f64 / (pos.len() + neg.len()) as f64;
        (Some(auc), Some(acc))
    };
    model.meta = Some(TrainMeta {
        epochs: tc.epochs,
        seed: tc.seed,
        final_loss,
        test_auc,
        test_accuracy,
    });
    Ok(model)
}
