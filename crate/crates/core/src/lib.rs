//! Link prediction explainability toolkit.
//!
//! The crate trains small graph neural link predictors, attributes their
//! predictions to edges and node features with several explanation methods,
//! and evaluates those explanations against synthetic ground truth and
//! perturbation (insertion/deletion) curves.

pub mod error;
pub mod eval;
pub mod explain;
pub mod graph;
pub mod model;
pub mod rng;
pub mod synth;
pub mod tensor;

pub use error::{Error, Result};
pub use eval::{
    area_score, binarize, confusion, default_step, evaluate_ground_truth, evaluate_insdel,
    median, perturbation_curve, random_baseline, rank_descending, roc_auc, sample_std,
    AreaScore, BinaryMasks, ConfusionMatrix, Curve, CurveKind, CurveRecord, CurveSource,
    GtMetrics, GtRow, InsdelConfig, InsdelReport, InsdelRow, Subject, ThresholdRule,
};
pub use explain::{
    deconvolution, gnn_explainer, integrated_gradients, lrp, random_attribution, receptive_hops,
    Attribution, ExplainerKind, GnnExplainerConfig,
};
pub use graph::{build_graph, k_hop_subgraph, split_edges, Edge, EdgeSplit, Graph, Scope};
pub use model::{
    embedding_dim, expected_shapes, train, DecoderKind, EncoderKind, ModelConfig, TrainConfig,
    TrainMeta, TrainedModel,
};
pub use synth::{
    generate_sbm, generate_ws, GeneratorKind, GroundTruth, LabeledGraph, SbmConfig, WsConfig,
};
pub use tensor::{grad_check, GradCheck, Gradients, Mat, Mode, Tape, Var};
