//! Fixture builders shared by the benchmark targets.

use lpx_core::{
    generate_sbm, split_edges, train, DecoderKind, Edge, EdgeSplit, EncoderKind, Graph,
    ModelConfig, SbmConfig, TrainConfig, TrainedModel,
};

/// Two-block SBM sized so a single training or explanation call is
/// measurable while a full benchmark run stays short.
pub fn sbm_split() -> EdgeSplit {
    let lg = generate_sbm(&SbmConfig {
        block_sizes: vec![20, 20],
        p_in: 0.3,
        p_out: 0.05,
        seed: 7,
    })
    .expect("benchmark graph generates");
    split_edges(&lg.graph, 0.15, 8).expect("benchmark split succeeds")
}

pub fn gin_config() -> ModelConfig {
    ModelConfig {
        hidden_dim: 16,
        embed_dim: 8,
        ..ModelConfig::new(EncoderKind::Gin, DecoderKind::InnerProduct)
    }
}

pub fn vgae_config() -> ModelConfig {
    ModelConfig {
        hidden_dim: 16,
        embed_dim: 8,
        ..ModelConfig::new(EncoderKind::GcnVgae, DecoderKind::InnerProduct)
    }
}

pub fn train_config(epochs: usize) -> TrainConfig {
    TrainConfig { epochs, lr: 0.005, seed: 9, ..TrainConfig::default() }
}

/// A trained model plus its training graph and one held-out target edge,
/// ready for explainer calls.
pub fn trained_fixture() -> (TrainedModel, Graph, Edge) {
    let split = sbm_split();
    let model =
        train(&gin_config(), &train_config(100), &split).expect("benchmark training converges");
    let target = split.test_pos[0];
    (model, split.train_graph, target)
}
