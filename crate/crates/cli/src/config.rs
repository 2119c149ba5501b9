//! Run configuration: one TOML file drives the whole pipeline.
//!
//! Every knob has an explicit resolved value; output artifacts echo the
//! resolved configuration back so a run is never ambiguous about what
//! produced it. Unknown fields are rejected, which turns typos into
//! diagnostics naming the offending key.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use lpx_core::{
    ExplainerKind, GnnExplainerConfig, ModelConfig, SbmConfig, ThresholdRule, TrainConfig,
    WsConfig,
};

/// Stream tag for dataset generation.
const SEED_DATA: u64 = 6;
/// Stream tag for the train/test edge split.
const SEED_SPLIT: u64 = 7;

/// Fully describes one experiment; the `seed` fans out into per-stage
/// streams so stages stay reproducible independently of each other.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    /// Output directory; may instead come from `--out`. Never echoed into
    /// artifacts, so runs into different directories stay byte-identical.
    #[serde(default, skip_serializing)]
    pub out: Option<PathBuf>,
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub split: SplitConfig,
    pub model: ModelConfig,
    #[serde(default)]
    pub training: TrainingConfig,
    #[serde(default)]
    pub explain: ExplainConfig,
    #[serde(default)]
    pub evaluate: EvaluateConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    /// Fold command-line overrides in and pin the output directory.
    pub fn resolve(mut self, seed: Option<u64>, out: Option<PathBuf>) -> Result<RunConfig> {
        if let Some(s) = seed {
            self.seed = s;
        }
        if let Some(o) = out {
            self.out = Some(o);
        }
        if self.out.is_none() {
            bail!("no output directory: set `out` in the config or pass --out");
        }
        Ok(self)
    }

    pub fn out_dir(&self) -> &Path {
        self.out.as_deref().expect("resolve() pins the output directory")
    }

    pub fn data_seed(&self) -> u64 {
        lpx_core::rng::derive_seed(self.seed, &[SEED_DATA])
    }

    pub fn split_seed(&self) -> u64 {
        lpx_core::rng::derive_seed(self.seed, &[SEED_SPLIT])
    }

    /// Core training settings with the run seed folded in.
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.training.epochs,
            lr: self.training.lr,
            momentum: self.training.momentum,
            kl_weight: self.training.kl_weight,
            seed: self.seed,
        }
    }
}

/// What graph to run on: a generator or a pair of files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetConfig {
    Sbm { block_sizes: Vec<usize>, p_in: f64, p_out: f64 },
    WattsStrogatz { n: usize, k: usize, beta: f64 },
    Files { graph: PathBuf, features: PathBuf },
}

impl DatasetConfig {
    pub fn sbm(&self, seed: u64) -> Option<SbmConfig> {
        match self {
            DatasetConfig::Sbm { block_sizes, p_in, p_out } => Some(SbmConfig {
                block_sizes: block_sizes.clone(),
                p_in: *p_in,
                p_out: *p_out,
                seed,
            }),
            _ => None,
        }
    }

    pub fn ws(&self, seed: u64) -> Option<WsConfig> {
        match self {
            DatasetConfig::WattsStrogatz { n, k, beta } => {
                Some(WsConfig { n: *n, k: *k, beta: *beta, seed })
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitConfig {
    pub test_fraction: f64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig { test_fraction: 0.15 }
    }
}

/// Mirror of the core training hyper-parameters, minus the seed (which the
/// run-level seed provides).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingConfig {
    pub epochs: usize,
    pub lr: f64,
    pub momentum: f64,
    pub kl_weight: f64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        let d = TrainConfig::default();
        TrainingConfig { epochs: d.epochs, lr: d.lr, momentum: d.momentum, kl_weight: d.kl_weight }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExplainConfig {
    /// Methods to run, in output order.
    pub methods: Vec<ExplainerKind>,
    pub ig_steps: usize,
    pub lrp_epsilon: f64,
    /// Cap on how many test edges get explained; `None` explains them all.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_targets: Option<usize>,
    pub gnn_explainer: GnnExplainerConfig,
}

impl Default for ExplainConfig {
    fn default() -> Self {
        ExplainConfig {
            methods: ExplainerKind::ALL.to_vec(),
            ig_steps: 256,
            lrp_epsilon: 1e-4,
            max_targets: None,
            gnn_explainer: GnnExplainerConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    GroundTruth,
    Insdel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluateConfig {
    pub protocol: Protocol,
    /// Binarization rule for the ground-truth protocol.
    pub threshold: ThresholdRule,
    /// Random-baseline realizations for the insertion/deletion protocol.
    pub realizations: usize,
    /// Fixed perturbation batch size; `None` chooses per-scope defaults.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<usize>,
}

impl Default for EvaluateConfig {
    fn default() -> Self {
        EvaluateConfig {
            protocol: Protocol::GroundTruth,
            threshold: ThresholdRule::Fixed,
            realizations: 50,
            step: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use lpx_core::{DecoderKind, EncoderKind};

    const MINIMAL: &str = r#"
        seed = 7

        [dataset]
        kind = "sbm"
        block_sizes = [5, 5]
        p_in = 0.5
        p_out = 0.1

        [model]
        encoder = "gin"
        decoder = "inner_product"
    "#;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg: RunConfig = toml::from_str(MINIMAL).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.model.encoder, EncoderKind::Gin);
        assert_eq!(cfg.model.decoder, DecoderKind::InnerProduct);
        assert_eq!(cfg.split.test_fraction, 0.15);
        assert_eq!(cfg.explain.ig_steps, 256);
        assert_eq!(cfg.explain.methods.len(), 5);
        assert_eq!(cfg.evaluate.realizations, 50);
        assert!(cfg.out.is_none());
    }

    #[test]
    fn unknown_fields_are_named_in_the_error() {
        let bad = format!("{MINIMAL}\n[training]\nlearning_rate = 0.1\n");
        let err = toml::from_str::<RunConfig>(&bad).unwrap_err().to_string();
        assert!(err.contains("learning_rate"), "error was: {err}");
    }

    #[test]
    fn resolve_requires_an_output_directory() {
        let cfg: RunConfig = toml::from_str(MINIMAL).unwrap();
        assert!(cfg.clone().resolve(None, None).is_err());
        let resolved = cfg.resolve(Some(9), Some(PathBuf::from("/tmp/x"))).unwrap();
        assert_eq!(resolved.seed, 9);
        assert_eq!(resolved.out_dir(), Path::new("/tmp/x"));
    }

    #[test]
    fn seed_streams_differ_per_stage() {
        let cfg: RunConfig = toml::from_str(MINIMAL).unwrap();
        assert_ne!(cfg.data_seed(), cfg.split_seed());
        assert_ne!(cfg.data_seed(), cfg.seed);
        assert_eq!(cfg.train_config().seed, cfg.seed);
    }

    #[test]
    fn dataset_variants_round_trip_through_toml()  {
        let ws = r#"
            [dataset]
            kind = "watts_strogatz"
            n = 20
            k = 4
            beta = 0.1

            [model]
            encoder = "mean_aggregation"
            decoder = "cosine"
        "#;
        let cfg: RunConfig = toml::from_str(ws).unwrap();
        assert!(cfg.dataset.ws(0).is_some());
        assert!(cfg.dataset.sbm(0).is_none());

        let text = toml::to_string(&cfg).unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }
}
