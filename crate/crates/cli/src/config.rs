//! Flat key-value experiment configuration.
//!
//! Every key is optional; precedence is command-line flag, then file, then
//! the default below. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use slp_core::augment::{InitMethod, DEFAULT_ALPHAS};
use slp_core::encoder::{Activation, AlignmentKind, EncoderKind, DEFAULT_HIDDEN};
use slp_core::eval::DownstreamConfig;
use slp_core::graph::SyntheticSpec;
use slp_core::psc::SimilarityMetric;
use slp_core::ssl::TrainConfig;

use crate::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    ThreeSlp,
    PscNa,
    #[default]
    Both,
}

impl Mode {
    pub fn runs_three_slp(self) -> bool {
        matches!(self, Mode::ThreeSlp | Mode::Both)
    }

    pub fn runs_psc_na(self) -> bool {
        matches!(self, Mode::PscNa | Mode::Both)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    #[default]
    SimilarityWiring,
    Empty,
    Full,
    Random,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivationKind {
    #[default]
    Relu,
    Prelu,
    Identity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Dataset directory in the canonical layout; when absent the synthetic
    /// generator below is used.
    pub dataset: Option<PathBuf>,
    pub synthetic_n: usize,
    pub synthetic_classes: usize,
    pub synthetic_intra_p: f64,
    pub synthetic_inter_p: f64,
    pub synthetic_d: usize,
    pub synthetic_signal: f64,
    pub synthetic_seed: u64,

    pub init: InitKind,
    pub k: usize,
    /// Edge probability for `init = "random"`.
    pub random_p: f64,
    pub alpha1: f64,
    pub alpha2: f64,

    pub encoder: EncoderKind,
    pub activation: ActivationKind,
    /// Negative slope when `activation = "prelu"`.
    pub prelu_slope: f64,
    pub hidden: usize,
    pub bias: bool,
    pub alignment: AlignmentKind,
    pub squash_summary: bool,
    pub symmetric_negatives: bool,
    pub epochs: usize,
    pub lr: f64,

    pub metric: SimilarityMetric,
    pub mode: Mode,
    pub repeats: usize,
    pub seed: u64,
    pub eval_ratio: f64,
    /// Draw fresh evaluation pairs per repeat instead of one fixed sample.
    pub vary_eval_pairs: bool,
    /// Write all-pairs scores and predicted edges for each run.
    pub export_predictions: bool,
    pub checkpoints: bool,

    pub downstream: bool,
    pub downstream_train_fraction: f64,
    pub downstream_epochs: usize,
    pub downstream_lr: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let dc = DownstreamConfig::default();
        Self {
            dataset: None,
            synthetic_n: 200,
            synthetic_classes: 4,
            synthetic_intra_p: 0.3,
            synthetic_inter_p: 0.02,
            synthetic_d: 64,
            synthetic_signal: 0.3,
            synthetic_seed: 0,
            init: InitKind::SimilarityWiring,
            k: 5,
            random_p: 0.05,
            alpha1: DEFAULT_ALPHAS.0,
            alpha2: DEFAULT_ALPHAS.1,
            encoder: EncoderKind::Gcn,
            activation: ActivationKind::Relu,
            prelu_slope: 0.25,
            hidden: DEFAULT_HIDDEN,
            bias: true,
            alignment: AlignmentKind::Identity,
            squash_summary: false,
            symmetric_negatives: false,
            epochs: 200,
            lr: 1e-3,
            metric: SimilarityMetric::CosineDistance,
            mode: Mode::Both,
            repeats: 5,
            seed: 0,
            eval_ratio: 1.0,
            vary_eval_pairs: false,
            export_predictions: true,
            checkpoints: false,
            downstream: false,
            downstream_train_fraction: dc.train_fraction,
            downstream_epochs: dc.epochs,
            downstream_lr: dc.lr,
        }
    }
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(msg) => bad(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical TOML rendering; feeding it back yields an identical config.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(bad(format!("{name} = {v} must lie in [0, 1]")))
            }
        };
        let alpha = |name: &str, v: f64| {
            if v > 0.0 && v <= 1.0 {
                Ok(())
            } else {
                Err(bad(format!("{name} = {v} must lie in (0, 1]")))
            }
        };
        alpha("alpha1", self.alpha1)?;
        alpha("alpha2", self.alpha2)?;
        unit("random_p", self.random_p)?;
        if self.dataset.is_none() {
            self.synthetic_spec().validate().map_err(|e| bad(e.to_string()))?;
        }
        if self.k == 0 {
            return Err(bad("k must be at least 1"));
        }
        if self.hidden == 0 || self.epochs == 0 || self.repeats == 0 {
            return Err(bad("hidden, epochs and repeats must be positive"));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) || !(self.downstream_lr > 0.0) {
            return Err(bad("learning rates must be positive"));
        }
        if !(self.eval_ratio > 0.0 && self.eval_ratio.is_finite()) {
            return Err(bad(format!("eval_ratio = {} must be positive", self.eval_ratio)));
        }
        if !(self.downstream_train_fraction > 0.0 && self.downstream_train_fraction < 1.0) {
            return Err(bad("downstream_train_fraction must lie in (0, 1)"));
        }
        if self.downstream_epochs == 0 {
            return Err(bad("downstream_epochs must be positive"));
        }
        self.activation().validate().map_err(|e| bad(e.to_string()))?;
        Ok(())
    }

    pub fn activation(&self) -> Activation {
        match self.activation {
            ActivationKind::Relu => Activation::Relu,
            ActivationKind::Prelu => Activation::Prelu { slope: self.prelu_slope },
            ActivationKind::Identity => Activation::Identity,
        }
    }

    pub fn synthetic_spec(&self) -> SyntheticSpec {
        SyntheticSpec {
            n: self.synthetic_n,
            classes: self.synthetic_classes,
            intra_p: self.synthetic_intra_p,
            inter_p: self.synthetic_inter_p,
            d: self.synthetic_d,
            signal: self.synthetic_signal,
            seed: self.synthetic_seed,
        }
    }

    pub fn init_method(&self, seed: u64) -> InitMethod {
        match self.init {
            InitKind::SimilarityWiring => InitMethod::SimilarityWiring { k: self.k },
            InitKind::Empty => InitMethod::Empty,
            InitKind::Full => InitMethod::Full,
            InitKind::Random => InitMethod::Random { p: self.random_p, seed },
        }
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            lr: self.lr,
            seed,
            hidden: self.hidden,
            encoder: self.encoder,
            activation: self.activation(),
            bias: self.bias,
            alignment: self.alignment,
            squash_summary: self.squash_summary,
            symmetric_negatives: self.symmetric_negatives,
        }
    }

    pub fn downstream_config(&self, seed: u64) -> DownstreamConfig {
        DownstreamConfig {
            train_fraction: self.downstream_train_fraction,
            epochs: self.downstream_epochs,
            lr: self.downstream_lr,
            seed,
        }
    }

    /// Seed of the repeat with index `r`.
    pub fn run_seed(&self, r: usize) -> u64 {
        self.seed.wrapping_add(r as u64)
    }

    /// Seed of the evaluation-pair sample for repeat `r`.
    pub fn eval_seed(&self, r: usize) -> u64 {
        if self.vary_eval_pairs {
            self.run_seed(r)
        } else {
            self.seed
        }
    }
}

/// Command-line overrides, applied on top of a file or the defaults.
#[derive(Clone, Debug, Default, clap::Args)]
pub struct Overrides {
    /// Configuration file (flat TOML)
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dataset directory (features.tsv, edges.tsv, labels.tsv)
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// cosine_similarity, cosine_distance, euclidean, manhattan or correlation_distance
    #[arg(long)]
    pub metric: Option<SimilarityMetric>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub alpha1: Option<f64>,
    #[arg(long)]
    pub alpha2: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub repeats: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "eval-ratio")]
    pub eval_ratio: Option<f64>,
}

impl Overrides {
    pub fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => {$(
                if let Some(v) = &self.$f {
                    cfg.$f = v.clone();
                }
            )*};
        }
        set!(mode, metric, k, alpha1, alpha2, epochs, lr, hidden, repeats, seed, eval_ratio);
        if let Some(d) = &self.dataset {
            cfg.dataset = Some(d.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
