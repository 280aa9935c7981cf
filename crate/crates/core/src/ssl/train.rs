//! Full-batch Adam loop around the contrastive objective.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::objective::{objective, ModelParams, ObjectiveOptions, ViewInputs};
use super::Discriminator;
use crate::augment::ViewPair;
use crate::encoder::{
    encode_nodes, read_checkpoint, write_checkpoint, Activation, Alignment, AlignmentKind, EncoderKind,
    EncoderParams, Propagator, DEFAULT_HIDDEN,
};
use crate::error::{Error, Result};
use crate::numerics::{AdamConfig, AdamState, DenseMatrix, RngStream};

// Child-stream tags of the training seed.
const STREAM_ENCODER_1: u64 = 1;
const STREAM_ENCODER_2: u64 = 2;
const STREAM_CRITIC: u64 = 3;
const STREAM_CORRUPTION: u64 = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
    pub hidden: usize,
    pub encoder: EncoderKind,
    pub activation: Activation,
    pub bias: bool,
    pub alignment: AlignmentKind,
    pub squash_summary: bool,
    pub symmetric_negatives: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            lr: 1e-3,
            seed: 0,
            hidden: DEFAULT_HIDDEN,
            encoder: EncoderKind::Gcn,
            activation: Activation::Relu,
            bias: true,
            alignment: AlignmentKind::Identity,
            squash_summary: false,
            symmetric_negatives: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Parameter("epochs must be at least 1".into()));
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(Error::Parameter(format!("learning rate {} must be positive", self.lr)));
        }
        if self.hidden == 0 {
            return Err(Error::Parameter("hidden size must be positive".into()));
        }
        self.activation.validate()
    }

    pub fn objective_options(&self) -> ObjectiveOptions {
        ObjectiveOptions {
            squash_summary: self.squash_summary,
            symmetric_negatives: self.symmetric_negatives,
        }
    }

    fn adam(&self) -> AdamConfig {
        AdamConfig::with_lr(self.lr)
    }

    /// Fresh parameters for `d` input features, drawn from the seed's child streams.
    pub fn init_params(&self, d: usize) -> Result<ModelParams> {
        let root = RngStream::new(self.seed);
        let enc = |tag| {
            EncoderParams::init(d, self.hidden, self.encoder, self.activation, self.bias, &mut root.derive(tag))
        };
        Ok(ModelParams {
            encoders: [enc(STREAM_ENCODER_1)?, enc(STREAM_ENCODER_2)?],
            discriminator: Discriminator::init(self.hidden, &mut root.derive(STREAM_CRITIC)),
            alignment: Alignment::init(self.alignment, self.hidden),
        })
    }
}

/// Corruption permutation for a given epoch; independent of how training was split into calls.
fn epoch_permutation(seed: u64, epoch: usize, n: usize) -> Vec<usize> {
    RngStream::new(seed)
        .derive(STREAM_CORRUPTION)
        .derive(epoch as u64)
        .permutation(n)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainState {
    pub config: TrainConfig,
    pub params: ModelParams,
    /// One Adam state per parameter block, in [`ModelParams::blocks`] order.
    pub optim: Vec<AdamState>,
    /// Loss evaluated before each epoch's update.
    pub loss_trace: Vec<f64>,
}

impl TrainState {
    pub fn new(config: TrainConfig, params: ModelParams) -> Self {
        let adam = config.adam();
        let optim = params.blocks().into_iter().map(|b| AdamState::for_param(b, adam)).collect();
        Self {
            config,
            params,
            optim,
            loss_trace: Vec::new(),
        }
    }

    pub fn epochs_completed(&self) -> usize {
        self.loss_trace.len()
    }
}

/// Training stopped early; `last_finite` is the state before the failing epoch
/// (absent when setup itself failed).
#[derive(Debug)]
pub struct TrainFailure {
    pub epoch: usize,
    pub last_finite: Option<Box<TrainState>>,
    pub source: Error,
}

impl fmt::Display for TrainFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "training aborted at epoch {}: {}", self.epoch, self.source)
    }
}

impl std::error::Error for TrainFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.source)
    }
}

impl From<TrainFailure> for Error {
    fn from(f: TrainFailure) -> Self {
        Error::Numeric(f.to_string())
    }
}

fn propagators(views: &ViewPair) -> [Propagator; 2] {
    [Propagator::new(views.view1.clone()), Propagator::new(views.view2.clone())]
}

fn check_inputs(x: &DenseMatrix, views: &ViewPair, params: &ModelParams) -> Result<()> {
    if views.n() != x.rows() || views.view2.rows() != x.rows() {
        return Err(Error::dim(
            "train",
            format!("{} feature rows, views of {} and {} nodes", x.rows(), views.n(), views.view2.rows()),
        ));
    }
    if params.encoders.iter().any(|e| e.in_dim() != x.cols()) {
        return Err(Error::dim(
            "train",
            format!("{} features, encoder input {}", x.cols(), params.encoders[0].in_dim()),
        ));
    }
    if x.rows() < 2 {
        return Err(Error::Parameter("training needs at least two nodes".into()));
    }
    Ok(())
}

/// Train from a fresh initialization for `cfg.epochs` epochs.
pub fn train(x: &DenseMatrix, views: &ViewPair, cfg: &TrainConfig) -> std::result::Result<TrainState, TrainFailure> {
    let setup = || -> Result<TrainState> {
        cfg.validate()?;
        Ok(TrainState::new(cfg.clone(), cfg.init_params(x.cols())?))
    };
    match setup() {
        Ok(state) => train_from(state, x, views, cfg.epochs),
        Err(source) => Err(TrainFailure {
            epoch: 0,
            last_finite: None,
            source,
        }),
    }
}

/// Continue `state` for `epochs` more epochs.
pub fn train_from(
    mut state: TrainState,
    x: &DenseMatrix,
    views: &ViewPair,
    epochs: usize,
) -> std::result::Result<TrainState, TrainFailure> {
    let fail = |epoch, state: &TrainState, source| TrainFailure {
        epoch,
        last_finite: Some(Box::new(state.clone())),
        source,
    };
    if let Err(e) = check_inputs(x, views, &state.params) {
        return Err(fail(state.epochs_completed(), &state, e));
    }
    let props = propagators(views);
    let opts = state.config.objective_options();
    let n = x.rows();
    for _ in 0..epochs {
        let epoch = state.epochs_completed();
        let perm = epoch_permutation(state.config.seed, epoch, n);
        let inputs = ViewInputs {
            x,
            views: [&props[0], &props[1]],
            perm: &perm,
        };
        let (loss, grads) = match objective(inputs, &state.params, opts) {
            Ok(v) => v,
            Err(e) => return Err(fail(epoch, &state, e)),
        };
        let mut next = state.params.clone();
        let mut optim = state.optim.clone();
        let step = next
            .blocks_mut()
            .into_iter()
            .zip(grads.blocks())
            .zip(optim.iter_mut())
            .try_for_each(|((p, g), o)| o.step(p, g));
        if let Err(e) = step {
            return Err(fail(epoch, &state, e));
        }
        if !next.all_finite() {
            return Err(fail(epoch, &state, Error::Numeric(format!("non-finite parameters after epoch {epoch}"))));
        }
        state.params = next;
        state.optim = optim;
        state.loss_trace.push(loss);
    }
    Ok(state)
}

/// `½ (F₁(X, view₁) + F₂(X, view₂))` on clean features, before alignment.
pub fn final_embeddings(x: &DenseMatrix, views: &ViewPair, state: &TrainState) -> Result<DenseMatrix> {
    check_inputs(x, views, &state.params)?;
    let props = propagators(views);
    let mut out = encode_nodes(x, &props[0], &state.params.encoders[0])?;
    out.add_assign(&encode_nodes(x, &props[1], &state.params.encoders[1])?)?;
    out.scale_in_place(0.5);
    Ok(out)
}

fn empty() -> DenseMatrix {
    DenseMatrix::zeros(0, 0)
}

/// Fixed six slots: `W₀, b₀, W₁, b₁, Φ, Q`, empty where a block is absent.
fn slots<'a>(params: &'a ModelParams, placeholder: &'a DenseMatrix) -> [&'a DenseMatrix; 6] {
    let [e0, e1] = &params.encoders;
    [
        &e0.weight,
        e0.bias.as_ref().unwrap_or(placeholder),
        &e1.weight,
        e1.bias.as_ref().unwrap_or(placeholder),
        &params.discriminator.phi,
        match &params.alignment {
            Alignment::Linear(q) => q,
            Alignment::Identity => placeholder,
        },
    ]
}

/// Write a checkpoint: six parameter slots, then first and second Adam moments
/// for each present block, a 1×1 step count, and the 1×T loss trace.
pub fn save_state<W: Write>(w: W, state: &TrainState) -> Result<()> {
    let placeholder = empty();
    let mut blocks: Vec<&DenseMatrix> = slots(&state.params, &placeholder).to_vec();
    for o in &state.optim {
        blocks.push(o.first_moment());
        blocks.push(o.second_moment());
    }
    let steps = DenseMatrix::filled(1, 1, state.optim.first().map_or(0, |o| o.steps()) as f64);
    let trace = if state.loss_trace.is_empty() {
        empty()
    } else {
        DenseMatrix::row_vector(&state.loss_trace)?
    };
    blocks.push(&steps);
    blocks.push(&trace);
    write_checkpoint(w, &blocks).map_err(|e| Error::io("<checkpoint>", e))
}

/// Read a checkpoint written by [`save_state`]; `config` supplies the non-numeric settings.
pub fn load_state<R: Read>(r: R, config: &TrainConfig) -> Result<TrainState> {
    let mut blocks = read_checkpoint(r)?.into_iter();
    let mut next = |what: &str| {
        blocks
            .next()
            .ok_or_else(|| Error::Degenerate(format!("checkpoint truncated before {what}")))
    };
    let opt = |m: DenseMatrix| (!m.is_empty()).then_some(m);
    let w0 = next("W0")?;
    let b0 = opt(next("b0")?);
    let w1 = next("W1")?;
    let b1 = opt(next("b1")?);
    let phi = next("phi")?;
    let q = opt(next("Q")?);
    if b0.is_some() != config.bias || q.is_some() != (config.alignment == AlignmentKind::Linear) {
        return Err(Error::Parameter("checkpoint layout does not match the configuration".into()));
    }
    let enc = |weight, bias| EncoderParams {
        kind: config.encoder,
        activation: config.activation,
        weight,
        bias,
    };
    let params = ModelParams {
        encoders: [enc(w0, b0), enc(w1, b1)],
        discriminator: Discriminator { phi },
        alignment: q.map_or(Alignment::Identity, Alignment::Linear),
    };
    let mut state = TrainState::new(config.clone(), params);
    let mut moments = Vec::with_capacity(state.optim.len());
    for _ in 0..state.optim.len() {
        moments.push((next("Adam moment")?, next("Adam moment")?));
    }
    let steps = next("step count")?.get(0, 0) as u64;
    let trace = next("loss trace")?.into_vec();
    let adam = config.adam();
    for ((o, (m, v)), p) in state.optim.iter_mut().zip(moments).zip(state.params.blocks()) {
        if m.shape() != p.shape() || v.shape() != p.shape() {
            return Err(Error::dim("load_state", format!("moment {:?} for block {:?}", m.shape(), p.shape())));
        }
        *o = AdamState::restore(m, v, steps, adam);
    }
    state.loss_trace = trace;
    Ok(state)
}

pub fn write_loss_csv(path: &Path, trace: &[f64]) -> Result<()> {
    let mut out = String::from("epoch,loss\n");
    for (i, l) in trace.iter().enumerate() {
        out.push_str(&format!("{},{}\n", i + 1, l));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
