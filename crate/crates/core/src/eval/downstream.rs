//! Node classification on a predicted structure: one graph-convolution layer
//! straight to class logits, softmax cross-entropy, Adam.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{sym_normalize, Adjacency};
use crate::numerics::{AdamConfig, AdamState, DenseMatrix, RngStream};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DownstreamConfig {
    pub train_fraction: f64,
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
}

impl Default for DownstreamConfig {
    fn default() -> Self {
        Self {
            train_fraction: 0.1,
            epochs: 200,
            lr: 0.01,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DownstreamResult {
    pub accuracy: f64,
    pub train_nodes: usize,
    pub test_nodes: usize,
    pub final_loss: f64,
}

/// Seeded split into (train, test) node indices, each sorted.
pub fn split_nodes(labels: &[usize], train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Parameter(format!("train fraction {train_fraction} must lie in (0, 1)")));
    }
    let n = labels.len();
    let take = ((train_fraction * n as f64).round() as usize).clamp(1, n.saturating_sub(1));
    if n < 2 {
        return Err(Error::Split("need at least two labeled nodes".into()));
    }
    let perm = RngStream::new(seed).permutation(n);
    let mut train = perm[..take].to_vec();
    let mut test = perm[take..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut seen = vec![false; classes];
    for &i in &train {
        seen[labels[i]] = true;
    }
    if let Some(c) = seen.iter().position(|s| !s) {
        return Err(Error::Split(format!(
            "class {c} has no training node under seed {seed}; pick another split seed"
        )));
    }
    Ok((train, test))
}

/// Mean cross-entropy over `train` for logits `px · w + b`, and its gradients.
pub fn classifier_objective(
    px: &DenseMatrix,
    labels: &[usize],
    train: &[usize],
    w: &DenseMatrix,
    b: &DenseMatrix,
) -> Result<(f64, DenseMatrix, DenseMatrix)> {
    let mut logits = px.matmul(w)?;
    logits.add_row_broadcast(b.as_slice())?;
    let c = w.cols();
    let inv = 1.0 / train.len() as f64;
    let mut dz = DenseMatrix::zeros(px.rows(), c);
    let mut loss = 0.0;
    for &i in train {
        let row = logits.row(i);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + row.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
        loss -= inv * (row[labels[i]] - lse);
        let g = dz.row_mut(i);
        for (k, gk) in g.iter_mut().enumerate() {
            *gk = inv * ((row[k] - lse).exp() - if k == labels[i] { 1.0 } else { 0.0 });
        }
    }
    let dw = px.t_matmul(&dz)?;
    let db = DenseMatrix::row_vector(&dz.col_sums())?;
    Ok((loss, dw, db))
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = k;
        }
    }
    best
}

/// Train on the seeded split and report test accuracy.
pub fn downstream_node_classification(
    structure: &Adjacency,
    x: &DenseMatrix,
    labels: &[usize],
    cfg: &DownstreamConfig,
) -> Result<DownstreamResult> {
    let n = x.rows();
    if structure.n() != n || labels.len() != n {
        return Err(Error::dim(
            "downstream_node_classification",
            format!("{n} feature rows, structure {}, {} labels", structure.n(), labels.len()),
        ));
    }
    if cfg.epochs == 0 || !(cfg.lr > 0.0) {
        return Err(Error::Parameter("classifier needs epochs ≥ 1 and a positive learning rate".into()));
    }
    let (train, test) = split_nodes(labels, cfg.train_fraction, cfg.seed)?;
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let px = sym_normalize(structure, true).matmul(x)?;

    let d = x.cols();
    let bound = (6.0 / (d + classes) as f64).sqrt();
    let mut w = RngStream::new(cfg.seed).derive(1).uniform_matrix(d, classes, -bound, bound);
    let mut b = DenseMatrix::zeros(1, classes);
    let adam = AdamConfig::with_lr(cfg.lr);
    let mut sw = AdamState::for_param(&w, adam);
    let mut sb = AdamState::for_param(&b, adam);
    let mut final_loss = f64::NAN;
    for _ in 0..cfg.epochs {
        let (loss, dw, db) = classifier_objective(&px, labels, &train, &w, &b)?;
        if !loss.is_finite() {
            return Err(Error::Numeric(format!("classifier loss is {loss}")));
        }
        sw.step(&mut w, &dw)?;
        sb.step(&mut b, &db)?;
        final_loss = loss;
    }
    let mut logits = px.matmul(&w)?;
    logits.add_row_broadcast(b.as_slice())?;
    let correct = test.iter().filter(|&&i| argmax(logits.row(i)) == labels[i]).count();
    Ok(DownstreamResult {
        accuracy: correct as f64 / test.len() as f64,
        train_nodes: train.len(),
        test_nodes: test.len(),
        final_loss,
    })
}
