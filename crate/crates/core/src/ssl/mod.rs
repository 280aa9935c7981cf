//! Dual-view cross-scale contrastive training.
//!
//! Each view has its own encoder. Node representations of one view are scored
//! against the mean-pooled summary of the other view by a shared bilinear
//! discriminator; row-shuffled features supply the negatives.

mod objective;
mod train;

pub use objective::{objective, objective_loss, ModelGrads, ModelParams, ObjectiveOptions, ViewInputs};
pub use train::{
    final_embeddings, load_state, save_state, train, train_from, write_loss_csv, TrainConfig,
    TrainFailure, TrainState,
};

use crate::error::{Error, Result};
use crate::numerics::{logistic, DenseMatrix, RngStream};

/// Row-shuffled copy of `x` and the permutation used (row `i` of the output is row `perm[i]` of `x`).
pub fn corrupt(x: &DenseMatrix, rng: &mut RngStream) -> Result<(DenseMatrix, Vec<usize>)> {
    if x.rows() < 2 {
        return Err(Error::Parameter("corruption needs at least two nodes".into()));
    }
    let perm = rng.permutation(x.rows());
    Ok((x.gather_rows(&perm)?, perm))
}

/// Bilinear critic `Φ`, shared between both view terms.
#[derive(Clone, Debug, PartialEq)]
pub struct Discriminator {
    pub phi: DenseMatrix,
}

impl Discriminator {
    /// Uniform in `±√(6 / 2h)`.
    pub fn init(h: usize, rng: &mut RngStream) -> Self {
        let bound = (3.0 / h as f64).sqrt();
        Self {
            phi: rng.uniform_matrix(h, h, -bound, bound),
        }
    }

    pub fn logit(&self, summary: &[f64], node: &[f64]) -> Result<f64> {
        let h = self.phi.rows();
        if !self.phi.is_square() || summary.len() != h || node.len() != h {
            return Err(Error::dim(
                "discriminate",
                format!(
                    "phi {:?}, summary {}, node {}",
                    self.phi.shape(),
                    summary.len(),
                    node.len()
                ),
            ));
        }
        let a = self.phi.matvec(summary)?;
        Ok(node.iter().zip(&a).map(|(x, y)| x * y).sum())
    }
}

/// `logistic(h_vᵀ Φ h_g)`.
pub fn discriminate(summary: &[f64], node: &[f64], d: &Discriminator) -> Result<f64> {
    Ok(logistic(d.logit(summary, node)?))
}
