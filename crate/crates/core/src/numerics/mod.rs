//! Dense linear algebra and optimization kernels.
//!
//! Everything above this module speaks [`DenseMatrix`]. Reductions run in a
//! fixed order so a given seed reproduces the same bits regardless of how
//! many independent runs execute side by side.

mod adam;
mod gradcheck;
mod kmeans;
mod linalg;
mod matrix;
mod rng;
mod sparse;
mod svd;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use gradcheck::{finite_diff_check, GradCheckReport, REL_ERR_FLOOR};
pub use kmeans::{kmeans_1d, KMeans1d};
pub use linalg::{cholesky, lu_inverse, power_iteration_spectral_radius, SINGULAR_PIVOT_TOL};
pub use matrix::DenseMatrix;
pub use rng::RngStream;
pub use sparse::CsrMatrix;
pub use svd::{svd, Svd, SVD_MAX_SWEEPS, SVD_OFF_DIAG_TOL};

/// Numerically stable logistic function.
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(logistic(x))` without underflow for large negative `x`.
pub fn log_logistic(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}
