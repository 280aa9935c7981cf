//! Overlap between the dominant left-singular subspaces of two matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{svd, DenseMatrix};

/// Singular values at or below this are treated as zero.
pub const SPECTRUM_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub singular_values_a: Vec<f64>,
    pub singular_values_r: Vec<f64>,
    pub rank_a: usize,
    pub rank_r: usize,
    /// Cosines of the principal angles between the retained subspaces.
    pub principal_cosines: Vec<f64>,
    /// Mean principal-angle cosine, in `[0, 1]`.
    pub alignment: f64,
    /// `‖(I - Û_r Û_rᵀ) Û_a‖_F`
    pub spanning_residual: f64,
    #[serde(skip)]
    pub basis_a: Option<DenseMatrix>,
    #[serde(skip)]
    pub basis_r: Option<DenseMatrix>,
}

pub fn spectrum_alignment(a: &DenseMatrix, r: &DenseMatrix) -> Result<SpectrumReport> {
    if a.shape() != r.shape() || !a.is_square() {
        return Err(Error::dim("spectrum_alignment", format!("{:?} vs {:?}", a.shape(), r.shape())));
    }
    let sa = svd(a)?;
    let sr = svd(r)?;
    let ua = sa.left_basis(SPECTRUM_TOL);
    let ur = sr.left_basis(SPECTRUM_TOL);
    let (principal_cosines, spanning_residual) = if ua.cols() == 0 || ur.cols() == 0 {
        (Vec::new(), ua.frobenius_norm())
    } else {
        let cross = ua.t_matmul(&ur)?;
        let mut cos = svd(&cross)?.s;
        cos.truncate(ua.cols().min(ur.cols()));
        cos.iter_mut().for_each(|c| *c = c.clamp(0.0, 1.0));
        let proj = ur.matmul(&cross.transpose())?;
        (cos, ua.sub(&proj)?.frobenius_norm())
    };
    let alignment = if principal_cosines.is_empty() {
        0.0
    } else {
        principal_cosines.iter().sum::<f64>() / principal_cosines.len() as f64
    };
    Ok(SpectrumReport {
        singular_values_a: sa.s,
        singular_values_r: sr.s,
        rank_a: ua.cols(),
        rank_r: ur.cols(),
        principal_cosines,
        alignment,
        spanning_residual,
        basis_a: Some(ua),
        basis_r: Some(ur),
    })
}
