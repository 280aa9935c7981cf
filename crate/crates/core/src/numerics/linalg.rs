use super::matrix::dot;
use super::{DenseMatrix, RngStream};
use crate::error::{Error, Result};

/// Absolute pivot magnitude below which LU declares the matrix singular.
pub const SINGULAR_PIVOT_TOL: f64 = 1e-12;

/// Inverse by LU factorization with partial pivoting.
pub fn lu_inverse(m: &DenseMatrix) -> Result<DenseMatrix> {
    if !m.is_square() {
        return Err(Error::dim("lu_inverse", format!("non-square {:?}", m.shape())));
    }
    let n = m.rows();
    let mut lu = m.clone();
    let mut perm: Vec<usize> = (0..n).collect();

    for k in 0..n {
        let (p, mag) = (k..n)
            .map(|i| (i, lu.get(i, k).abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if mag < SINGULAR_PIVOT_TOL {
            return Err(Error::Singular {
                pivot: k,
                magnitude: mag,
            });
        }
        if p != k {
            perm.swap(p, k);
            let data = lu.as_mut_slice();
            for j in 0..n {
                data.swap(p * n + j, k * n + j);
            }
        }
        let pivot = lu.get(k, k);
        let data = lu.as_mut_slice();
        let (head, tail) = data.split_at_mut((k + 1) * n);
        let row_k = &head[k * n..];
        for row_i in tail.chunks_mut(n) {
            let f = row_i[k] / pivot;
            row_i[k] = f;
            if f != 0.0 {
                for j in (k + 1)..n {
                    row_i[j] -= f * row_k[j];
                }
            }
        }
    }

    // Solve L U X = P I row by row of the transposed problem: build X column
    // by column into a transposed buffer so inner loops stay contiguous.
    let mut inv_t = DenseMatrix::zeros(n, n);
    let mut y = vec![0.0; n];
    for col in 0..n {
        // forward substitution, L has unit diagonal
        for i in 0..n {
            let rhs = if perm[i] == col { 1.0 } else { 0.0 };
            y[i] = rhs - dot(&lu.row(i)[..i], &y[..i]);
        }
        // back substitution
        for i in (0..n).rev() {
            let row = lu.row(i);
            let s = dot(&row[i + 1..], &y[i + 1..]);
            y[i] = (y[i] - s) / row[i];
        }
        inv_t.row_mut(col).copy_from_slice(&y);
    }
    Ok(inv_t.transpose())
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky(m: &DenseMatrix) -> Result<DenseMatrix> {
    if !m.is_square() {
        return Err(Error::dim("cholesky", format!("non-square {:?}", m.shape())));
    }
    let n = m.rows();
    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let d = m.get(j, j) - dot(&l.row(j)[..j], &l.row(j)[..j]);
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::Degenerate(format!(
                "matrix is not positive definite (pivot {j} = {d:e})"
            )));
        }
        let djj = d.sqrt();
        l.set(j, j, djj);
        for i in (j + 1)..n {
            let s = m.get(i, j) - dot(&l.row(i)[..j], &l.row(j)[..j]);
            l.set(i, j, s / djj);
        }
    }
    Ok(l)
}

/// Spectral radius of a symmetric matrix by power iteration.
///
/// Runs until the Rayleigh estimate moves less than `tol` or `max_iter` is hit.
pub fn power_iteration_spectral_radius(
    m: &DenseMatrix,
    rng: &mut RngStream,
    max_iter: usize,
    tol: f64,
) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::dim(
            "power_iteration",
            format!("non-square {:?}", m.shape()),
        ));
    }
    let n = m.rows();
    if n == 0 {
        return Ok(0.0);
    }
    let mut v: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
    let mut estimate = 0.0;
    for _ in 0..max_iter {
        let norm = dot(&v, &v).sqrt();
        if norm == 0.0 {
            return Ok(0.0);
        }
        v.iter_mut().for_each(|x| *x /= norm);
        // iterate with M² so a ±λ pair does not oscillate
        let w = m.matvec(&v)?;
        let w2 = m.matvec(&w)?;
        let next = dot(&v, &w2).max(0.0).sqrt();
        v = w2;
        if (next - estimate).abs() <= tol {
            return Ok(next);
        }
        estimate = next;
    }
    Ok(estimate)
}
