use super::matrix::dot;
use super::DenseMatrix;
use crate::error::{Error, Result};

pub const SVD_MAX_SWEEPS: usize = 100;
/// Relative off-diagonal tolerance `|aᵢ·aⱼ| / (‖aᵢ‖‖aⱼ‖)` below which a column pair counts as orthogonal.
pub const SVD_OFF_DIAG_TOL: f64 = 1e-12;

/// Thin SVD `m = U · diag(s) · Vt` with `r = min(rows, cols)` components.
#[derive(Clone, Debug)]
pub struct Svd {
    /// rows × r, orthonormal columns.
    pub u: DenseMatrix,
    /// Descending, nonnegative.
    pub s: Vec<f64>,
    /// r × cols, orthonormal rows.
    pub vt: DenseMatrix,
    pub sweeps: usize,
}

impl Svd {
    pub fn reconstruct(&self) -> DenseMatrix {
        let mut us = self.u.clone();
        for i in 0..us.rows() {
            for (v, s) in us.row_mut(i).iter_mut().zip(&self.s) {
                *v *= s;
            }
        }
        us.matmul(&self.vt).expect("svd factor shapes agree")
    }

    /// Columns of U whose singular value exceeds `tol`.
    pub fn left_basis(&self, tol: f64) -> DenseMatrix {
        let keep = self.s.iter().take_while(|&&s| s > tol).count();
        DenseMatrix::from_fn(self.u.rows(), keep, |i, j| self.u.get(i, j))
    }
}

/// One-sided Jacobi SVD with a fixed cyclic sweep order.
pub fn svd(m: &DenseMatrix) -> Result<Svd> {
    if !m.all_finite() {
        return Err(Error::Numeric("svd input has non-finite entries".into()));
    }
    if m.rows() >= m.cols() {
        let (u, s, v, sweeps) = jacobi_tall(m)?;
        Ok(Svd {
            u,
            s,
            vt: v.transpose(),
            sweeps,
        })
    } else {
        let (u, s, v, sweeps) = jacobi_tall(&m.transpose())?;
        Ok(Svd {
            u: v,
            s,
            vt: u.transpose(),
            sweeps,
        })
    }
}

/// rows >= cols. Returns (U rows×cols, s, V cols×cols, sweeps).
fn jacobi_tall(m: &DenseMatrix) -> Result<(DenseMatrix, Vec<f64>, DenseMatrix, usize)> {
    let (rows, cols) = m.shape();
    // column-major working copies
    let mut a: Vec<Vec<f64>> = (0..cols).map(|j| m.col(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..cols)
        .map(|j| {
            let mut e = vec![0.0; cols];
            e[j] = 1.0;
            e
        })
        .collect();

    let mut sweeps = 0;
    let mut residual = 0.0;
    let mut converged = cols < 2;
    while !converged && sweeps < SVD_MAX_SWEEPS {
        sweeps += 1;
        let mut rotated = false;
        residual = 0.0;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let alpha = dot(&a[p], &a[p]);
                let beta = dot(&a[q], &a[q]);
                let gamma = dot(&a[p], &a[q]);
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let off = gamma.abs() / (alpha * beta).sqrt();
                residual = f64::max(residual, off);
                if off <= SVD_OFF_DIAG_TOL {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut a, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::Convergence {
            op: "svd",
            iterations: sweeps,
            residual,
        });
    }

    let norms: Vec<f64> = a.iter().map(|c| dot(c, c).sqrt()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));

    let scale = norms.iter().copied().fold(0.0, f64::max);
    let null_tol = scale * f64::EPSILON * rows.max(cols) as f64;
    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(cols);
    let mut s = Vec::with_capacity(cols);
    let mut v_cols = Vec::with_capacity(cols);
    let mut missing = Vec::new();
    for &j in &order {
        let sigma = norms[j];
        if sigma > null_tol && sigma > 0.0 {
            u_cols.push(a[j].iter().map(|x| x / sigma).collect());
            s.push(sigma);
        } else {
            missing.push(u_cols.len());
            u_cols.push(Vec::new());
            s.push(0.0);
        }
        v_cols.push(v[j].clone());
    }
    complete_basis(&mut u_cols, &missing, rows);

    let u = DenseMatrix::from_fn(rows, cols, |i, j| u_cols[j][i]);
    let v = DenseMatrix::from_fn(cols, cols, |i, j| v_cols[j][i]);
    Ok((u, s, v, sweeps))
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(q);
    for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
        let (xp, yq) = (*x, *y);
        *x = c * xp - s * yq;
        *y = s * xp + c * yq;
    }
}

/// Fill the empty slots in `cols` with unit vectors orthogonal to the rest
/// (Gram–Schmidt against standard basis candidates, twice for stability).
fn complete_basis(cols: &mut [Vec<f64>], missing: &[usize], dim: usize) {
    let mut candidate = 0;
    for &slot in missing {
        while candidate < dim {
            let mut e = vec![0.0; dim];
            e[candidate] = 1.0;
            candidate += 1;
            for _ in 0..2 {
                for (k, c) in cols.iter().enumerate() {
                    if k == slot || c.is_empty() {
                        continue;
                    }
                    let proj = dot(&e, c);
                    e.iter_mut().zip(c).for_each(|(x, y)| *x -= proj * y);
                }
            }
            let norm = dot(&e, &e).sqrt();
            if norm > 1e-6 {
                e.iter_mut().for_each(|x| *x /= norm);
                cols[slot] = e;
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RngStream;

    fn orthonormality_residual(q: &DenseMatrix) -> f64 {
        let g = q.t_matmul(q).unwrap();
        g.max_abs_diff(&DenseMatrix::identity(g.rows()))
    }

    fn check(m: &DenseMatrix) {
        let d = svd(m).unwrap();
        assert!(d.reconstruct().max_abs_diff(m) <= 1e-8);
        assert!(orthonormality_residual(&d.u) <= 1e-8);
        assert!(orthonormality_residual(&d.vt.transpose()) <= 1e-8);
        assert!(d.s.windows(2).all(|w| w[0] >= w[1]));
        assert!(d.s.iter().all(|&s| s >= 0.0));
    }

    #[test]
    fn diagonal_and_identity() {
        let d = svd(&DenseMatrix::from_diag(&[3.0, 2.0])).unwrap();
        assert_eq!(d.s, vec![3.0, 2.0]);
        let d = svd(&DenseMatrix::from_diag(&[2.0, 3.0])).unwrap();
        assert_eq!(d.s, vec![3.0, 2.0]);
        let d = svd(&DenseMatrix::identity(4)).unwrap();
        assert!(d.s.iter().all(|&s| s == 1.0));
    }

    #[test]
    fn seeded_rectangular_shapes() {
        let mut rng = RngStream::new(77);
        for (r, c) in [(4, 3), (3, 4), (10, 10), (1, 5), (6, 1)] {
            check(&rng.uniform_matrix(r, c, -1.0, 1.0));
        }
    }

    #[test]
    fn rank_deficient_still_orthonormal() {
        let mut rng = RngStream::new(78);
        let a = rng.normal_matrix(6, 2);
        let b = rng.normal_matrix(2, 5);
        let m = a.matmul(&b).unwrap();
        check(&m);
        check(&DenseMatrix::zeros(4, 3));
        let d = svd(&m).unwrap();
        assert_eq!(d.left_basis(1e-10).cols(), 2);
    }

    #[test]
    fn transpose_has_same_spectrum() {
        let mut rng = RngStream::new(79);
        let m = rng.normal_matrix(7, 4);
        let a = svd(&m).unwrap().s;
        let b = svd(&m.transpose()).unwrap().s;
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-8);
        }
    }
}
