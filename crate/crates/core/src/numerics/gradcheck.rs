use super::{DenseMatrix, RngStream};

/// Denominator floor for the relative error, so coordinates whose true
/// gradient is ~0 are judged on absolute error instead.
pub const REL_ERR_FLOOR: f64 = 1e-6;

/// Blocks up to this size are checked exhaustively; larger blocks get this
/// many coordinates sampled without replacement.
const COORDS_PER_BLOCK: usize = 200;

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    /// Worst relative error over every checked coordinate.
    pub max_relative_error: f64,
    /// Worst relative error per parameter block, in input order.
    pub per_block: Vec<f64>,
    pub coordinates_checked: usize,
}

/// Compare analytic gradients against central finite differences.
///
/// For each checked coordinate the relative error is
/// `|analytic - numeric| / max(|numeric|, REL_ERR_FLOOR)`.
pub fn finite_diff_check<F>(
    mut loss_fn: F,
    params: &[DenseMatrix],
    analytic: &[DenseMatrix],
    eps: f64,
    rng: &mut RngStream,
) -> GradCheckReport
where
    F: FnMut(&[DenseMatrix]) -> f64,
{
    assert_eq!(params.len(), analytic.len(), "one gradient per parameter block");
    let mut work: Vec<DenseMatrix> = params.to_vec();
    let mut per_block = Vec::with_capacity(params.len());
    let mut checked = 0;

    for (b, grad) in analytic.iter().enumerate() {
        assert_eq!(work[b].shape(), grad.shape(), "gradient shape for block {b}");
        let len = work[b].len();
        let coords: Vec<usize> = if len <= COORDS_PER_BLOCK {
            (0..len).collect()
        } else {
            let mut all = rng.permutation(len);
            all.truncate(COORDS_PER_BLOCK);
            all.sort_unstable();
            all
        };
        let mut worst: f64 = 0.0;
        for &c in &coords {
            let orig = work[b].as_slice()[c];
            work[b].as_mut_slice()[c] = orig + eps;
            let plus = loss_fn(&work);
            work[b].as_mut_slice()[c] = orig - eps;
            let minus = loss_fn(&work);
            work[b].as_mut_slice()[c] = orig;
            let numeric = (plus - minus) / (2.0 * eps);
            let a = grad.as_slice()[c];
            let rel = (a - numeric).abs() / numeric.abs().max(REL_ERR_FLOOR);
            worst = worst.max(if rel.is_nan() { f64::INFINITY } else { rel });
        }
        checked += coords.len();
        per_block.push(worst);
    }

    GradCheckReport {
        max_relative_error: per_block.iter().copied().fold(0.0, f64::max),
        per_block,
        coordinates_checked: checked,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_sq_norm(ps: &[DenseMatrix]) -> f64 {
        ps.iter()
            .map(|p| 0.5 * p.as_slice().iter().map(|v| v * v).sum::<f64>())
            .sum()
    }

    #[test]
    fn quadratic_loss_exact_gradient() {
        let mut rng = RngStream::new(9);
        let params = vec![rng.uniform_matrix(20, 15, -1.0, 1.0), rng.uniform_matrix(3, 3, -1.0, 1.0)];
        let grads = params.clone();
        let rep = finite_diff_check(half_sq_norm, &params, &grads, 1e-4, &mut rng);
        assert!(rep.max_relative_error <= 1e-6, "{rep:?}");
        // 300-entry block is sampled down, 9-entry block checked fully
        assert_eq!(rep.coordinates_checked, 200 + 9);
    }

    #[test]
    fn scaled_gradient_is_caught() {
        let mut rng = RngStream::new(10);
        let params = vec![rng.uniform_matrix(4, 4, 0.5, 1.0)];
        let grads = vec![params[0].scale(2.0)];
        let rep = finite_diff_check(half_sq_norm, &params, &grads, 1e-4, &mut rng);
        assert!((rep.max_relative_error - 1.0).abs() < 1e-6, "{rep:?}");
    }

    #[test]
    fn constant_loss_zero_gradient() {
        let mut rng = RngStream::new(11);
        let params = vec![rng.uniform_matrix(3, 3, -1.0, 1.0)];
        let grads = vec![DenseMatrix::zeros(3, 3)];
        let rep = finite_diff_check(|_| 3.25, &params, &grads, 1e-4, &mut rng);
        assert!(rep.max_relative_error <= 1e-4 / REL_ERR_FLOOR * f64::EPSILON);
    }
}
