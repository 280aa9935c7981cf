//! Cross-checks against an independent dense linear-algebra implementation.

use nalgebra::DMatrix;
use slp_core::augment::{ppr_diffuse, DiffusionMode};
use slp_core::eval::spectrum_alignment;
use slp_core::graph::{sym_normalize, Adjacency};
use slp_core::{DenseMatrix, RngStream};

fn to_na(m: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

fn random_graph(seed: u64, n: usize, p: f64) -> Adjacency {
    let mut rng = RngStream::new(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.bernoulli(p) {
                edges.push((u, v));
            }
        }
    }
    Adjacency::from_edges(n, &edges).unwrap()
}

#[test]
fn closed_form_diffusion_matches_direct_inverse() {
    for seed in 0..5 {
        let a = random_graph(seed, 30, 0.15);
        let t = to_na(&sym_normalize(&a, false));
        for alpha in [0.05, 0.2, 0.4] {
            let m = DMatrix::identity(30, 30) - t.clone() * (1.0 - alpha);
            let expected = m.try_inverse().unwrap() * alpha;
            let got = ppr_diffuse(&a, alpha, DiffusionMode::ClosedForm).unwrap().matrix;
            let diff = (to_na(&got) - expected).abs().max();
            assert!(diff <= 1e-10, "seed {seed}, alpha {alpha}: {diff:e}");
        }
    }
}

/// Cosines of principal angles via an independent SVD.
fn principal_cosines(a: &DenseMatrix, r: &DenseMatrix) -> Vec<f64> {
    let basis = |m: &DenseMatrix| {
        let svd = to_na(m).svd(true, false);
        let u = svd.u.unwrap();
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] > 1e-10)
            .collect();
        u.select_columns(&keep)
    };
    let ua = basis(a);
    let ur = basis(r);
    let mut s: Vec<f64> = (ua.transpose() * ur).svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

#[test]
fn spectrum_alignment_matches_principal_angles() {
    let mut rng = RngStream::new(33);
    for case in 0..5 {
        // low-rank 10×10 pairs so the retained subspaces are proper
        let fa = rng.normal_matrix(10, 4 + case % 3);
        let fr = rng.normal_matrix(10, 5);
        let a = fa.matmul_t(&fa).unwrap();
        let r = fr.matmul_t(&fr).unwrap();
        let rep = spectrum_alignment(&a, &r).unwrap();
        let oracle = principal_cosines(&a, &r);
        assert_eq!(rep.principal_cosines.len(), oracle.len());
        for (x, y) in rep.principal_cosines.iter().zip(&oracle) {
            assert!((x - y).abs() <= 1e-8, "{x} vs {y}");
        }
        let mean = oracle.iter().sum::<f64>() / oracle.len() as f64;
        assert!((rep.alignment - mean).abs() <= 1e-8);
    }
}
