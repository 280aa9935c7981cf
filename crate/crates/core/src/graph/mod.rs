//! Attributed graphs with an evaluation-only edge set.
//!
//! The prediction pipeline only ever sees an [`EdgelessView`]: node count,
//! features and name. Ground-truth edges stay on [`AttributedGraph`] behind
//! [`AttributedGraph::truth_edges_for_evaluation`], which counts its reads so
//! tests can prove the pipeline never asked for them.

mod io;
mod synthetic;

use std::sync::atomic::{AtomicUsize, Ordering};

pub use io::{load_dataset, save_dataset, write_edges_tsv};
pub use synthetic::{generate_synthetic, SyntheticSpec};

use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;

/// Unordered node pair stored as `(min, max)`.
pub type Edge = (usize, usize);

#[derive(Debug)]
pub struct AttributedGraph {
    name: String,
    features: DenseMatrix,
    truth_edges: Option<Vec<Edge>>,
    labels: Option<Vec<usize>>,
    truth_reads: AtomicUsize,
}

impl Clone for AttributedGraph {
    fn clone(&self) -> Self {
        Self {
            name: self.name.clone(),
            features: self.features.clone(),
            truth_edges: self.truth_edges.clone(),
            labels: self.labels.clone(),
            truth_reads: AtomicUsize::new(0),
        }
    }
}

impl PartialEq for AttributedGraph {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.features == other.features
            && self.truth_edges == other.truth_edges
            && self.labels == other.labels
    }
}

/// What the prediction pipeline is allowed to see.
#[derive(Clone, Copy, Debug)]
pub struct EdgelessView<'a> {
    pub name: &'a str,
    pub features: &'a DenseMatrix,
}

impl EdgelessView<'_> {
    pub fn n(&self) -> usize {
        self.features.rows()
    }
}

impl AttributedGraph {
    /// Builds a graph, canonicalizing edges to sorted unique `(min, max)` pairs.
    pub fn new(
        name: impl Into<String>,
        features: DenseMatrix,
        truth_edges: Option<Vec<Edge>>,
        labels: Option<Vec<usize>>,
    ) -> Result<Self> {
        let n = features.rows();
        let truth_edges = match truth_edges {
            Some(edges) => Some(canonical_edges(n, edges)?),
            None => None,
        };
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(Error::dim(
                    "AttributedGraph::new",
                    format!("{} labels for {n} nodes", l.len()),
                ));
            }
        }
        Ok(Self {
            name: name.into(),
            features,
            truth_edges,
            labels,
            truth_reads: AtomicUsize::new(0),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.features.rows()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }

    pub fn features(&self) -> &DenseMatrix {
        &self.features
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn num_classes(&self) -> Option<usize> {
        self.labels
            .as_ref()
            .map(|l| l.iter().copied().max().map_or(0, |m| m + 1))
    }

    pub fn has_truth_edges(&self) -> bool {
        self.truth_edges.is_some()
    }

    pub fn edgeless(&self) -> EdgelessView<'_> {
        EdgelessView {
            name: &self.name,
            features: &self.features,
        }
    }

    /// Ground-truth edges. Only evaluation code should call this.
    pub fn truth_edges_for_evaluation(&self) -> Option<&[Edge]> {
        self.truth_reads.fetch_add(1, Ordering::Relaxed);
        self.truth_edges.as_deref()
    }

    /// How many times the ground-truth edges have been requested.
    pub fn truth_edge_reads(&self) -> usize {
        self.truth_reads.load(Ordering::Relaxed)
    }
}

/// Sorted, deduplicated `(min, max)` edge list; rejects self-pairs and out-of-range endpoints.
pub fn canonical_edges(n: usize, edges: Vec<Edge>) -> Result<Vec<Edge>> {
    let mut out = Vec::with_capacity(edges.len());
    for (u, v) in edges {
        if u >= n || v >= n {
            return Err(Error::Parameter(format!(
                "edge ({u}, {v}) has an endpoint outside 0..{n}"
            )));
        }
        if u == v {
            return Err(Error::Parameter(format!("self-pair ({u}, {u}) in edge set")));
        }
        out.push((u.min(v), u.max(v)));
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Symmetric adjacency (binary or weighted, nonnegative).
#[derive(Clone, Debug, PartialEq)]
pub struct Adjacency(DenseMatrix);

pub const SYMMETRY_TOL: f64 = 1e-12;

impl Adjacency {
    pub fn new(m: DenseMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::dim("Adjacency::new", format!("non-square {:?}", m.shape())));
        }
        let r = m.symmetry_residual();
        if r > SYMMETRY_TOL {
            return Err(Error::Parameter(format!(
                "adjacency is not symmetric (residual {r:e})"
            )));
        }
        if m.as_slice().iter().any(|&v| v < 0.0) {
            return Err(Error::Parameter("adjacency has negative entries".into()));
        }
        Ok(Self(m))
    }

    pub fn empty(n: usize) -> Self {
        Self(DenseMatrix::zeros(n, n))
    }

    pub fn from_edges(n: usize, edges: &[Edge]) -> Result<Self> {
        let mut m = DenseMatrix::zeros(n, n);
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Parameter(format!(
                    "edge ({u}, {v}) has an endpoint outside 0..{n}"
                )));
            }
            if u != v {
                m.set(u, v, 1.0);
                m.set(v, u, 1.0);
            }
        }
        Ok(Self(m))
    }

    pub fn n(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.0
    }

    pub fn degrees(&self) -> Vec<f64> {
        self.0.row_sums()
    }

    /// Upper-triangle pairs with a nonzero entry.
    pub fn edges(&self) -> Vec<Edge> {
        let n = self.n();
        let mut out = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                if self.0.get(u, v) != 0.0 {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }

    /// Fraction of off-diagonal pairs that are connected.
    pub fn density(&self) -> f64 {
        let n = self.n();
        if n < 2 {
            return 0.0;
        }
        self.edge_count() as f64 / (n * (n - 1) / 2) as f64
    }
}

/// Diagonal matrix of row sums.
pub fn degree_matrix(a: &Adjacency) -> DenseMatrix {
    DenseMatrix::from_diag(&a.degrees())
}

/// `D^{-1/2} (A [+ I]) D^{-1/2}` with `D` the degrees of the (looped) matrix.
///
/// Zero-degree nodes get all-zero rows and columns.
pub fn sym_normalize(a: &Adjacency, add_self_loops: bool) -> DenseMatrix {
    let n = a.n();
    let mut m = a.matrix().clone();
    if add_self_loops {
        for i in 0..n {
            m.set(i, i, m.get(i, i) + 1.0);
        }
    }
    let inv_sqrt: Vec<f64> = m
        .row_sums()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
        .collect();
    for i in 0..n {
        let di = inv_sqrt[i];
        for (j, v) in m.row_mut(i).iter_mut().enumerate() {
            *v *= di * inv_sqrt[j];
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{power_iteration_spectral_radius, RngStream};

    fn path2() -> Adjacency {
        Adjacency::from_edges(2, &[(0, 1)]).unwrap()
    }

    #[test]
    fn degree_matrices() {
        assert_eq!(degree_matrix(&path2()), DenseMatrix::identity(2));
        assert_eq!(degree_matrix(&Adjacency::empty(3)), DenseMatrix::zeros(3, 3));
        let tri = Adjacency::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(degree_matrix(&tri), DenseMatrix::from_diag(&[2.0, 2.0, 2.0]));
    }

    #[test]
    fn normalization_examples() {
        let with = sym_normalize(&path2(), true);
        assert!(with.max_abs_diff(&DenseMatrix::filled(2, 2, 0.5)) < 1e-15);
        let without = sym_normalize(&path2(), false);
        let expected = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(without, expected);
    }

    #[test]
    fn isolated_node_is_inert() {
        let a = Adjacency::from_edges(3, &[(0, 1)]).unwrap();
        let t = sym_normalize(&a, false);
        assert!(t.row(2).iter().all(|&v| v == 0.0));
        assert!(t.col(2).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn normalized_spectral_radius_at_most_one() {
        let mut rng = RngStream::new(21);
        for trial in 0..5 {
            let n = 30;
            let mut edges = Vec::new();
            for u in 0..n {
                for v in (u + 1)..n {
                    if rng.bernoulli(0.1 + 0.1 * trial as f64) {
                        edges.push((u, v));
                    }
                }
            }
            let a = Adjacency::from_edges(n, &edges).unwrap();
            for loops in [false, true] {
                let t = sym_normalize(&a, loops);
                let rho = power_iteration_spectral_radius(&t, &mut rng, 5000, 1e-12).unwrap();
                assert!(rho <= 1.0 + 1e-9, "rho = {rho}");
            }
        }
    }

    #[test]
    fn edges_are_canonicalized() {
        let g = AttributedGraph::new(
            "t",
            DenseMatrix::zeros(3, 1),
            Some(vec![(1, 0), (0, 1), (2, 1)]),
            None,
        )
        .unwrap();
        assert_eq!(g.truth_edges_for_evaluation().unwrap(), &[(0, 1), (1, 2)]);
        assert_eq!(g.truth_edge_reads(), 1);
        assert!(AttributedGraph::new("t", DenseMatrix::zeros(2, 1), Some(vec![(0, 2)]), None).is_err());
        assert!(AttributedGraph::new("t", DenseMatrix::zeros(2, 1), Some(vec![(1, 1)]), None).is_err());
    }

    #[test]
    fn adjacency_rejects_asymmetry() {
        let m = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(Adjacency::new(m).is_err());
    }
}
