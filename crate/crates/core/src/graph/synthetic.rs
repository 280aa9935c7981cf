use serde::{Deserialize, Serialize};

use super::AttributedGraph;
use crate::error::{Error, Result};
use crate::numerics::{DenseMatrix, RngStream};

/// Stochastic-block-model graph with class-dependent Gaussian features.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n: usize,
    pub classes: usize,
    pub intra_p: f64,
    pub inter_p: f64,
    pub d: usize,
    /// Weight of the class mean; noise is weighted by `1 - signal`.
    pub signal: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.classes < 2 {
            return Err(Error::Parameter(format!("classes = {} (need >= 2)", self.classes)));
        }
        for (name, p) in [("intra_p", self.intra_p), ("inter_p", self.inter_p), ("signal", self.signal)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Parameter(format!("{name} = {p} is outside [0, 1]")));
            }
        }
        if self.n == 0 || self.d == 0 {
            return Err(Error::Parameter("n and d must be positive".into()));
        }
        Ok(())
    }
}

/// Node `i` belongs to class `i % classes`. Class means are standard normal
/// vectors; row `i` is `signal * mean[class] + (1 - signal) * noise`.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<AttributedGraph> {
    spec.validate()?;
    let root = RngStream::new(spec.seed);
    let mut mean_rng = root.derive(1);
    let mut noise_rng = root.derive(2);
    let mut edge_rng = root.derive(3);

    let labels: Vec<usize> = (0..spec.n).map(|i| i % spec.classes).collect();
    let means = mean_rng.normal_matrix(spec.classes, spec.d);
    let noise_w = 1.0 - spec.signal;
    let features = DenseMatrix::from_fn(spec.n, spec.d, |i, j| {
        let eps = noise_rng.normal();
        spec.signal * means.get(labels[i], j) + noise_w * eps
    });

    let mut edges = Vec::new();
    for u in 0..spec.n {
        for v in (u + 1)..spec.n {
            let p = if labels[u] == labels[v] {
                spec.intra_p
            } else {
                spec.inter_p
            };
            if edge_rng.bernoulli(p) {
                edges.push((u, v));
            }
        }
    }
    let name = format!(
        "sbm-n{}-c{}-p{}-q{}-d{}-s{}-seed{}",
        spec.n, spec.classes, spec.intra_p, spec.inter_p, spec.d, spec.signal, spec.seed
    );
    AttributedGraph::new(name, features, Some(edges), Some(labels))
}
