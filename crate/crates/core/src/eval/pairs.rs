use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, Edge};
use crate::numerics::RngStream;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalPairs {
    pub positives: Vec<Edge>,
    pub negatives: Vec<Edge>,
    pub seed: u64,
}

impl EvalPairs {
    /// Positives then negatives, with matching labels.
    pub fn labeled(&self) -> (Vec<Edge>, Vec<bool>) {
        let pairs = self.positives.iter().chain(&self.negatives).copied().collect();
        let labels = std::iter::repeat_n(true, self.positives.len())
            .chain(std::iter::repeat_n(false, self.negatives.len()))
            .collect();
        (pairs, labels)
    }
}

/// All truth edges as positives plus `ratio · |E|` uniformly drawn non-edges.
pub fn sample_eval_pairs(g: &AttributedGraph, ratio: f64, seed: u64) -> Result<EvalPairs> {
    if !(ratio.is_finite() && ratio > 0.0) {
        return Err(Error::Parameter(format!("negative ratio {ratio} must be positive")));
    }
    let positives = g
        .truth_edges_for_evaluation()
        .ok_or_else(|| Error::Parameter(format!("{} has no truth edges to evaluate against", g.name())))?
        .to_vec();
    let n = g.n();
    let wanted = (ratio * positives.len() as f64).round() as usize;
    let total = n * n.saturating_sub(1) / 2;
    let available = total - positives.len();
    if wanted > available {
        return Err(Error::Parameter(format!(
            "{wanted} negatives requested but only {available} non-edges exist"
        )));
    }
    let edges: HashSet<Edge> = positives.iter().copied().collect();
    let mut rng = RngStream::new(seed);
    let negatives = if wanted * 2 > available {
        // dense request: enumerate and take a shuffled prefix
        let mut all: Vec<Edge> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .filter(|e| !edges.contains(e))
            .collect();
        rng.shuffle(&mut all);
        all.truncate(wanted);
        all
    } else {
        let mut seen = HashSet::with_capacity(wanted);
        let mut out = Vec::with_capacity(wanted);
        while out.len() < wanted {
            let u = rng.index(n);
            let v = rng.index(n);
            if u == v {
                continue;
            }
            let e = (u.min(v), u.max(v));
            if !edges.contains(&e) && seen.insert(e) {
                out.push(e);
            }
        }
        out
    };
    Ok(EvalPairs {
        positives,
        negatives,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::DenseMatrix;

    fn ring(n: usize) -> AttributedGraph {
        let edges = (0..n).map(|i| (i, (i + 1) % n)).collect();
        AttributedGraph::new("ring", DenseMatrix::identity(n), Some(edges), None).unwrap()
    }

    #[test]
    fn balanced_disjoint_and_seeded() {
        let g = ring(10);
        let p = sample_eval_pairs(&g, 1.0, 4).unwrap();
        assert_eq!((p.positives.len(), p.negatives.len()), (10, 10));
        let pos: HashSet<_> = p.positives.iter().collect();
        assert!(p.negatives.iter().all(|e| !pos.contains(e) && e.0 < e.1));
        let uniq: HashSet<_> = p.negatives.iter().collect();
        assert_eq!(uniq.len(), 10);
        assert_eq!(p, sample_eval_pairs(&g, 1.0, 4).unwrap());
        assert_ne!(p.negatives, sample_eval_pairs(&g, 1.0, 5).unwrap().negatives);
    }

    #[test]
    fn dense_requests_and_limits() {
        let g = ring(6); // 15 pairs, 6 edges, 9 non-edges
        let p = sample_eval_pairs(&g, 1.5, 0).unwrap();
        assert_eq!(p.negatives.len(), 9);
        assert!(matches!(sample_eval_pairs(&g, 2.0, 0), Err(Error::Parameter(_))));
        let (pairs, labels) = p.labeled();
        assert_eq!(pairs.len(), 15);
        assert_eq!(labels.iter().filter(|&&l| l).count(), 6);
    }

    #[test]
    fn requires_truth_edges() {
        let g = AttributedGraph::new("x", DenseMatrix::identity(3), None, None).unwrap();
        assert!(sample_eval_pairs(&g, 1.0, 0).is_err());
    }
}
