//! Pairwise similarity scoring and the cluster-based link labeling rule.
//!
//! Scores come from one of five symmetric metrics; a globally optimal 1-D
//! 2-means split of the raw scores decides which pairs are predicted links.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{write_edges_tsv, Adjacency, Edge};
use crate::numerics::{kmeans_1d, DenseMatrix};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimilarityMetric {
    CosineSimilarity,
    #[default]
    CosineDistance,
    Euclidean,
    Manhattan,
    CorrelationDistance,
}

impl SimilarityMetric {
    pub const ALL: [SimilarityMetric; 5] = [
        SimilarityMetric::CosineSimilarity,
        SimilarityMetric::CosineDistance,
        SimilarityMetric::Euclidean,
        SimilarityMetric::Manhattan,
        SimilarityMetric::CorrelationDistance,
    ];

    /// True when larger raw values mean a link is more likely.
    pub fn higher_is_linked(self) -> bool {
        matches!(self, SimilarityMetric::CosineSimilarity)
    }

    pub fn name(self) -> &'static str {
        match self {
            SimilarityMetric::CosineSimilarity => "cosine_similarity",
            SimilarityMetric::CosineDistance => "cosine_distance",
            SimilarityMetric::Euclidean => "euclidean",
            SimilarityMetric::Manhattan => "manhattan",
            SimilarityMetric::CorrelationDistance => "correlation_distance",
        }
    }

    /// Map a raw score to "higher = more link-like".
    pub fn orient(self, raw: f64) -> f64 {
        if self.higher_is_linked() {
            raw
        } else {
            -raw
        }
    }
}

impl std::str::FromStr for SimilarityMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown metric {s:?}")))
    }
}

impl std::fmt::Display for SimilarityMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Scores over unordered pairs, each stored with `u < v`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreSet {
    pub metric: SimilarityMetric,
    pub pairs: Vec<Edge>,
    pub scores: Vec<f64>,
    /// Whether [`orient_scores`] has been applied.
    pub oriented: bool,
}

impl ScoreSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Scores in the "higher = more link-like" convention, whatever the current state.
    pub fn oriented_values(&self) -> Vec<f64> {
        if self.oriented {
            self.scores.clone()
        } else {
            self.scores.iter().map(|&s| self.metric.orient(s)).collect()
        }
    }
}

fn centered_unit(v: &[f64], center: bool) -> Vec<f64> {
    let mean = if center {
        v.iter().sum::<f64>() / v.len().max(1) as f64
    } else {
        0.0
    };
    let mut out: Vec<f64> = v.iter().map(|x| x - mean).collect();
    let norm = out.iter().map(|x| x * x).sum::<f64>().sqrt();
    // zero norm / zero variance: every similarity involving this vector is 0
    let inv = if norm > 0.0 { 1.0 / norm } else { 0.0 };
    out.iter_mut().for_each(|x| *x *= inv);
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Raw metric value for two vectors.
pub fn pair_score(metric: SimilarityMetric, u: &[f64], v: &[f64]) -> f64 {
    match metric {
        SimilarityMetric::CosineSimilarity => dot(&centered_unit(u, false), &centered_unit(v, false)),
        SimilarityMetric::CosineDistance => 1.0 - dot(&centered_unit(u, false), &centered_unit(v, false)),
        SimilarityMetric::Euclidean => u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(),
        SimilarityMetric::Manhattan => u.iter().zip(v).map(|(a, b)| (a - b).abs()).sum(),
        SimilarityMetric::CorrelationDistance => 1.0 - dot(&centered_unit(u, true), &centered_unit(v, true)),
    }
}

/// All `n(n-1)/2` unordered pairs in row-major order.
pub fn all_pairs(n: usize) -> Vec<Edge> {
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for u in 0..n {
        for v in u + 1..n {
            out.push((u, v));
        }
    }
    out
}

/// Score the given pairs (or every pair) of rows of `h`.
pub fn similarity_scores(h: &DenseMatrix, metric: SimilarityMetric, pairs: Option<&[Edge]>) -> Result<ScoreSet> {
    let n = h.rows();
    let pairs: Vec<Edge> = match pairs {
        Some(p) => p
            .iter()
            .map(|&(u, v)| {
                if u == v || u >= n || v >= n {
                    Err(Error::Parameter(format!("pair ({u}, {v}) invalid for {n} nodes")))
                } else {
                    Ok((u.min(v), u.max(v)))
                }
            })
            .collect::<Result<_>>()?,
        None => all_pairs(n),
    };
    if pairs.is_empty() {
        return Err(Error::Parameter("no pairs to score".into()));
    }
    // normalize rows once for the inner-product metrics
    let prepared: Option<Vec<Vec<f64>>> = match metric {
        SimilarityMetric::CosineSimilarity | SimilarityMetric::CosineDistance => {
            Some((0..n).map(|i| centered_unit(h.row(i), false)).collect())
        }
        SimilarityMetric::CorrelationDistance => Some((0..n).map(|i| centered_unit(h.row(i), true)).collect()),
        _ => None,
    };
    let scores = pairs
        .iter()
        .map(|&(u, v)| match (&prepared, metric) {
            (Some(r), SimilarityMetric::CosineSimilarity) => dot(&r[u], &r[v]),
            (Some(r), _) => 1.0 - dot(&r[u], &r[v]),
            (None, _) => pair_score(metric, h.row(u), h.row(v)),
        })
        .collect::<Vec<_>>();
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::Numeric(format!("non-finite {metric} score for pair {:?}", pairs[i])));
    }
    Ok(ScoreSet {
        metric,
        pairs,
        scores,
        oriented: false,
    })
}

/// Negate distance scores so that higher always means more link-like.
pub fn orient_scores(s: &ScoreSet) -> ScoreSet {
    ScoreSet {
        scores: s.oriented_values(),
        oriented: true,
        ..s.clone()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PredictedLinks {
    pub adjacency: Adjacency,
    /// Mean raw score of the linked cluster.
    pub mean_link: f64,
    pub mean_nolink: f64,
    /// Per-pair decision, aligned with the input score set.
    pub predicted: Vec<bool>,
}

impl PredictedLinks {
    pub fn edges(&self) -> Vec<Edge> {
        self.adjacency.edges()
    }
}

/// Split the raw scores into two clusters and label one of them as links.
pub fn cluster_links(s: &ScoreSet, n: usize) -> Result<PredictedLinks> {
    let raw: Vec<f64> = if s.oriented {
        // undo orientation so the rule is applied on raw values
        s.scores.iter().map(|&x| s.metric.orient(x)).collect()
    } else {
        s.scores.clone()
    };
    let km = match kmeans_1d(&raw, 2) {
        Ok(km) => km,
        Err(Error::Degenerate(_)) => {
            return Err(Error::Degenerate(format!(
                "all {} scores are equal; inspect the metric and input features",
                s.metric
            )))
        }
        Err(e) => return Err(e),
    };
    let linked_cluster = if s.metric.higher_is_linked() { 1 } else { 0 };
    let predicted: Vec<bool> = km.labels.iter().map(|&l| l == linked_cluster).collect();
    let edges: Vec<Edge> = s
        .pairs
        .iter()
        .zip(&predicted)
        .filter(|(_, &p)| p)
        .map(|(&e, _)| e)
        .collect();
    Ok(PredictedLinks {
        adjacency: Adjacency::from_edges(n, &edges)?,
        mean_link: km.centroids[linked_cluster],
        mean_nolink: km.centroids[1 - linked_cluster],
        predicted,
    })
}

/// Writes `edges.tsv` and `scores.csv` (u, v, raw_score, oriented_score, predicted) into `dir`.
pub fn export_predictions(dir: &Path, s: &ScoreSet, links: &PredictedLinks) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_edges_tsv(dir.join("edges.tsv"), &links.edges())?;
    let oriented = s.oriented_values();
    let mut out = String::from("u,v,raw_score,oriented_score,predicted\n");
    for (i, &(u, v)) in s.pairs.iter().enumerate() {
        let raw = s.metric.orient(oriented[i]);
        let _ = writeln!(out, "{u},{v},{raw},{},{}", oriented[i], u8::from(links.predicted[i]));
    }
    let path = dir.join("scores.csv");
    std::fs::write(&path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RngStream;
    use proptest::prelude::*;

    fn set(metric: SimilarityMetric, scores: &[f64]) -> ScoreSet {
        ScoreSet {
            metric,
            pairs: all_pairs(4).into_iter().take(scores.len()).collect(),
            scores: scores.to_vec(),
            oriented: false,
        }
    }

    #[test]
    fn metric_examples() {
        use SimilarityMetric::*;
        let u = [1.0, -2.0, 0.5];
        assert!((pair_score(CosineSimilarity, &u, &u) - 1.0).abs() < 1e-15);
        assert!(pair_score(CosineDistance, &u, &u).abs() < 1e-15);
        assert_eq!(pair_score(Euclidean, &[0.0, 0.0], &[3.0, 4.0]), 5.0);
        assert_eq!(pair_score(Manhattan, &[0.0, 0.0], &[3.0, 4.0]), 7.0);
        assert!(pair_score(CorrelationDistance, &[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).abs() < 1e-15);
        assert!((pair_score(CorrelationDistance, &[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_vectors_have_zero_similarity() {
        use SimilarityMetric::*;
        assert_eq!(pair_score(CosineSimilarity, &[0.0, 0.0], &[1.0, 2.0]), 0.0);
        assert_eq!(pair_score(CosineDistance, &[0.0, 0.0], &[1.0, 2.0]), 1.0);
        assert_eq!(pair_score(CorrelationDistance, &[2.0, 2.0], &[1.0, 3.0]), 1.0);
    }

    #[test]
    fn batch_matches_pairwise_and_is_symmetric() {
        let h = RngStream::new(8).normal_matrix(7, 5);
        for metric in SimilarityMetric::ALL {
            let s = similarity_scores(&h, metric, None).unwrap();
            assert_eq!(s.len(), 21);
            for (&(u, v), &x) in s.pairs.iter().zip(&s.scores) {
                assert!((x - pair_score(metric, h.row(u), h.row(v))).abs() < 1e-12);
                assert_eq!(pair_score(metric, h.row(u), h.row(v)), pair_score(metric, h.row(v), h.row(u)));
            }
            let rev = similarity_scores(&h, metric, Some(&[(3, 1)])).unwrap();
            assert_eq!(rev.pairs, vec![(1, 3)]);
        }
    }

    #[test]
    fn empty_and_invalid_pairs_rejected() {
        let h = DenseMatrix::identity(3);
        assert!(matches!(
            similarity_scores(&h, SimilarityMetric::Euclidean, Some(&[])),
            Err(Error::Parameter(_))
        ));
        assert!(similarity_scores(&h, SimilarityMetric::Euclidean, Some(&[(1, 1)])).is_err());
        assert!(similarity_scores(&h, SimilarityMetric::Euclidean, Some(&[(0, 3)])).is_err());
    }

    #[test]
    fn orientation() {
        let s = set(SimilarityMetric::Euclidean, &[2.0, 5.0]);
        assert_eq!(orient_scores(&s).scores, vec![-2.0, -5.0]);
        let c = set(SimilarityMetric::CosineSimilarity, &[0.2, 0.7]);
        assert_eq!(orient_scores(&c).scores, c.scores);
    }

    #[test]
    fn labeling_rule_examples() {
        let d = cluster_links(&set(SimilarityMetric::CosineDistance, &[0.05, 0.1, 0.9, 0.95]), 4).unwrap();
        assert_eq!(d.predicted, vec![true, true, false, false]);
        assert!((d.mean_link - 0.075).abs() < 1e-15);
        let c = cluster_links(&set(SimilarityMetric::CosineSimilarity, &[0.05, 0.1, 0.9, 0.95]), 4).unwrap();
        assert_eq!(c.predicted, vec![false, false, true, true]);
        // already-oriented input gives the same decisions
        let o = cluster_links(&orient_scores(&set(SimilarityMetric::CosineDistance, &[0.05, 0.1, 0.9, 0.95])), 4)
            .unwrap();
        assert_eq!(o.predicted, d.predicted);
    }

    #[test]
    fn three_nodes_one_close_pair() {
        let h = DenseMatrix::from_rows(&[vec![0.0, 0.0], vec![0.1, 0.0], vec![5.0, 5.0]]).unwrap();
        let s = similarity_scores(&h, SimilarityMetric::Euclidean, None).unwrap();
        let p = cluster_links(&s, 3).unwrap();
        assert_eq!(p.edges(), vec![(0, 1)]);
        assert!(p.adjacency.matrix().is_symmetric(0.0));
        assert_eq!(p.adjacency.matrix().diag(), vec![0.0; 3]);
    }

    #[test]
    fn equal_scores_are_degenerate() {
        let err = cluster_links(&set(SimilarityMetric::Euclidean, &[1.0, 1.0, 1.0]), 4).unwrap_err();
        assert!(matches!(err, Error::Degenerate(m) if m.contains("inspect")));
    }

    #[test]
    fn export_layout() {
        let dir = tempfile::tempdir().unwrap();
        let s = set(SimilarityMetric::Euclidean, &[0.5, 3.0]);
        let p = cluster_links(&s, 4).unwrap();
        export_predictions(dir.path(), &s, &p).unwrap();
        let csv = std::fs::read_to_string(dir.path().join("scores.csv")).unwrap();
        assert_eq!(csv, "u,v,raw_score,oriented_score,predicted\n0,1,0.5,-0.5,1\n0,2,3,-3,0\n");
        let edges = std::fs::read_to_string(dir.path().join("edges.tsv")).unwrap();
        assert!(edges.contains("0\t1"));
    }

    proptest! {
        #[test]
        fn distance_clusters_are_contiguous(values in proptest::collection::vec(0.0f64..10.0, 2..40)) {
            prop_assume!(values.iter().any(|&v| v != values[0]));
            let n = 10;
            let pairs: Vec<Edge> = all_pairs(n).into_iter().take(values.len()).collect();
            let s = ScoreSet { metric: SimilarityMetric::Manhattan, pairs, scores: values.clone(), oriented: false };
            let p = cluster_links(&s, n).unwrap();
            let max_linked = values.iter().zip(&p.predicted).filter(|(_, &l)| l).map(|(&v, _)| v).fold(f64::MIN, f64::max);
            let min_unlinked = values.iter().zip(&p.predicted).filter(|(_, &l)| !l).map(|(&v, _)| v).fold(f64::MAX, f64::min);
            prop_assert!(max_linked <= min_unlinked);
        }
    }
}
