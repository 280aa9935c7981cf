//! Attribute and degree assortativity of an edge list.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Edge;
use crate::numerics::DenseMatrix;

/// Class-mixing matrix over both orientations of every edge, normalized to sum 1.
pub fn mixing_matrix(edges: &[Edge], labels: &[usize]) -> Result<DenseMatrix> {
    if edges.is_empty() {
        return Err(Error::Degenerate("mixing matrix of an empty edge list".into()));
    }
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut e = DenseMatrix::zeros(classes, classes);
    for &(u, v) in edges {
        let (Some(&a), Some(&b)) = (labels.get(u), labels.get(v)) else {
            return Err(Error::Parameter(format!("edge ({u}, {v}) has an unlabeled endpoint")));
        };
        e.set(a, b, e.get(a, b) + 1.0);
        e.set(b, a, e.get(b, a) + 1.0);
    }
    e.scale_in_place(1.0 / (2 * edges.len()) as f64);
    Ok(e)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AacResult {
    pub value: f64,
    /// Set when every edge stays inside a single class, so the coefficient is
    /// taken as 1 by continuity.
    pub degenerate: bool,
}

/// Attribute assortativity `(Tr e - Σ(e²)) / (1 - Σ(e²))` with class labels as the attribute.
pub fn aac(edges: &[Edge], labels: &[usize]) -> Result<AacResult> {
    let e = mixing_matrix(edges, labels)?;
    let sq = e.matmul(&e)?.sum();
    let denom = 1.0 - sq;
    if denom.abs() <= 1e-15 {
        return Ok(AacResult {
            value: 1.0,
            degenerate: true,
        });
    }
    Ok(AacResult {
        value: (e.trace() - sq) / denom,
        degenerate: false,
    })
}

fn degree_counts(edges: &[Edge]) -> Vec<f64> {
    let n = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
    let mut deg = vec![0.0; n];
    for &(u, v) in edges {
        deg[u] += 1.0;
        deg[v] += 1.0;
    }
    deg
}

/// Pearson correlation of endpoint degrees over both orientations of every edge.
pub fn dac(edges: &[Edge]) -> Result<f64> {
    if edges.is_empty() {
        return Err(Error::Degenerate("degree assortativity of an empty edge list".into()));
    }
    let deg = degree_counts(edges);
    // the expansion is symmetric, so both marginals share mean and variance
    let m = 2.0 * edges.len() as f64;
    let mean = edges.iter().map(|&(u, v)| deg[u] + deg[v]).sum::<f64>() / m;
    let mut var = 0.0;
    let mut cov = 0.0;
    for &(u, v) in edges {
        let (a, b) = (deg[u] - mean, deg[v] - mean);
        var += a * a + b * b;
        cov += 2.0 * a * b;
    }
    if var <= 1e-12 * m {
        return Err(Error::Degenerate(
            "all edge endpoints share one degree; the coefficient is undefined".into(),
        ));
    }
    Ok(cov / var)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomophilyReport {
    pub aac: f64,
    pub aac_degenerate: bool,
    /// `None` when degree variance is zero.
    pub dac: Option<f64>,
    pub mixing: Vec<Vec<f64>>,
    pub edges: usize,
    pub mean_degree: f64,
    pub max_degree: f64,
}

pub fn homophily_report(edges: &[Edge], labels: &[usize]) -> Result<HomophilyReport> {
    let a = aac(edges, labels)?;
    let e = mixing_matrix(edges, labels)?;
    let dac = match dac(edges) {
        Ok(v) => Some(v),
        Err(Error::Degenerate(_)) => None,
        Err(err) => return Err(err),
    };
    let deg = degree_counts(edges);
    let touched: Vec<f64> = deg.iter().copied().filter(|&d| d > 0.0).collect();
    Ok(HomophilyReport {
        aac: a.value,
        aac_degenerate: a.degenerate,
        dac,
        mixing: (0..e.rows()).map(|i| e.row(i).to_vec()).collect(),
        edges: edges.len(),
        mean_degree: touched.iter().sum::<f64>() / touched.len().max(1) as f64,
        max_degree: touched.iter().copied().fold(0.0, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RngStream;

    /// Degree correlation straight from the joint distribution of degree pairs.
    fn dac_oracle(edges: &[Edge]) -> f64 {
        let deg = degree_counts(edges);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for &(u, v) in edges {
            xs.extend([deg[u], deg[v]]);
            ys.extend([deg[v], deg[u]]);
        }
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let sy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
        sxy / (sx * sy).sqrt()
    }

    #[test]
    fn aac_extremes() {
        // intra-class edges in two classes
        let r = aac(&[(0, 1), (2, 3)], &[0, 0, 1, 1]).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10 && !r.degenerate);
        // every edge inside one class
        let r = aac(&[(0, 1)], &[0, 0, 1, 1]).unwrap();
        assert_eq!((r.value, r.degenerate), (1.0, true));
        let r = aac(&[(0, 2), (1, 3), (0, 3)], &[0, 0, 1, 1]).unwrap();
        assert!((r.value + 1.0).abs() < 1e-10);
    }

    #[test]
    fn aac_class_relabeling_invariant() {
        let mut rng = RngStream::new(2);
        let labels: Vec<usize> = (0..30).map(|_| rng.index(3)).collect();
        let edges: Vec<Edge> = (0..60)
            .map(|_| (rng.index(30), rng.index(30)))
            .filter(|(u, v)| u != v)
            .collect();
        let relabeled: Vec<usize> = labels.iter().map(|&c| [2, 0, 1][c]).collect();
        let a = aac(&edges, &labels).unwrap().value;
        let b = aac(&edges, &relabeled).unwrap().value;
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn aac_null_model_near_zero() {
        let mut total = 0.0;
        for seed in 0..20 {
            let mut rng = RngStream::new(seed);
            let n = 200;
            let mut labels: Vec<usize> = (0..n).map(|i| i % 4).collect();
            let edges: Vec<Edge> = (0..600)
                .map(|_| (rng.index(n), rng.index(n)))
                .filter(|(u, v)| u != v)
                .collect();
            rng.shuffle(&mut labels);
            total += aac(&edges, &labels).unwrap().value;
        }
        assert!((total / 20.0).abs() < 0.1);
    }

    #[test]
    fn dac_examples() {
        assert!((dac(&[(0, 1), (0, 2), (0, 3)]).unwrap() + 1.0).abs() < 1e-10);
        assert!(matches!(dac(&[(0, 1), (2, 3)]), Err(Error::Degenerate(_))));
        assert!(matches!(dac(&[(0, 1), (1, 2), (2, 0)]), Err(Error::Degenerate(_))));
        // cliques K4 and K3: degrees 3 and 2, every edge joins equal degrees
        let mut edges = Vec::new();
        for u in 0..4 {
            for v in u + 1..4 {
                edges.push((u, v));
            }
        }
        edges.extend([(4, 5), (5, 6), (4, 6)]);
        let d = dac(&edges).unwrap();
        assert!(d > 0.0 && (d - dac_oracle(&edges)).abs() < 1e-12);
    }

    #[test]
    fn dac_matches_oracle_and_relabeling() {
        let mut rng = RngStream::new(9);
        for _ in 0..20 {
            let edges: Vec<Edge> = (0..40)
                .map(|_| (rng.index(25), rng.index(25)))
                .filter(|(u, v)| u != v)
                .collect();
            let d = dac(&edges).unwrap();
            assert!((d - dac_oracle(&edges)).abs() < 1e-12);
            let perm = rng.permutation(25);
            let moved: Vec<Edge> = edges.iter().map(|&(u, v)| (perm[u], perm[v])).collect();
            assert!((d - dac(&moved).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn report_fields() {
        let r = homophily_report(&[(0, 1), (1, 2)], &[0, 0, 1]).unwrap();
        let total: f64 = r.mixing.iter().flatten().sum();
        assert!((total - 1.0).abs() < 1e-15);
        assert!(r.mixing.iter().flatten().all(|&v| v >= 0.0));
        assert_eq!(r.max_degree, 2.0);
        assert!(r.dac.is_some());
    }
}
