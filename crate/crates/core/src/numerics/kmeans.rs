use crate::error::{Error, Result};

/// Result of an exact 1-D 2-means partition.
#[derive(Clone, Debug, PartialEq)]
pub struct KMeans1d {
    /// Per-input cluster id: 0 for the lower-valued cluster, 1 for the upper.
    pub labels: Vec<usize>,
    /// Cluster means, `[lower, upper]`.
    pub centroids: Vec<f64>,
    /// Values `<= threshold` fall in cluster 0.
    pub threshold: f64,
    pub sse: f64,
}

/// Globally optimal 1-D k-means for `k = 2`.
///
/// Optimal 1-D clusters are contiguous in sorted order, so scanning every
/// split between distinct sorted values with prefix sums finds the minimum
/// within-cluster sum of squares exactly. Ties go to the lowest split.
pub fn kmeans_1d(values: &[f64], k: usize) -> Result<KMeans1d> {
    if k != 2 {
        return Err(Error::Parameter(format!(
            "exact 1-D k-means is implemented for k = 2 only (got {k})"
        )));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("score {v} passed to kmeans_1d")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let distinct = 1 + sorted.windows(2).filter(|w| w[0] != w[1]).count();
    if sorted.is_empty() || distinct < k {
        return Err(Error::Degenerate(format!(
            "{} distinct value(s), need at least {k} for 2-means",
            if sorted.is_empty() { 0 } else { distinct }
        )));
    }

    // Center for conditioning of the sum-of-squares identity.
    let m = sorted.len();
    let shift = sorted.iter().sum::<f64>() / m as f64;
    let mut prefix = Vec::with_capacity(m + 1);
    let mut prefix_sq = Vec::with_capacity(m + 1);
    prefix.push(0.0);
    prefix_sq.push(0.0);
    let (mut s, mut s2) = (0.0, 0.0);
    for &v in &sorted {
        let c = v - shift;
        s += c;
        s2 += c * c;
        prefix.push(s);
        prefix_sq.push(s2);
    }
    let sse = |lo: usize, hi: usize| -> f64 {
        let cnt = (hi - lo) as f64;
        let sum = prefix[hi] - prefix[lo];
        let sq = prefix_sq[hi] - prefix_sq[lo];
        (sq - sum * sum / cnt).max(0.0)
    };

    let mut best_split = 0;
    let mut best = f64::INFINITY;
    for split in 1..m {
        if sorted[split - 1] == sorted[split] {
            continue;
        }
        let cost = sse(0, split) + sse(split, m);
        if cost < best {
            best = cost;
            best_split = split;
        }
    }

    let threshold = sorted[best_split - 1];
    let lower_mean = prefix[best_split] / best_split as f64 + shift;
    let upper_mean = (prefix[m] - prefix[best_split]) / (m - best_split) as f64 + shift;
    let labels = values
        .iter()
        .map(|&v| usize::from(v > threshold))
        .collect();
    Ok(KMeans1d {
        labels,
        centroids: vec![lower_mean, upper_mean],
        threshold,
        sse: best,
    })
}
