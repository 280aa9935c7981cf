use crate::error::{Error, Result};

fn check(scores: &[f64], labels: &[bool]) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(Error::dim("ranking", format!("{} scores, {} labels", scores.len(), labels.len())));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Numeric("NaN score".into()));
    }
    Ok(())
}

/// Probability that a random positive outranks a random negative; ties count ½.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    check(scores, labels)?;
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::Degenerate("AUC needs both positive and negative pairs".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Mann-Whitney: sum of midranks of the positives
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let midrank = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += midrank * order[i..=j].iter().filter(|&&k| labels[k]).count() as f64;
        i = j + 1;
    }
    let (p, q) = (pos as f64, neg as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * q))
}

/// Mean precision at the rank of each positive, scores descending, ties in input order.
pub fn ap(scores: &[f64], labels: &[bool]) -> Result<f64> {
    check(scores, labels)?;
    let pos = labels.iter().filter(|&&l| l).count();
    if pos == 0 {
        return Err(Error::Degenerate("AP needs at least one positive pair".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut hits = 0usize;
    let mut total = 0.0;
    for (rank, &k) in order.iter().enumerate() {
        if labels[k] {
            hits += 1;
            total += hits as f64 / (rank + 1) as f64;
        }
    }
    Ok(total / pos as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RngStream;
    use proptest::prelude::*;

    /// Direct pair counting.
    fn auc_oracle(s: &[f64], l: &[bool]) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..s.len() {
            for j in 0..s.len() {
                if l[i] && !l[j] {
                    den += 1.0;
                    num += if s[i] > s[j] { 1.0 } else if s[i] == s[j] { 0.5 } else { 0.0 };
                }
            }
        }
        num / den
    }

    /// Precision recomputed from scratch at every positive's position.
    fn ap_oracle(s: &[f64], l: &[bool]) -> f64 {
        let mut idx: Vec<usize> = (0..s.len()).collect();
        // insertion sort: stable, descending
        for i in 1..idx.len() {
            let mut j = i;
            while j > 0 && s[idx[j - 1]] < s[idx[j]] {
                idx.swap(j - 1, j);
                j -= 1;
            }
        }
        let mut precisions = Vec::new();
        for r in 0..idx.len() {
            if l[idx[r]] {
                let top = idx[..=r].iter().filter(|&&k| l[k]).count();
                precisions.push(top as f64 / (r + 1) as f64);
            }
        }
        precisions.iter().sum::<f64>() / precisions.len() as f64
    }

    #[test]
    fn worked_examples() {
        let s = [0.9, 0.8, 0.3, 0.1];
        let l = [true, false, true, false];
        assert!((auc(&s, &l).unwrap() - 0.75).abs() < 1e-15);
        assert!((ap(&s, &l).unwrap() - (1.0 + 2.0 / 3.0) / 2.0).abs() < 1e-15);
        assert_eq!(auc(&[1.0; 4], &l).unwrap(), 0.5);
        assert_eq!(auc(&[4.0, 3.0, 2.0, 1.0], &[true, true, false, false]).unwrap(), 1.0);
        assert_eq!(ap(&[4.0, 3.0, 2.0, 1.0], &[true, true, false, false]).unwrap(), 1.0);
        assert!((ap(&[4.0, 3.0, 2.0, 1.0], &[false, false, false, true]).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn single_class_is_degenerate() {
        assert!(matches!(auc(&[1.0, 2.0], &[true, true]), Err(Error::Degenerate(_))));
        assert!(matches!(ap(&[1.0, 2.0], &[false, false]), Err(Error::Degenerate(_))));
    }

    #[test]
    fn matches_oracles_on_random_instances() {
        let mut rng = RngStream::new(17);
        for _ in 0..100 {
            let m = 2 + rng.index(40);
            // coarse grid so ties occur
            let s: Vec<f64> = (0..m).map(|_| rng.index(6) as f64).collect();
            let mut l: Vec<bool> = (0..m).map(|_| rng.bernoulli(0.4)).collect();
            l[0] = true;
            l[1] = false;
            assert!((auc(&s, &l).unwrap() - auc_oracle(&s, &l)).abs() < 1e-12);
            assert!((ap(&s, &l).unwrap() - ap_oracle(&s, &l)).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn auc_invariant_under_increasing_maps(s in proptest::collection::vec(-5.0f64..5.0, 4..30)) {
            let l: Vec<bool> = (0..s.len()).map(|i| i % 3 == 0).collect();
            let t: Vec<f64> = s.iter().map(|x| x.exp() * 3.0 + 1.0).collect();
            prop_assert!((auc(&s, &l).unwrap() - auc(&t, &l).unwrap()).abs() < 1e-12);
            let neg: Vec<f64> = s.iter().map(|x| -x).collect();
            prop_assert!((auc(&neg, &l).unwrap() - (1.0 - auc(&s, &l).unwrap())).abs() < 1e-12);
        }

        #[test]
        fn perfect_iff_separated(s in proptest::collection::vec(-5.0f64..5.0, 4..30)) {
            let l: Vec<bool> = (0..s.len()).map(|i| i % 2 == 0).collect();
            let min_pos = s.iter().zip(&l).filter(|(_, &b)| b).map(|(&v, _)| v).fold(f64::MAX, f64::min);
            let max_neg = s.iter().zip(&l).filter(|(_, &b)| !b).map(|(&v, _)| v).fold(f64::MIN, f64::max);
            let separated = min_pos > max_neg;
            prop_assert_eq!(auc(&s, &l).unwrap() == 1.0, separated);
            prop_assert_eq!(ap(&s, &l).unwrap() == 1.0, separated);
        }
    }
}
