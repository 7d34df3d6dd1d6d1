use crate::error::{Error, Result};
use crate::stats::average_ranks;

/// Fractions of series whose selected model ranks in the top, middle or
/// bottom third of the pool by out-of-sample MAE.
#[derive(Debug, Clone, PartialEq)]
pub struct Thirds {
    pub scheme: String,
    pub top: f64,
    pub middle: f64,
    pub bottom: f64,
}

/// Rank-thirds frequencies for each scheme.
///
/// `mae[n][k]` is the MAE of model `k` on series `n`; ranks are 1-based with
/// ties averaged. The top third is ranks `1..=ceil(K/3)`, the middle third
/// up to `ceil(2K/3)`. `selections` pairs a scheme name with the selected
/// model of every series.
pub fn rank_thirds(mae: &[Vec<f64>], selections: &[(String, Vec<usize>)]) -> Result<Vec<Thirds>> {
    let k = mae.first().map_or(0, Vec::len);
    if k < 3 {
        return Err(Error::InvalidArgument("rank thirds need at least three models".into()));
    }
    if mae.iter().any(|row| row.len() != k) {
        return Err(Error::LengthMismatch("ragged MAE matrix".into()));
    }
    let top = k.div_ceil(3) as f64;
    let middle = (2 * k).div_ceil(3) as f64;
    let ranks: Vec<Vec<f64>> = mae.iter().map(|row| average_ranks(row)).collect();

    selections
        .iter()
        .map(|(scheme, chosen)| {
            if chosen.len() != mae.len() {
                return Err(Error::LengthMismatch(format!(
                    "{scheme}: {} selections for {} series",
                    chosen.len(),
                    mae.len()
                )));
            }
            let mut counts = [0usize; 3];
            for (row, &c) in ranks.iter().zip(chosen) {
                let r = *row
                    .get(c)
                    .ok_or_else(|| Error::InvalidArgument(format!("{scheme}: model index {c} out of range")))?;
                let bucket = if r <= top {
                    0
                } else if r <= middle {
                    1
                } else {
                    2
                };
                counts[bucket] += 1;
            }
            let n = chosen.len().max(1) as f64;
            Ok(Thirds {
                scheme: scheme.clone(),
                top: counts[0] as f64 / n,
                middle: counts[1] as f64 / n,
                bottom: counts[2] as f64 / n,
            })
        })
        .collect()
}

/// Two-sided Nemenyi critical values `q_alpha / sqrt(2)` (studentized range
/// with infinite degrees of freedom) for 2..=20 groups.
const NEMENYI_Q: [(f64, [f64; 19]); 3] = [
    (
        0.01,
        [
            2.575829, 2.913494, 3.113250, 3.254686, 3.363740, 3.452213, 3.526471, 3.590339, 3.646292, 3.696021,
            3.740733, 3.781318, 3.818451, 3.852654, 3.884343, 3.913850, 3.941446, 3.967357, 3.991770,
        ],
    ),
    (
        0.05,
        [
            1.959964, 2.343701, 2.569032, 2.727774, 2.849705, 2.948320, 3.030878, 3.101730, 3.163684, 3.218654,
            3.268004, 3.312739, 3.353618, 3.391230, 3.426041, 3.458425, 3.488685, 3.517073, 3.543799,
        ],
    ),
    (
        0.10,
        [
            1.644854, 2.052293, 2.291341, 2.459516, 2.588521, 2.692732, 2.779884, 2.854606, 2.919889, 2.977768,
            3.029694, 3.076733, 3.119693, 3.159199, 3.195743, 3.229723, 3.261461, 3.291224, 3.319233,
        ],
    ),
];

/// Critical value `q_{alpha,M}` for `M` compared methods.
pub fn nemenyi_critical_value(alpha: f64, m: usize) -> Result<f64> {
    let row = NEMENYI_Q.iter().find(|(a, _)| (a - alpha).abs() < 1e-9).ok_or_else(|| {
        Error::InvalidArgument(format!("no Nemenyi table for alpha {alpha} (use 0.01, 0.05 or 0.10)"))
    })?;
    if !(2..=20).contains(&m) {
        return Err(Error::InvalidArgument(format!("Nemenyi table covers 2..=20 methods, got {m}")));
    }
    Ok(row.1[m - 2])
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairComparison {
    pub a: String,
    pub b: String,
    pub rank_a: f64,
    pub rank_b: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FriedmanNemenyi {
    /// `(method, mean rank)`, best (lowest) first.
    pub mean_ranks: Vec<(String, f64)>,
    /// Friedman chi-square statistic.
    pub statistic: f64,
    /// Nemenyi critical difference of mean ranks.
    pub critical_difference: f64,
    pub n: usize,
    /// All pairs, in best-first order.
    pub pairs: Vec<PairComparison>,
}

/// Friedman test with Nemenyi post-hoc comparisons. `scores[n][m]` is the
/// score (lower is better) of method `m` on series `n`.
pub fn friedman_nemenyi(scores: &[Vec<f64>], names: &[String], alpha: f64) -> Result<FriedmanNemenyi> {
    let n = scores.len();
    let m = names.len();
    if n < 2 || m < 2 {
        return Err(Error::InvalidArgument(format!(
            "Friedman test needs at least 2 series and 2 methods, got {n} and {m}"
        )));
    }
    if scores.iter().any(|row| row.len() != m) {
        return Err(Error::LengthMismatch("score rows must have one value per method".into()));
    }
    let q = nemenyi_critical_value(alpha, m)?;
    let mut sums = vec![0.0; m];
    for row in scores {
        for (s, r) in sums.iter_mut().zip(average_ranks(row)) {
            *s += r;
        }
    }
    let mean: Vec<f64> = sums.iter().map(|s| s / n as f64).collect();
    let (nf, mf) = (n as f64, m as f64);
    let statistic =
        12.0 * nf / (mf * (mf + 1.0)) * (mean.iter().map(|r| r * r).sum::<f64>() - mf * (mf + 1.0).powi(2) / 4.0);
    // q is the studentized range over sqrt(2); equivalently q*sqrt(2)*sqrt(M(M+1)/(12N)).
    let cd = q * (mf * (mf + 1.0) / (6.0 * nf)).sqrt();

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| mean[a].total_cmp(&mean[b]));
    let mut pairs = Vec::new();
    for (x, &a) in order.iter().enumerate() {
        for &b in &order[x + 1..] {
            pairs.push(PairComparison {
                a: names[a].clone(),
                b: names[b].clone(),
                rank_a: mean[a],
                rank_b: mean[b],
                significant: (mean[a] - mean[b]).abs() > cd,
            });
        }
    }
    Ok(FriedmanNemenyi {
        mean_ranks: order.iter().map(|&i| (names[i].clone(), mean[i])).collect(),
        statistic,
        critical_difference: cd,
        n,
        pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn strict_dominance() {
        let scores: Vec<Vec<f64>> = (0..100).map(|i| vec![1.0 + i as f64, 2.0 + i as f64]).collect();
        let r = friedman_nemenyi(&scores, &names(&["a", "b"]), 0.05).unwrap();
        assert_eq!(r.mean_ranks, vec![("a".to_string(), 1.0), ("b".to_string(), 2.0)]);
        assert!((r.critical_difference - 1.959964 * (6.0f64 / 600.0).sqrt()).abs() < 1e-12);
        assert!(r.pairs[0].significant);
        assert!((r.statistic - 100.0).abs() < 1e-9);
    }

    #[test]
    fn ties_not_significant() {
        let scores: Vec<Vec<f64>> = (0..50).map(|i| vec![i as f64, i as f64]).collect();
        let r = friedman_nemenyi(&scores, &names(&["a", "b"]), 0.05).unwrap();
        assert_eq!(r.mean_ranks[0].1, 1.5);
        assert_eq!(r.mean_ranks[1].1, 1.5);
        assert!(!r.pairs[0].significant);
        assert_eq!(r.statistic, 0.0);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(friedman_nemenyi(&[vec![1.0, 2.0]], &names(&["a", "b"]), 0.05).is_err());
        assert!(friedman_nemenyi(&[vec![1.0, 2.0], vec![1.0, 2.0]], &names(&["a", "b"]), 0.2).is_err());
        assert!(nemenyi_critical_value(0.05, 21).is_err());
        assert_eq!(nemenyi_critical_value(0.05, 2).unwrap(), 1.959964);
    }

    #[test]
    fn thirds_boundaries() {
        // K = 6: ranks {1,2} top, {3,4} middle, {5,6} bottom.
        let mae = vec![vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]; 6];
        let sel = vec![("s".to_string(), vec![0, 1, 2, 3, 4, 5])];
        let t = &rank_thirds(&mae, &sel).unwrap()[0];
        assert!((t.top - 1.0 / 3.0).abs() < 1e-15);
        assert!((t.middle - 1.0 / 3.0).abs() < 1e-15);
        assert!((t.bottom - 1.0 / 3.0).abs() < 1e-15);

        let oracle = vec![("oracle".to_string(), vec![0; 6])];
        assert_eq!(rank_thirds(&mae, &oracle).unwrap()[0].top, 1.0);
        assert!(rank_thirds(&[vec![1.0, 2.0]], &oracle).is_err());
    }

    #[test]
    fn thirds_fifteen_models() {
        let mae = vec![(1..=15).map(f64::from).collect::<Vec<_>>()];
        for (idx, expected) in [(4, 0), (5, 1), (9, 1), (10, 2)] {
            let t = &rank_thirds(&mae, &[("s".into(), vec![idx])]).unwrap()[0];
            let got = [t.top, t.middle, t.bottom].iter().position(|&v| v == 1.0).unwrap();
            assert_eq!(got, expected, "model index {idx}");
        }
    }
}
