//! Small statistics helpers for comparing strategies across seeds.

use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, DiscreteCDF};

/// Median of `values`; NaN for an empty slice.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Paired one-sided sign test of `a < b`. Ties count against.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignTest {
    pub wins: usize,
    pub pairs: usize,
    /// P(at least `wins` successes out of `pairs` fair coin flips).
    pub p_value: f64,
}

pub fn sign_test_less(a: &[f64], b: &[f64]) -> SignTest {
    assert_eq!(a.len(), b.len(), "sign test needs paired samples");
    let pairs = a.len();
    let wins = a.iter().zip(b).filter(|(x, y)| x < y).count();
    let p_value = if wins == 0 {
        1.0
    } else {
        let bin = Binomial::new(0.5, pairs as u64).expect("valid binomial");
        bin.sf(wins as u64 - 1)
    };
    SignTest { wins, pairs, p_value }
}

/// Chi-square test that two count histograms share one distribution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Homogeneity test over aligned bins. Bins with an expected count below
/// `min_expected` in either sample are pooled into one bin.
pub fn chi_square_homogeneity(a: &[u64], b: &[u64], min_expected: f64) -> ChiSquare {
    assert_eq!(a.len(), b.len(), "histograms must align");
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    let n = (na + nb) as f64;
    let (fa, fb) = (na as f64 / n, nb as f64 / n);
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        let total = (x + y) as f64;
        if total == 0.0 {
            continue;
        }
        if total * fa.min(fb) < min_expected {
            pooled.0 += x as f64;
            pooled.1 += y as f64;
        } else {
            bins.push((x as f64, y as f64));
        }
    }
    if pooled.0 + pooled.1 > 0.0 {
        bins.push(pooled);
    }
    if bins.len() < 2 || na == 0 || nb == 0 {
        return ChiSquare {
            statistic: 0.0,
            dof: 0,
            p_value: 1.0,
        };
    }
    let statistic: f64 = bins
        .iter()
        .map(|&(x, y)| {
            let t = x + y;
            let (ea, eb) = (t * fa, t * fb);
            (x - ea).powi(2) / ea + (y - eb).powi(2) / eb
        })
        .sum();
    let dof = bins.len() - 1;
    let p_value = ChiSquared::new(dof as f64).expect("dof >= 1").sf(statistic);
    ChiSquare {
        statistic,
        dof,
        p_value,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&[]).is_nan());
    }

    #[test]
    fn sign_test_thresholds() {
        let b = vec![1.0; 10];
        let nine: Vec<f64> = (0..10).map(|i| if i == 0 { 2.0 } else { 0.0 }).collect();
        let t = sign_test_less(&nine, &b);
        assert_eq!(t.wins, 9);
        assert!((t.p_value - 11.0 / 1024.0).abs() < 1e-12);
        let eight: Vec<f64> = (0..10).map(|i| if i < 2 { 2.0 } else { 0.0 }).collect();
        assert!(sign_test_less(&eight, &b).p_value > 0.05);
        assert_eq!(sign_test_less(&b, &b).wins, 0);
    }

    #[test]
    fn identical_histograms_are_homogeneous() {
        let a = [10, 20, 30, 0, 1];
        let c = chi_square_homogeneity(&a, &a, 5.0);
        assert_eq!(c.statistic, 0.0);
        assert!((c.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shifted_histograms_are_not() {
        let a = [100, 0, 100];
        let b = [0, 100, 100];
        assert!(chi_square_homogeneity(&a, &b, 5.0).p_value < 1e-10);
    }

    #[test]
    fn known_statistic() {
        // 2x2 table [[10, 20], [30, 40]]: chi2 = 0.7936507936507936.
        let c = chi_square_homogeneity(&[10, 20], &[30, 40], 1.0);
        assert!((c.statistic - 0.7936507936507936).abs() < 1e-12);
        assert_eq!(c.dof, 1);
    }
}
