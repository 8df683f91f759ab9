//! Rank correlation and paired tests. Everything here is `f64`.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};

/// Average (fractional) ranks starting at 1; ties share their mean rank.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && x[order[end]] == x[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::TooFewValues { needed: 2, got: x.len() });
    }
    let constant = |v: &[f64]| v.iter().all(|&a| a == v[0]);
    if constant(x) || constant(y) {
        return Err(Error::ConstantVector);
    }
    Ok(pearson(&average_ranks(x), &average_ranks(y)))
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample standard deviation (n − 1); 0 for fewer than two values.
pub fn sample_sd(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let m = mean(x);
    (x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    PairedTTwoTailed,
    WilcoxonSignedRank,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    TwoSided,
    /// First sample tends to be larger.
    Greater,
    Less,
}

/// `(t, p)` for the paired two-tailed t-test on `a − b`.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    if d.iter().all(|&v| v == 0.0) {
        return Ok((0.0, 1.0));
    }
    if d.len() < 2 {
        return Err(Error::TooFewValues { needed: 2, got: d.len() });
    }
    let sd = sample_sd(&d);
    if sd == 0.0 {
        return Err(Error::DegenerateTest);
    }
    let n = d.len() as f64;
    let t = mean(&d) / (sd / n.sqrt());
    Ok((t, t_two_tailed_p(t, n - 1.0)))
}

/// `P(|T| ≥ |t|)` for Student's t with `df` degrees of freedom.
pub fn t_two_tailed_p(t: f64, df: f64) -> f64 {
    if !t.is_finite() {
        return 0.0;
    }
    beta_reg(df / 2.0, 0.5, df / (df + t * t)).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// Sum of ranks of the positive differences.
    pub statistic: f64,
    pub p_value: f64,
    /// Nonzero differences used.
    pub n: usize,
    pub exact: bool,
}

pub const WILCOXON_EXACT_MAX: usize = 25;

/// Wilcoxon signed-rank test on paired differences. Zeros are dropped, tied
/// magnitudes share average ranks; exact null distribution for n ≤ 25,
/// otherwise the tie-corrected normal approximation with continuity correction.
/// All-zero input gives statistic 0 and p = 1.
pub fn wilcoxon_signed_rank(diffs: &[f64], alternative: Alternative) -> WilcoxonResult {
    let nz: Vec<f64> = diffs.iter().copied().filter(|&d| d != 0.0).collect();
    let n = nz.len();
    if n == 0 {
        return WilcoxonResult { statistic: 0.0, p_value: 1.0, n: 0, exact: true };
    }
    let ranks = average_ranks(&nz.iter().map(|d| d.abs()).collect::<Vec<_>>());
    let w_plus: f64 = nz.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    if n <= WILCOXON_EXACT_MAX {
        return WilcoxonResult { statistic: w_plus, p_value: exact_p(&ranks, w_plus, alternative), n, exact: true };
    }
    let nf = n as f64;
    let mut abs_sorted: Vec<f64> = nz.iter().map(|d| d.abs()).collect();
    abs_sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && abs_sorted[j] == abs_sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    let mu = nf * (nf + 1.0) / 4.0;
    let sigma = (nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0).sqrt();
    let normal = Normal::standard();
    let z_upper = (w_plus - mu - 0.5) / sigma;
    let z_lower = (w_plus - mu + 0.5) / sigma;
    let upper = 1.0 - normal.cdf(z_upper);
    let lower = normal.cdf(z_lower);
    let p = match alternative {
        Alternative::Greater => upper,
        Alternative::Less => lower,
        Alternative::TwoSided => (2.0 * lower.min(upper)).min(1.0),
    };
    WilcoxonResult { statistic: w_plus, p_value: p.clamp(0.0, 1.0), n, exact: false }
}

/// Exact null distribution of W+ by dynamic programming over doubled ranks
/// (average ranks are multiples of 1/2).
fn exact_p(ranks: &[f64], w_plus: f64, alternative: Alternative) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut counts = vec![0f64; total + 1];
    counts[0] = 1.0;
    for &r in &doubled {
        for s in (r..=total).rev() {
            counts[s] += counts[s - r];
        }
    }
    let all = 2f64.powi(ranks.len() as i32);
    let w2 = (2.0 * w_plus).round() as usize;
    let lower: f64 = counts[..=w2].iter().sum::<f64>() / all;
    let upper: f64 = counts[w2..].iter().sum::<f64>() / all;
    match alternative {
        Alternative::Greater => upper,
        Alternative::Less => lower,
        Alternative::TwoSided => (2.0 * lower.min(upper)).min(1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Rank by counting strictly smaller and equal values; Pearson on ranks.
    fn brute_spearman(x: &[f64], y: &[f64]) -> f64 {
        let rank = |v: &[f64]| -> Vec<f64> {
            v.iter()
                .map(|&a| {
                    let less = v.iter().filter(|&&b| b < a).count() as f64;
                    let eq = v.iter().filter(|&&b| b == a).count() as f64;
                    less + (eq + 1.0) / 2.0
                })
                .collect()
        };
        let (rx, ry) = (rank(x), rank(y));
        let n = x.len() as f64;
        let mx = rx.iter().sum::<f64>() / n;
        let my = ry.iter().sum::<f64>() / n;
        let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
        let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
        let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
        cov / (vx * vy).sqrt()
    }

    #[test]
    fn spearman_examples() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        assert!(matches!(spearman(&[1.0, 1.0], &[1.0, 2.0]), Err(Error::ConstantVector)));
        assert!(matches!(spearman(&[1.0], &[1.0, 2.0]), Err(Error::LengthMismatch(1, 2))));
    }

    #[test]
    fn spearman_matches_brute_force_with_ties() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let x: Vec<f64> = (0..10).map(|_| rng.random_range(0..6) as f64).collect();
            let y: Vec<f64> = (0..10).map(|_| rng.random::<f64>()).collect();
            if let Ok(r) = spearman(&x, &y) {
                assert!((r - brute_spearman(&x, &y)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn spearman_monotone_invariance() {
        let x = [0.3, 1.2, -4.0, 2.2, 0.0, 7.5];
        let y = [1.0, 0.5, 2.0, 3.0, -1.0, 0.7];
        let tx: Vec<f64> = x.iter().map(|v: &f64| v.exp() * 3.0 + 1.0).collect();
        assert!((spearman(&x, &y).unwrap() - spearman(&tx, &y).unwrap()).abs() <= 1e-15);
    }

    #[test]
    fn t_test_conventions() {
        let a = [0.2, 0.4, 0.1];
        assert_eq!(paired_t_test(&a, &a).unwrap(), (0.0, 1.0));
        assert!(matches!(paired_t_test(&[1.0, 2.0], &[0.0, 1.0]), Err(Error::DegenerateTest)));
    }

    #[test]
    fn t_test_closed_form() {
        // Differences 0.1 ± 1e-3 alternating: mean 0.1, sd ≈ 1.054e-3, t ≈ 300.
        let b = [0.0; 10];
        let a: Vec<f64> = (0..10).map(|i| 0.1 + if i % 2 == 0 { 1e-3 } else { -1e-3 }).collect();
        let (t, p) = paired_t_test(&a, &b).unwrap();
        let sd = (10.0 * 1e-6 / 9.0f64).sqrt();
        assert!((t - 0.1 / (sd / 10f64.sqrt())).abs() < 1e-9);
        assert!(p < 1e-4);
    }

    #[test]
    fn t_p_value_matches_numeric_integration() {
        // Student-t density integrated by composite Simpson on [|t|, 200].
        let density = |x: f64, df: f64| {
            let ln_c = statrs::function::gamma::ln_gamma((df + 1.0) / 2.0)
                - statrs::function::gamma::ln_gamma(df / 2.0)
                - 0.5 * (df * std::f64::consts::PI).ln();
            (ln_c - (df + 1.0) / 2.0 * (1.0 + x * x / df).ln()).exp()
        };
        for (t, df) in [(0.5, 4.0), (2.1, 9.0), (-1.3, 12.0), (3.0, 18.0)] {
            let (lo, hi, m) = (f64::abs(t), 400.0, 400_000);
            let h = (hi - lo) / m as f64;
            let mut s = density(lo, df) + density(hi, df);
            for i in 1..m {
                s += density(lo + i as f64 * h, df) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            let tail = s * h / 3.0;
            assert!((t_two_tailed_p(t, df) - 2.0 * tail).abs() < 1e-6, "t={t} df={df}");
        }
    }

    /// Enumerates every sign assignment of the ranks.
    fn enumerate_p(diffs: &[f64], alt: Alternative) -> f64 {
        let nz: Vec<f64> = diffs.iter().copied().filter(|&d| d != 0.0).collect();
        let ranks = average_ranks(&nz.iter().map(|d| d.abs()).collect::<Vec<_>>());
        let observed: f64 = nz.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
        let n = nz.len();
        let (mut ge, mut le) = (0u64, 0u64);
        for mask in 0u64..1 << n {
            let w: f64 = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
            if w >= observed - 1e-9 {
                ge += 1;
            }
            if w <= observed + 1e-9 {
                le += 1;
            }
        }
        let total = (1u64 << n) as f64;
        match alt {
            Alternative::Greater => ge as f64 / total,
            Alternative::Less => le as f64 / total,
            Alternative::TwoSided => (2.0 * (ge.min(le) as f64) / total).min(1.0),
        }
    }

    #[test]
    fn wilcoxon_exact_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=10 {
            for _ in 0..20 {
                let d: Vec<f64> = (0..n).map(|_| rng.random_range(-4..=4) as f64).collect();
                for alt in [Alternative::TwoSided, Alternative::Greater, Alternative::Less] {
                    let got = wilcoxon_signed_rank(&d, alt).p_value;
                    let want = if d.iter().all(|&x| x == 0.0) { 1.0 } else { enumerate_p(&d, alt) };
                    assert!((got - want).abs() < 1e-12, "{d:?} {alt:?}: {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn wilcoxon_three_positive_one_sided() {
        let r = wilcoxon_signed_rank(&[2.0, 5.0, 1.0], Alternative::Greater);
        assert_eq!(r.statistic, 6.0);
        assert_eq!(r.p_value, 1.0 / 8.0);
        assert_eq!(wilcoxon_signed_rank(&[0.0, 0.0], Alternative::TwoSided).p_value, 1.0);
    }

    #[test]
    fn wilcoxon_normal_approximation_is_close_to_exact() {
        let d: Vec<f64> = (1..=30).map(|i| if i % 3 == 0 { -(i as f64) } else { i as f64 }).collect();
        let approx = wilcoxon_signed_rank(&d, Alternative::TwoSided);
        assert!(!approx.exact);
        let ranks = average_ranks(&d.iter().map(|x| x.abs()).collect::<Vec<_>>());
        let exact = exact_p(&ranks, approx.statistic, Alternative::TwoSided);
        assert!((approx.p_value - exact).abs() < 5e-3, "{} vs {exact}", approx.p_value);
    }

    #[test]
    fn sd_conventions() {
        assert_eq!(sample_sd(&[3.0]), 0.0);
        assert!((sample_sd(&[1.0, 2.0, 3.0]) - 1.0).abs() < 1e-15);
    }
}
