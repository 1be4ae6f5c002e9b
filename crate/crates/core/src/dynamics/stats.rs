use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{contract, Result};

/// Kolmogorov–Smirnov outcome.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    /// Effective sample size `n·m/(n+m)` (or `n` for a one-sample test).
    pub effective_n: f64,
    pub p_value: f64,
    /// Critical value of the statistic at the 1% level.
    pub critical_1pct: f64,
}

impl KsResult {
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value > alpha
    }
}

/// `P(K > λ)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn ks_from(d: f64, ne: f64) -> KsResult {
    let sq = ne.sqrt();
    let lambda = (sq + 0.12 + 0.11 / sq) * d;
    // sqrt(ln(2/α)/2) at α = 0.01.
    let c = (200_f64.ln() / 2.0).sqrt();
    KsResult { statistic: d, effective_n: ne, p_value: kolmogorov_survival(lambda), critical_1pct: c / sq }
}

fn sorted(xs: &[f64]) -> Result<Vec<f64>> {
    if xs.is_empty() || xs.iter().any(|x| !x.is_finite()) {
        return Err(contract("KS test needs a nonempty finite sample"));
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Two-sample KS test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    let (a, b) = (sorted(a)?, sorted(b)?);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0_f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(ks_from(d, n * m / (n + m)))
}

/// One-sample KS test against a continuous CDF.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    let v = sorted(xs)?;
    let n = v.len() as f64;
    let d = v.iter().enumerate().fold(0.0_f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max(((i + 1) as f64 / n - f).abs()).max((f - i as f64 / n).abs())
    });
    Ok(ks_from(d, n))
}

/// KS test of `xs` against the unit-mean exponential law.
pub fn ks_exponential(xs: &[f64]) -> Result<KsResult> {
    ks_one_sample(xs, |x| if x <= 0.0 { 0.0 } else { -(-x).exp_m1() })
}

#[derive(Clone, Debug, Serialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Number of bins after merging sparse ones.
    pub bins: usize,
}

impl ChiSquareResult {
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value > alpha
    }
}

/// Pearson goodness-of-fit test of `observed` counts against `probs`.
///
/// Adjacent bins are merged until every expected count reaches `min_expected`.
pub fn chi_square_gof(observed: &[u64], probs: &[f64], min_expected: f64) -> Result<ChiSquareResult> {
    if observed.len() != probs.len() || observed.is_empty() {
        return Err(contract("observed counts and probabilities must have equal nonzero length"));
    }
    let total: u64 = observed.iter().sum();
    let psum: f64 = probs.iter().sum();
    if total == 0 || !(psum > 0.0) {
        return Err(contract("chi-square test needs positive totals"));
    }
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (&k, &p) in observed.iter().zip(probs) {
        o += k as f64;
        e += p / psum * total as f64;
        if e >= min_expected {
            bins.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => bins.push((o, e)),
        }
    }
    if bins.len() < 2 {
        return Err(contract("chi-square test needs at least two bins"));
    }
    let statistic: f64 = bins.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = bins.len() - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| contract(e.to_string()))?;
    Ok(ChiSquareResult { statistic, dof, p_value: 1.0 - dist.cdf(statistic), bins: bins.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kolmogorov_tail_values() {
        // Tabulated quantiles of the Kolmogorov distribution.
        assert!((kolmogorov_survival(1.3581) - 0.05).abs() < 1e-4);
        assert!((kolmogorov_survival(1.6276) - 0.01).abs() < 1e-4);
        assert_eq!(kolmogorov_survival(0.0), 1.0);
    }

    #[test]
    fn identical_samples_have_zero_distance() {
        let a: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let r = ks_two_sample(&a, &a).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn disjoint_samples_have_unit_distance() {
        let a: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let b: Vec<f64> = (100..150).map(|i| i as f64).collect();
        let r = ks_two_sample(&a, &b).unwrap();
        assert_eq!(r.statistic, 1.0);
        assert!(r.p_value < 1e-10);
    }

    #[test]
    fn exponential_quantiles_fit() {
        // Midpoint quantiles: D = 1/(2n).
        let n = 1000;
        let xs: Vec<f64> = (0..n).map(|i| -(1.0 - (i as f64 + 0.5) / n as f64).ln()).collect();
        let r = ks_exponential(&xs).unwrap();
        assert!((r.statistic - 0.5 / n as f64).abs() < 1e-12);
        assert!(r.passes(0.01));
    }

    #[test]
    fn chi_square_of_exact_counts_is_zero() {
        let r = chi_square_gof(&[25, 25, 50], &[0.25, 0.25, 0.5], 5.0).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.dof, 2);
        assert!((r.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chi_square_merges_sparse_bins() {
        let r = chi_square_gof(&[2, 3, 95], &[0.02, 0.03, 0.95], 5.0).unwrap();
        assert_eq!(r.bins, 2);
        // Rejects a grossly wrong law.
        let bad = chi_square_gof(&[90, 10], &[0.5, 0.5], 5.0).unwrap();
        assert!(!bad.passes(0.01));
    }
}
