//! Binomial tail probabilities: the 2^{-N*theta*p} Chernoff-type bound
//! and an exact summation oracle.

use super::beta::ln_gamma;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A tail bound for a Binom(N, p) variable at a real threshold.
///
/// `bound` is kept in natural scale (clamped to [0, 1]); `bound_log2` is
/// the exact base-2 log, which stays finite where N*theta*p exceeds ~1074.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailBound {
    pub trials: u64,
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub success_prob: f64,
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub threshold: f64,
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub bound: f64,
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub bound_log2: f64,
}

impl TailBound {
    /// The Chernoff-type bound P(xi > N*theta*p) < 2^{-N*theta*p}, asserted
    /// only for theta >= 6.
    pub fn chernoff(trials: u64, p: f64, theta: f64) -> Result<TailBound> {
        let log2 = chernoff_bound_log2(trials, p, theta)?;
        Ok(TailBound {
            trials,
            success_prob: p,
            threshold: trials as f64 * theta * p,
            bound: log2.exp2().clamp(0.0, 1.0),
            bound_log2: log2,
        })
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("success probability must be in (0, 1), got {p}")));
    }
    Ok(())
}

/// 2^{-N * theta * p}, valid for theta >= 6 (the regime in which the
/// inequality P(xi > N*theta*p) < 2^{-N*theta*p} is asserted).
pub fn chernoff_bound(trials: u64, p: f64, theta: f64) -> Result<f64> {
    Ok(chernoff_bound_log2(trials, p, theta)?.exp2().clamp(0.0, 1.0))
}

/// Base-2 log of the Chernoff bound: exactly -N*theta*p.
pub fn chernoff_bound_log2(trials: u64, p: f64, theta: f64) -> Result<f64> {
    if theta < 6.0 {
        return Err(Error::precondition(format!(
            "chernoff bound requires theta >= 6, got {theta}"
        )));
    }
    check_p(p)?;
    if trials == 0 {
        return Err(Error::domain("trials must be >= 1".to_string()));
    }
    Ok(-(trials as f64) * theta * p)
}

/// Exact upper tail P(xi > k) for xi ~ Binom(N, p), by compensated
/// summation of the probability mass above floor(k).
pub fn binomial_tail_exact(trials: u64, p: f64, k: f64) -> Result<f64> {
    check_p(p)?;
    if trials == 0 {
        return Err(Error::domain("trials must be >= 1".to_string()));
    }
    if !(0.0..=(trials as f64)).contains(&k) {
        return Err(Error::domain(format!(
            "threshold must satisfy 0 <= k <= N, got k={k}, N={trials}"
        )));
    }
    let first = k.floor() as u64 + 1;
    if first > trials {
        return Ok(0.0);
    }
    let n = trials as f64;
    let q = 1.0 - p;
    let ratio = p / q;

    // First term via logs, successors by the term recurrence; all terms are
    // positive so Neumaier compensation keeps the relative error near eps.
    let i0 = first as f64;
    let ln_first = ln_choose(n, i0) + i0 * p.ln() + (n - i0) * q.ln();
    let mut term = ln_first.exp();
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for i in first..=trials {
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
        // advance: term(i+1) = term(i) * (N - i)/(i + 1) * p/q
        let fi = i as f64;
        term *= (n - fi) / (fi + 1.0) * ratio;
    }
    Ok((sum + comp).clamp(0.0, 1.0))
}

fn ln_choose(n: f64, k: f64) -> f64 {
    ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_cases_exact() {
        assert!((binomial_tail_exact(1, 0.5, 0.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((binomial_tail_exact(2, 0.5, 1.0).unwrap() - 0.25).abs() < 1e-15);
        // P(xi > N) = 0
        assert_eq!(binomial_tail_exact(5, 0.3, 5.0).unwrap(), 0.0);
        // P(xi > 0) = 1 - q^N
        let v = binomial_tail_exact(4, 0.25, 0.0).unwrap();
        assert!((v - (1.0 - 0.75_f64.powi(4))).abs() < 1e-15);
    }

    #[test]
    fn matches_incomplete_beta_identity() {
        // P(xi > k) = I_p(k+1, N-k) for integer k in [0, N)
        for &(n, p, k) in &[
            (30_u64, 0.2_f64, 10.0_f64),
            (100, 0.5, 55.0),
            (200, 0.05, 17.0),
            (7, 0.9, 3.0),
        ] {
            let tail = binomial_tail_exact(n, p, k).unwrap();
            let ident = super::super::beta::betainc(k + 1.0, n as f64 - k, p).unwrap();
            assert!(
                (tail - ident).abs() <= 1e-12 * ident.max(1e-300),
                "N={n} p={p} k={k}: sum={tail:e} beta={ident:e}"
            );
        }
    }

    #[test]
    fn chernoff_requires_theta_six() {
        assert!(chernoff_bound(10, 0.5, 5.9).is_err());
        let v = chernoff_bound(100, 0.1, 6.0).unwrap();
        assert!((v - (-60.0_f64).exp2()).abs() < 1e-30);
        assert_eq!(chernoff_bound_log2(100, 0.1, 6.0).unwrap(), -60.0);
    }

    #[test]
    fn chernoff_dominates_exact_tail_spot_checks() {
        for &(n, p) in &[(100_u64, 0.1_f64), (50, 0.02), (200, 0.05), (30, 0.15)] {
            let t = 6.0 * n as f64 * p;
            if t >= n as f64 {
                continue;
            }
            let exact = binomial_tail_exact(n, p, t.floor()).unwrap();
            let bound = chernoff_bound(n, p, 6.0).unwrap();
            assert!(exact <= bound, "N={n} p={p}: exact {exact:e} > bound {bound:e}");
        }
    }

    #[test]
    fn domain_errors() {
        assert!(binomial_tail_exact(10, 0.0, 2.0).is_err());
        assert!(binomial_tail_exact(10, 1.0, 2.0).is_err());
        assert!(binomial_tail_exact(10, 0.5, -1.0).is_err());
        assert!(binomial_tail_exact(10, 0.5, 11.0).is_err());
        assert!(binomial_tail_exact(0, 0.5, 0.0).is_err());
    }
}
