//! The parameter planner: given D and the sphere dimension n, derive the
//! full parameter set (alpha, delta, p, theta, N, T) realizing the
//! exponential lower bound D^n/18, and evaluate every feasibility
//! inequality with exact cap measures.
//!
//! Parameter chain (ambient dimension is n+1 throughout):
//!   alpha = arcsin(1/D),      delta = alpha/n,
//!   p     = 2 Omega_n(alpha + delta),
//!   theta chosen so 1/(theta p) = D^n/36,
//!   N     = floor( (1/(4 Omega_n(pi - 2 alpha)))^(1/2) ),
//!   T     = N theta p,        lower_bound = 2/(theta p) = D^n/18.
//!
//! Natural-scale fields can overflow or underflow for large n; every
//! derived quantity therefore carries a log2-scale companion computed in
//! the log domain, which is authoritative.

use crate::cap::cap_measure_ln;
use crate::error::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, LN_2, PI};

pub const PLAN_SCHEMA: &str = "spiky.plan/v1";
pub const SCAN_SCHEMA: &str = "spiky.scan/v1";

/// Upper end of the D range in which the derivation is claimed.
pub const THEOREM_D_MAX: f64 = 1.116;

/// The three core feasibility inequalities, evaluated with exact cap
/// measures (log-domain where natural scale over/underflows).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FeasibilityFlags {
    /// N >= 1: the spike budget floor((1/(4 Omega_n(pi-2alpha)))^(1/2))
    /// admits a positive integer.
    pub spike_budget: bool,
    /// (n^2 / sin^n delta) * 2^(-theta N p) <= 1/4.
    pub net_union_tail: bool,
    /// theta >= 6.
    pub chernoff_regime: bool,
}

impl FeasibilityFlags {
    pub fn all(&self) -> bool {
        self.spike_budget && self.net_union_tail && self.chernoff_regime
    }
}

/// The derivation's intermediate inequalities and side conditions,
/// reported separately from the core flags.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DerivedChecks {
    /// 1/(theta p) <= 1/(24 n sqrt(Omega_n(pi-2alpha)) log2(1/delta)).
    pub c15: bool,
    /// 1/(theta p) <= 1/(12 Omega_n(alpha+delta)); equivalent to theta >= 6
    /// by the definition of p.
    pub c16: bool,
    /// 1/(theta p) <= 1/(36 Omega_n(alpha)).
    pub c17: bool,
    /// alpha > 1.11 (the shortcut range; recorded, not relied on).
    pub alpha_range: bool,
    /// sin^2(alpha + delta) > sin(pi - 2 alpha): lets (16) strengthen (15).
    pub chain_cap: bool,
    /// The closing estimate applies at phi = alpha:
    /// alpha <= arccos(1/sqrt(n+1)) and sqrt(2 pi n) cos(alpha) >= 1.
    pub bw_final_step: bool,
    /// alpha + delta < pi/2, so the two caps of a ± pair are disjoint and
    /// per-direction multiplicities really are Binom(N, p); the tail
    /// estimates (and hence the probabilistic reading of the net-union
    /// inequality) require this.
    pub binomial_model: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Plan {
    pub schema: String,
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub big_d: f64,
    /// Sphere dimension n; the body lives in R^{n+1}.
    pub n: usize,
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub alpha: f64,
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub delta: f64,
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub p: f64,
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub theta: f64,
    /// N as a real (exact integer while representable; huge for theorem-scale n).
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub spikes: f64,
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub t: f64,
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub lower_bound: f64,
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub log2_p: f64,
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub log2_theta: f64,
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub log2_spikes: f64,
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub log2_lower_bound: f64,
    pub flags: FeasibilityFlags,
    pub derived: DerivedChecks,
    pub feasible: bool,
    pub in_theorem_range: bool,
}

/// Plan parameters for D in the claimed range (1, 1.116).
pub fn plan_parameters(big_d: f64, n: usize) -> Result<Plan> {
    if !(big_d > 1.0 && big_d < THEOREM_D_MAX) {
        return Err(Error::domain(format!(
            "plan_parameters requires 1 < D < {THEOREM_D_MAX}, got {big_d}; \
             use plan_parameters_relaxed to compute out-of-range plans"
        )));
    }
    plan_parameters_relaxed(big_d, n)
}

/// Relaxed mode: any finite D > 1; the plan is computed and marked
/// out-of-theorem when D is outside (1, 1.116).
pub fn plan_parameters_relaxed(big_d: f64, n: usize) -> Result<Plan> {
    if !(big_d > 1.0 && big_d.is_finite()) {
        return Err(Error::domain(format!("D must be finite and > 1, got {big_d}")));
    }
    if n < 2 {
        return Err(Error::domain(format!("sphere dimension n must be >= 2, got {n}")));
    }
    let d_ambient = n + 1;
    let nf = n as f64;
    let alpha = (1.0 / big_d).asin();
    let delta = alpha / nf;
    let ln_d = big_d.ln();

    let pma = PI - 2.0 * alpha;
    let ln_omega_pma = cap_measure_ln(d_ambient, pma)?;
    let ln_omega_ad = cap_measure_ln(d_ambient, alpha + delta)?;
    let ln_omega_a = cap_measure_ln(d_ambient, alpha)?;

    // N = floor(exp(-(ln 4 + ln Omega)/2)); the floor is exact while N is
    // integer-representable, which is the only regime where it matters.
    let ln_spikes_real = -0.5 * (4.0_f64.ln() + ln_omega_pma);
    let spikes = ln_spikes_real.exp().floor();
    let log2_spikes = if spikes.is_finite() && spikes > 0.0 {
        spikes.log2()
    } else {
        ln_spikes_real / LN_2
    };

    let ln_p = 2.0_f64.ln() + ln_omega_ad;
    let p = ln_p.exp();
    // 1/(theta p) = D^n / 36
    let ln_theta = 36.0_f64.ln() - nf * ln_d - ln_p;
    let theta = ln_theta.exp();
    // T = N theta p = 36 N / D^n
    let t = if spikes == 0.0 {
        0.0
    } else {
        (36.0_f64.ln() + spikes.ln() - nf * ln_d).exp()
    };
    let ln_lower = nf * ln_d - 18.0_f64.ln();
    let lower_bound = ln_lower.exp();

    let flags = FeasibilityFlags {
        spike_budget: spikes >= 1.0,
        // log2(n^2) - n log2(sin delta) - T <= -2
        net_union_tail: 2.0 * nf.log2() - nf * delta.sin().log2() - t <= -2.0,
        chernoff_regime: ln_theta >= 6.0_f64.ln(),
    };
    let derived = DerivedChecks {
        // theta p >= 24 n sqrt(Omega(pi-2a)) log2(1/delta)
        c15: 36.0_f64.ln() - nf * ln_d
            >= (24.0 * nf * (1.0 / delta).log2()).ln() + 0.5 * ln_omega_pma,
        // theta p >= 12 Omega(alpha+delta)
        c16: 36.0_f64.ln() - nf * ln_d >= 12.0_f64.ln() + ln_omega_ad,
        // theta p >= 36 Omega(alpha)  <=>  Omega(alpha) <= D^-n
        c17: ln_omega_a <= -nf * ln_d,
        alpha_range: alpha > 1.11,
        chain_cap: (alpha + delta).sin().powi(2) > pma.sin(),
        bw_final_step: alpha <= (1.0 / (nf + 1.0).sqrt()).acos()
            && (2.0 * PI * nf).sqrt() * alpha.cos() >= 1.0,
        binomial_model: alpha + delta < FRAC_PI_2,
    };

    Ok(Plan {
        schema: PLAN_SCHEMA.to_string(),
        big_d,
        n,
        alpha,
        delta,
        p,
        theta,
        spikes,
        t,
        lower_bound,
        log2_p: ln_p / LN_2,
        log2_theta: ln_theta / LN_2,
        log2_spikes,
        log2_lower_bound: ln_lower / LN_2,
        feasible: flags.all(),
        flags,
        derived,
        in_theorem_range: big_d > 1.0 && big_d < THEOREM_D_MAX,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanTable {
    pub schema: String,
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub big_d: f64,
    pub n_min: usize,
    pub n_max: usize,
    pub rows: Vec<Plan>,
    /// First n at which each core inequality passes.
    pub onset_spike_budget: Option<usize>,
    pub onset_net_union_tail: Option<usize>,
    pub onset_chernoff: Option<usize>,
    /// First n at which all three pass simultaneously.
    pub onset_feasible: Option<usize>,
}

/// Run the planner across n in [n_min, n_max] and locate flag onsets.
pub fn feasibility_scan(big_d: f64, n_min: usize, n_max: usize) -> Result<ScanTable> {
    if n_min < 2 || n_min > n_max {
        return Err(Error::domain(format!(
            "scan range must satisfy 2 <= n_min <= n_max, got [{n_min}, {n_max}]"
        )));
    }
    let rows = (n_min..=n_max)
        .into_par_iter()
        .map(|n| plan_parameters_relaxed(big_d, n))
        .collect::<Result<Vec<Plan>>>()?;
    let first = |pred: &dyn Fn(&Plan) -> bool| rows.iter().find(|p| pred(p)).map(|p| p.n);
    Ok(ScanTable {
        schema: SCAN_SCHEMA.to_string(),
        big_d,
        n_min,
        n_max,
        onset_spike_budget: first(&|p| p.flags.spike_budget),
        onset_net_union_tail: first(&|p| p.flags.net_union_tail),
        onset_chernoff: first(&|p| p.flags.chernoff_regime),
        onset_feasible: first(&|p| p.feasible),
        rows,
    })
}

/// The covering-based upper bound (n ln n + n ln ln n + 5n) / Omega_{n-1}(alpha)
/// for a body in R^n with (1/D) B ⊆ K ⊆ B, alpha = arcsin(1/D).
/// Needs n >= 3 (below that, ln ln n is nonpositive; report a constructed
/// covering count instead).
pub fn illumination_upper_bound(big_d: f64, n: usize) -> Result<f64> {
    Ok(illumination_upper_bound_ln(big_d, n)?.exp())
}

/// Natural log of the upper bound; finite far past f64 overflow of the
/// natural value.
pub fn illumination_upper_bound_ln(big_d: f64, n: usize) -> Result<f64> {
    if !(big_d > 1.0 && big_d.is_finite()) {
        return Err(Error::domain(format!("D must be finite and > 1, got {big_d}")));
    }
    if n < 3 {
        return Err(Error::domain(format!(
            "the covering formula needs n >= 3 (n ln ln n degenerates), got {n}"
        )));
    }
    let nf = n as f64;
    let numerator = nf * nf.ln() + nf * nf.ln().ln() + 5.0 * nf;
    let alpha = (1.0 / big_d).asin();
    Ok(numerator.ln() - cap_measure_ln(n, alpha)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cap::cap_measure;

    #[test]
    fn plan_algebra_holds() {
        for (big_d, n) in [(1.1, 10), (1.05, 50), (1.1, 100), (1.01, 7)] {
            let plan = plan_parameters(big_d, n).unwrap();
            // lower bound is D^n/18 and equals 2/(theta p)
            let dn = big_d.powi(n as i32);
            assert!((plan.lower_bound - dn / 18.0).abs() <= 1e-12 * plan.lower_bound);
            assert!(
                (plan.lower_bound * plan.theta * plan.p - 2.0).abs() < 1e-10,
                "2/(theta p) identity at D={big_d}, n={n}"
            );
            // T = N theta p
            if plan.spikes >= 1.0 {
                let t = plan.spikes * plan.theta * plan.p;
                assert!((plan.t - t).abs() <= 1e-10 * t.max(1e-300));
            }
            // log fields agree with natural fields
            assert!((plan.log2_lower_bound - plan.lower_bound.log2()).abs() < 1e-9);
            assert!((plan.log2_theta - plan.theta.log2()).abs() < 1e-9);
        }
    }

    #[test]
    fn lower_bound_dominates_claimed_constant() {
        // 1/18 >= 1/20 as exact integers: 20 >= 18
        assert!(20_u32 >= 18_u32);
        for n in [5_usize, 100, 700, 2000] {
            let plan = plan_parameters(1.1, n).unwrap();
            // log-domain comparison of D^n/18 vs 0.05 D^n
            let log2_005 = n as f64 * 1.1_f64.log2() + 0.05_f64.log2();
            assert!(plan.log2_lower_bound >= log2_005);
        }
    }

    #[test]
    fn plan_survives_large_n_in_log_domain() {
        let plan = plan_parameters(1.1, 2000).unwrap();
        assert!(plan.log2_spikes.is_finite() && plan.log2_spikes > 0.0);
        assert!(plan.log2_lower_bound.is_finite());
        assert!(plan.feasible, "n=2000 at D=1.1 should be comfortably feasible");
        // natural-scale lower bound still representable here: 1.1^2000/18
        assert!(plan.lower_bound.is_finite());
    }

    #[test]
    fn rejects_out_of_range_d_strict_mode() {
        assert!(plan_parameters(1.2, 10).is_err());
        assert!(plan_parameters(1.0, 10).is_err());
        let relaxed = plan_parameters_relaxed(1.2, 10).unwrap();
        assert!(!relaxed.in_theorem_range);
    }

    #[test]
    fn upper_bound_formula_small_case() {
        let n = 3;
        let big_d = 1.1;
        let v = illumination_upper_bound(big_d, n).unwrap();
        let alpha = (1.0_f64 / big_d).asin();
        let expected = (3.0 * 3.0_f64.ln() + 3.0 * 3.0_f64.ln().ln() + 15.0)
            / cap_measure(3, alpha).unwrap();
        assert!((v - expected).abs() <= 1e-9 * expected);
        assert!(illumination_upper_bound(1.1, 2).is_err());
    }

    #[test]
    fn scan_reports_onsets() {
        let table = feasibility_scan(1.1, 2, 40).unwrap();
        assert_eq!(table.rows.len(), 39);
        assert!(table.onset_feasible.is_some());
        let onset = table.onset_feasible.unwrap();
        // every feasible row re-satisfies all three flags independently
        for row in &table.rows {
            if row.feasible {
                assert!(row.flags.spike_budget && row.flags.net_union_tail && row.flags.chernoff_regime);
            }
        }
        // the onset row itself is feasible
        assert!(table.rows.iter().find(|r| r.n == onset).unwrap().feasible);
    }
}
