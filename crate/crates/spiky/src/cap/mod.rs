//! Normalized spherical cap measures and the tail machinery built on them.
//!
//! Conventions: every function takes the *ambient* dimension d, so a cap of
//! radius phi on the sphere S^{d-1} in R^d has measure `cap_measure(d, phi)`.
//! The classical bounds (`bw_lower`, `bw_upper`, `cap_scaling_bound`) are
//! stated for a sphere of intrinsic dimension n and therefore pair with
//! `cap_measure(n + 1, phi)`.

pub mod beta;
pub mod binom;
pub mod quad;

pub use binom::{binomial_tail_exact, chernoff_bound, chernoff_bound_log2, TailBound};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::RwLock;

const QUAD_REL_TOL: f64 = 1e-12;

/// int_0^pi sin^m t dt, memoized per power (planner scans hit the same
/// normalization constant thousands of times).
fn sin_power_full_integral(m: i32) -> f64 {
    static CACHE: RwLock<Option<HashMap<i32, f64>>> = RwLock::new(None);
    if let Some(cache) = CACHE.read().unwrap().as_ref() {
        if let Some(&v) = cache.get(&m) {
            return v;
        }
    }
    let v = quad::integrate(move |t: f64| t.sin().max(0.0).powi(m), 0.0, PI, QUAD_REL_TOL);
    CACHE.write().unwrap().get_or_insert_with(HashMap::new).insert(m, v);
    v
}

/// A computed cap measure: the normalized (Haar probability) measure of a
/// spherical cap of the given angular radius on S^{d-1}.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CapMeasure {
    pub dimension_ambient: usize,
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub radius: f64,
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub value: f64,
}

impl CapMeasure {
    pub fn compute(d: usize, phi: f64) -> Result<CapMeasure> {
        Ok(CapMeasure {
            dimension_ambient: d,
            radius: phi,
            value: cap_measure(d, phi)?,
        })
    }
}

fn check_cap_domain(d: usize, phi: f64) -> Result<()> {
    if d < 2 {
        return Err(Error::domain(format!("ambient dimension must be >= 2, got {d}")));
    }
    if !(phi > 0.0 && phi < PI) {
        return Err(Error::domain(format!("cap radius must be in (0, pi), got {phi}")));
    }
    Ok(())
}

/// Normalized measure of a cap of radius `phi` on S^{d-1}:
/// int_0^phi sin^{d-2} t dt / int_0^pi sin^{d-2} t dt,
/// by adaptive quadrature to relative accuracy ~1e-10.
pub fn cap_measure(d: usize, phi: f64) -> Result<f64> {
    check_cap_domain(d, phi)?;
    let m = (d - 2) as i32;
    let num = quad::integrate(move |t: f64| t.sin().max(0.0).powi(m), 0.0, phi, QUAD_REL_TOL);
    let den = sin_power_full_integral(m);
    Ok((num / den).clamp(0.0, 1.0))
}

/// Natural log of `cap_measure(d, phi)`; usable far past the point where the
/// natural-scale value underflows (large d, small phi).
///
/// Same quadrature route as `cap_measure`, with the integrand peak factored
/// out of the numerator in log space.
pub fn cap_measure_ln(d: usize, phi: f64) -> Result<f64> {
    check_cap_domain(d, phi)?;
    if phi >= FRAC_PI_2 {
        // measure >= 1/2: no underflow possible
        return Ok(cap_measure(d, phi)?.ln());
    }
    let m = (d - 2) as f64;
    if m == 0.0 {
        return Ok((phi / PI).ln());
    }
    let ln_sin_phi = phi.sin().ln();
    // numerator = sin^m(phi) * int_0^phi exp(m*(ln sin t - ln sin phi)) dt
    let g = move |t: f64| {
        let s = t.sin();
        if s <= 0.0 {
            0.0
        } else {
            (m * (s.ln() - ln_sin_phi)).exp()
        }
    };
    let scaled_num = quad::integrate(g, 0.0, phi, QUAD_REL_TOL);
    let den = sin_power_full_integral(m as i32);
    Ok(m * ln_sin_phi + scaled_num.ln() - den.ln())
}

/// Lower cap estimate sin^n(phi) / sqrt(2 pi (n+1)) for a cap of radius
/// phi in (0, pi/2) on the n-dimensional sphere S^n.
pub fn bw_lower(n: u64, phi: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("sphere dimension n must be >= 1".to_string()));
    }
    if !(phi > 0.0 && phi < FRAC_PI_2) {
        return Err(Error::domain(format!("bw_lower requires phi in (0, pi/2), got {phi}")));
    }
    Ok(phi.sin().powi(n as i32) / (2.0 * PI * (n as f64 + 1.0)).sqrt())
}

/// Upper cap estimate sin^n(phi) / (sqrt(2 pi n) cos phi), valid for
/// phi <= arccos(1/sqrt(n+1)).
pub fn bw_upper(n: u64, phi: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("sphere dimension n must be >= 1".to_string()));
    }
    let limit = (1.0 / ((n as f64) + 1.0).sqrt()).acos();
    if !(phi > 0.0) {
        return Err(Error::domain(format!("bw_upper requires phi > 0, got {phi}")));
    }
    if phi > limit + 1e-12 {
        return Err(Error::precondition(format!(
            "bw_upper requires phi <= arccos(1/sqrt(n+1)) = {limit}, got phi = {phi}"
        )));
    }
    Ok(phi.sin().powi(n as i32) / ((2.0 * PI * n as f64).sqrt() * phi.cos()))
}

/// The scaling estimate t^n * Omega_n(phi), an upper bound for
/// Omega_n(t*phi) when 1 < t < pi/(2 phi).
pub fn cap_scaling_bound(n: u64, phi: f64, t: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("sphere dimension n must be >= 1".to_string()));
    }
    if !(phi > 0.0 && phi < FRAC_PI_2) {
        return Err(Error::domain(format!("cap_scaling_bound requires phi in (0, pi/2), got {phi}")));
    }
    if !(t > 1.0 && t < PI / (2.0 * phi)) {
        return Err(Error::domain(format!(
            "cap_scaling_bound requires 1 < t < pi/(2 phi) = {}, got t = {t}",
            PI / (2.0 * phi)
        )));
    }
    Ok(t.powi(n as i32) * cap_measure((n + 1) as usize, phi)?)
}

/// Identity-route cap measure: (1/2) I_{sin^2 phi}((d-1)/2, 1/2) for
/// phi <= pi/2, reflected above. Independent of the quadrature path; used
/// by tests and cross-checks.
pub fn cap_measure_beta_identity(d: usize, phi: f64) -> Result<f64> {
    check_cap_domain(d, phi)?;
    if phi > FRAC_PI_2 {
        return Ok(1.0 - cap_measure_beta_identity(d, PI - phi)?);
    }
    let s = phi.sin();
    Ok(0.5 * beta::betainc((d as f64 - 1.0) / 2.0, 0.5, s * s)?)
}
