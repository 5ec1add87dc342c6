//! Convex-geometry oracles for spiky bodies: support function, membership
//! margin, directional illumination, and gauge.
//!
//! The margin of a point p is min over unit w of h_K(w) - <p, w>: positive
//! inside (the largest r with p + rB inside K), negative outside (minus the
//! distance to K). The minimization runs multistart projected subgradient
//! descent over the sphere. A negative result is an exact certificate (the
//! witness direction separates p from K in one support evaluation); a
//! positive result is only as good as the multistart coverage, which is why
//! certificates for illumination bounds come from the combinatorial route
//! in [`crate::body`], not from here.

use crate::error::{Error, Result};
use crate::sphere::{angle, sample_uniform_with, stream_block, SeedSpec, UnitVector};
use crate::body::SpikyBody;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Multistart and tolerance knobs for the sphere optimizer.
#[derive(Debug, Clone, Copy)]
pub struct OracleOpts {
    /// Number of descent starts (±spikes, ±point direction, random fill).
    pub restarts: usize,
    /// Size of the random evaluation sweep whose best point joins the starts.
    pub sweep: usize,
    /// |value| at or below this is numerically ambiguous.
    pub tolerance: f64,
    pub max_iters: usize,
}

impl Default for OracleOpts {
    fn default() -> Self {
        OracleOpts { restarts: 64, sweep: 10_000, tolerance: 1e-9, max_iters: 200 }
    }
}

impl OracleOpts {
    /// Cheaper preset for inner loops (line searches, large probe sweeps).
    pub fn fast() -> Self {
        OracleOpts { restarts: 16, sweep: 2_000, tolerance: 1e-9, max_iters: 120 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MarginStatus {
    /// value < -tolerance; the witness direction is an exact separation
    /// certificate, recheckable with one support evaluation.
    CertifiedNegative,
    /// value > tolerance; certified up to multistart completeness.
    CertifiedPositive,
    /// |value| <= tolerance (e.g. boundary points).
    NumericallyAmbiguous,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarginResult {
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub value: f64,
    pub minimizer_direction: UnitVector,
    pub restarts_used: usize,
    pub status: MarginStatus,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaugeResult {
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub value: f64,
    /// Direction attaining the maximum of <p, w> / h(w).
    pub witness_direction: UnitVector,
    pub restarts_used: usize,
}

/// Support function h_K(w) = max(max_i |<X_i, w>|, |w|/D); the ball term is
/// replaced by the finite max over ±core vertices for polytopal variants.
/// Accepts any finite w (positively homogeneous).
pub fn support(body: &SpikyBody, w: &[f64]) -> f64 {
    let spike_term = body
        .points
        .iter()
        .map(|x| crate::sphere::dot(x.coords(), w).abs())
        .fold(0.0_f64, f64::max);
    let ball_term = match &body.polytopal_core {
        None => crate::sphere::norm(w) * body.inner_radius(),
        Some(core) => {
            body.inner_radius()
                * core
                    .iter()
                    .map(|c| crate::sphere::dot(c.coords(), w).abs())
                    .fold(0.0_f64, f64::max)
        }
    };
    spike_term.max(ball_term)
}

/// Euclidean subgradient of h_K at a unit vector w (gradient of the active
/// piece; at ties an arbitrary active piece is selected).
fn support_subgradient(body: &SpikyBody, w: &[f64]) -> Vec<f64> {
    let mut best = f64::NEG_INFINITY;
    let mut grad: Option<Vec<f64>> = None;
    for x in &body.points {
        let d = crate::sphere::dot(x.coords(), w);
        if d.abs() > best {
            best = d.abs();
            let s = if d >= 0.0 { 1.0 } else { -1.0 };
            grad = Some(x.coords().iter().map(|c| s * c).collect());
        }
    }
    let r = body.inner_radius();
    match &body.polytopal_core {
        None => {
            let nrm = crate::sphere::norm(w);
            let ball = nrm * r;
            if ball > best || grad.is_none() {
                return w.iter().map(|c| r * c / nrm).collect();
            }
        }
        Some(core) => {
            for c in core {
                let d = crate::sphere::dot(c.coords(), w);
                if d.abs() * r > best {
                    best = d.abs() * r;
                    let s = if d >= 0.0 { r } else { -r };
                    grad = Some(c.coords().iter().map(|cc| s * cc).collect());
                }
            }
        }
    }
    grad.expect("support always has an active piece")
}

fn check_point(body: &SpikyBody, p: &[f64]) -> Result<()> {
    if p.len() != body.dimension {
        return Err(Error::DimensionMismatch { left: body.dimension, right: p.len() });
    }
    if p.iter().any(|c| !c.is_finite()) {
        return Err(Error::domain("point coordinates must be finite".to_string()));
    }
    Ok(())
}

fn fnv_bits(xs: &[f64]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325_u64;
    for x in xs {
        for byte in x.to_bits().to_le_bytes() {
            h = (h ^ u64::from(byte)).wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

/// Deterministic multistart minimization of `f` over the unit sphere.
/// `f` returns (value, euclidean subgradient). Returns (value, minimizer,
/// starts used); ties between starts resolve to the lowest start index.
fn sphere_minimize<F>(
    body: &SpikyBody,
    point: &[f64],
    purpose: u64,
    f: F,
    opts: &OracleOpts,
) -> (f64, UnitVector)
where
    F: Fn(&[f64]) -> (f64, Vec<f64>) + Sync,
{
    let d = body.dimension;
    let seed = SeedSpec::new(body.content_hash(), fnv_bits(point))
        .derive(stream_block::ORACLE_STARTS, purpose);

    let mut starts: Vec<UnitVector> = Vec::with_capacity(opts.restarts + 1);
    for x in &body.points {
        if starts.len() + 2 > opts.restarts.saturating_sub(2) {
            break;
        }
        starts.push(x.clone());
        starts.push(x.negated());
    }
    if let Ok(pdir) = UnitVector::normalized(point.to_vec()) {
        starts.push(pdir.negated());
        starts.push(pdir);
    }
    let mut rng = seed.rng();
    while starts.len() < opts.restarts {
        starts.push(sample_uniform_with(d, &mut rng));
    }
    // random sweep: best evaluated point joins the start set
    if opts.sweep > 0 {
        let mut sweep_rng = seed.derive(stream_block::PROBE_SWEEP, purpose).rng();
        let mut best = f64::INFINITY;
        let mut best_w: Option<UnitVector> = None;
        for _ in 0..opts.sweep {
            let w = sample_uniform_with(d, &mut sweep_rng);
            let (v, _) = f(w.coords());
            if v < best {
                best = v;
                best_w = Some(w);
            }
        }
        if let Some(w) = best_w {
            starts.push(w);
        }
    }

    let results: Vec<(f64, UnitVector)> = starts
        .par_iter()
        .map(|start| descend(start, &f, opts))
        .collect();
    let mut best_idx = 0;
    for (i, r) in results.iter().enumerate() {
        if r.0 < results[best_idx].0 {
            best_idx = i;
        }
    }
    results[best_idx].clone()
}

/// Projected subgradient descent with backtracking; coordinate-rotation
/// probes guard stalls at nonsmooth points.
fn descend<F>(start: &UnitVector, f: &F, opts: &OracleOpts) -> (f64, UnitVector)
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let d = start.dim();
    let mut w = start.clone();
    let (mut value, mut grad) = f(w.coords());
    for _ in 0..opts.max_iters {
        // tangent projection
        let radial = crate::sphere::dot(&grad, w.coords());
        let tangent: Vec<f64> = grad
            .iter()
            .zip(w.coords())
            .map(|(g, c)| g - radial * c)
            .collect();
        let tnorm = crate::sphere::norm(&tangent);
        if tnorm < 1e-14 {
            break;
        }
        let mut eta = 0.5 / tnorm.max(1.0);
        let mut moved = false;
        while eta > 1e-12 {
            let cand: Vec<f64> = w
                .coords()
                .iter()
                .zip(&tangent)
                .map(|(c, t)| c - eta * t)
                .collect();
            if let Ok(cand) = UnitVector::normalized(cand) {
                let (cv, cg) = f(cand.coords());
                if cv < value {
                    w = cand;
                    value = cv;
                    grad = cg;
                    moved = true;
                    break;
                }
            }
            eta *= 0.5;
        }
        if !moved {
            // nonsmooth stall: probe coordinate rotations at two scales
            let mut improved = false;
            'probe: for scale in [1e-4, 1e-7] {
                for j in 0..d {
                    for sign in [1.0, -1.0] {
                        let mut cand = w.coords().to_vec();
                        cand[j] += sign * scale;
                        if let Ok(cand) = UnitVector::normalized(cand) {
                            let (cv, cg) = f(cand.coords());
                            if cv < value {
                                w = cand;
                                value = cv;
                                grad = cg;
                                improved = true;
                                break 'probe;
                            }
                        }
                    }
                }
            }
            if !improved {
                break;
            }
        }
    }
    (value, w)
}

/// Membership margin of a point: min over unit w of h_K(w) - <p, w>.
pub fn membership_margin(body: &SpikyBody, point: &[f64], opts: &OracleOpts) -> Result<MarginResult> {
    check_point(body, point)?;
    let f = |w: &[f64]| {
        let h = support(body, w);
        let v = h - crate::sphere::dot(point, w);
        let grad: Vec<f64> = support_subgradient(body, w)
            .iter()
            .zip(point)
            .map(|(g, p)| g - p)
            .collect();
        (v, grad)
    };
    let (value, minimizer) = sphere_minimize(body, point, 1, f, opts);
    let status = if value < -opts.tolerance {
        MarginStatus::CertifiedNegative
    } else if value > opts.tolerance {
        MarginStatus::CertifiedPositive
    } else {
        MarginStatus::NumericallyAmbiguous
    };
    Ok(MarginResult {
        value,
        minimizer_direction: minimizer,
        restarts_used: opts.restarts,
        status,
    })
}

/// Gauge (Minkowski functional) of a point: max over unit w of
/// <p, w> / h_K(w); 0 at the origin, 1 on the boundary, homogeneous.
pub fn gauge(body: &SpikyBody, point: &[f64], opts: &OracleOpts) -> Result<GaugeResult> {
    check_point(body, point)?;
    if crate::sphere::norm(point) == 0.0 {
        return Ok(GaugeResult {
            value: 0.0,
            witness_direction: UnitVector::standard_basis(body.dimension, 0),
            restarts_used: 0,
        });
    }
    // minimize -r(w), r = <p,w>/h(w); grad r = (p*h - <p,w>*grad_h)/h^2
    let f = |w: &[f64]| {
        let h = support(body, w);
        let pw = crate::sphere::dot(point, w);
        let gh = support_subgradient(body, w);
        let grad: Vec<f64> = point
            .iter()
            .zip(&gh)
            .map(|(p, g)| -((p * h - pw * g) / (h * h)))
            .collect();
        (-(pw / h), grad)
    };
    let (neg_value, maximizer) = sphere_minimize(body, point, 2, f, opts);
    Ok(GaugeResult {
        value: (-neg_value).max(0.0),
        witness_direction: maximizer,
        restarts_used: opts.restarts,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IlluminationProbe {
    pub illuminated: bool,
    pub status: MarginStatus,
    /// Ray parameter attaining the best margin found in (0, 2].
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub best_lambda: f64,
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub best_margin: f64,
}

/// Does direction `u` illuminate the body at boundary point `b`? True iff
/// some point of the open ray {b + lambda*u : lambda > 0} has positive
/// membership margin. The margin along the ray is concave, so a coarse grid
/// plus golden-section refinement over lambda in (0, 2] suffices (K sits
/// inside the unit ball, so the ray is outside for lambda > 2).
pub fn illuminates_point(
    body: &SpikyBody,
    b: &[f64],
    u: &UnitVector,
    opts: &OracleOpts,
) -> Result<IlluminationProbe> {
    check_point(body, b)?;
    if u.dim() != body.dimension {
        return Err(Error::DimensionMismatch { left: body.dimension, right: u.dim() });
    }
    let margin_at = |lambda: f64| -> Result<f64> {
        let q: Vec<f64> = b.iter().zip(u.coords()).map(|(bc, uc)| bc + lambda * uc).collect();
        Ok(membership_margin(body, &q, opts)?.value)
    };

    const GRID: usize = 32;
    let mut best_lambda = 0.0;
    let mut best_margin = f64::NEG_INFINITY;
    let mut best_k = 0usize;
    for k in 1..=GRID {
        let lambda = 2.0 * k as f64 / GRID as f64;
        let m = margin_at(lambda)?;
        if m > best_margin {
            best_margin = m;
            best_lambda = lambda;
            best_k = k;
        }
        if m > 100.0 * opts.tolerance {
            // clearly interior; no need to finish the scan
            return Ok(IlluminationProbe {
                illuminated: true,
                status: MarginStatus::CertifiedPositive,
                best_lambda: lambda,
                best_margin: m,
            });
        }
    }
    // golden-section refinement on the bracket around the best grid point
    let step = 2.0 / GRID as f64;
    let mut lo = (best_k as f64 - 1.0) * step;
    let mut hi = ((best_k + 1).min(GRID)) as f64 * step;
    lo = lo.max(step * 1e-3);
    let phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = margin_at(x1)?;
    let mut f2 = margin_at(x2)?;
    for _ in 0..40 {
        if hi - lo < 1e-10 {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = margin_at(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = margin_at(x1)?;
        }
        let (x, fv) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
        if fv > best_margin {
            best_margin = fv;
            best_lambda = x;
        }
        if best_margin > 100.0 * opts.tolerance {
            break;
        }
    }
    let status = if best_margin > opts.tolerance {
        MarginStatus::CertifiedPositive
    } else if best_margin < -opts.tolerance {
        MarginStatus::CertifiedNegative
    } else {
        MarginStatus::NumericallyAmbiguous
    };
    Ok(IlluminationProbe {
        illuminated: best_margin > opts.tolerance,
        status,
        best_lambda,
        best_margin,
    })
}

/// Does direction `u` illuminate the body at spike X_i?
pub fn illuminates(
    body: &SpikyBody,
    spike: usize,
    u: &UnitVector,
    opts: &OracleOpts,
) -> Result<IlluminationProbe> {
    let b = body
        .points
        .get(spike)
        .ok_or_else(|| Error::domain(format!("spike index {spike} out of range")))?;
    illuminates_point(body, &b.coords().to_vec(), u, opts)
}

/// The predicted illuminating set at spike X_i: the open cap of radius
/// alpha = arcsin(1/D) centered at -X_i. Directions at angle exactly alpha
/// (within 1e-12) are classified non-illuminating (the set is open).
pub fn cap_predicate(body: &SpikyBody, spike: usize, u: &UnitVector) -> Result<bool> {
    let x = body
        .points
        .get(spike)
        .ok_or_else(|| Error::domain(format!("spike index {spike} out of range")))?;
    let a = angle(u, &x.negated())?;
    Ok(a < body.alpha() - 1e-12)
}
