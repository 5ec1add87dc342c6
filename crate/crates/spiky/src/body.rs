//! The random spiky body K = conv({±X_i} ∪ (1/D)·B), its bad-event checks,
//! and illumination lower-bound certificates.
//!
//! Events:
//! - E1: some pair of spikes is angularly too close — formally, there are
//!   i != j with angle(X_i, X_j) < pi - 2*alpha or angle(-X_i, X_j) <
//!   pi - 2*alpha, where alpha = arcsin(1/D). When E1 does not occur, the
//!   directions illuminating K at X_i form exactly the open cap of radius
//!   alpha around -X_i.
//! - E2': some net direction v sees more than T = N*theta*p signed spikes
//!   within angle alpha + delta, where p = 2 * cap_measure(d, alpha+delta).
//!
//! If neither occurs (and the net covers), every direction illuminates at
//! most T spikes, so at least 2N/T = 2/(theta*p) directions are needed.

use crate::cap;
use crate::error::{Error, Result};
use crate::sphere::net::{build_delta_net, DeltaNet};
use crate::sphere::{angle, sample_uniform_with, stream_block, SeedSpec, UnitVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

pub const BODY_SCHEMA: &str = "spiky.body/v1";
pub const CERTIFICATE_SCHEMA: &str = "spiky.certificate/v1";

/// Comparison tolerance for event ties; ties count as event-occurred.
pub const EVENT_TIE_TOL: f64 = 1e-12;

/// An origin-symmetric convex body: unit spikes glued to a concentric ball
/// of radius 1/D. The point list stores X_i only; all consumers use ±X_i.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpikyBody {
    pub schema: String,
    pub dimension: usize,
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub big_d: f64,
    pub points: Vec<UnitVector>,
    /// For the polytopal variant: unit directions of the finite vertex set
    /// replacing the inner ball (vertices sit at radius 1/D, used as ±).
    pub polytopal_core: Option<Vec<UnitVector>>,
    pub seed: Option<SeedSpec>,
}

impl SpikyBody {
    /// Sample N spikes independently and uniformly on S^{d-1}.
    pub fn construct(d: usize, n_spikes: usize, big_d: f64, seed: SeedSpec) -> Result<SpikyBody> {
        if d < 2 {
            return Err(Error::domain(format!("dimension must be >= 2, got {d}")));
        }
        if n_spikes == 0 {
            return Err(Error::domain("need at least one spike; for the pure ball use unit_ball".to_string()));
        }
        check_big_d(big_d)?;
        let mut rng = seed.derive(stream_block::BODY_POINTS, 0).rng();
        let points = (0..n_spikes).map(|_| sample_uniform_with(d, &mut rng)).collect();
        Ok(SpikyBody {
            schema: BODY_SCHEMA.to_string(),
            dimension: d,
            big_d,
            points,
            polytopal_core: None,
            seed: Some(seed),
        })
    }

    /// Assemble a body from explicit unit spikes (for handcrafted and
    /// adversarial inputs).
    pub fn from_unit_points(d: usize, points: Vec<UnitVector>, big_d: f64) -> Result<SpikyBody> {
        check_big_d(big_d)?;
        for p in &points {
            if p.dim() != d {
                return Err(Error::DimensionMismatch { left: d, right: p.dim() });
            }
        }
        Ok(SpikyBody {
            schema: BODY_SCHEMA.to_string(),
            dimension: d,
            big_d,
            points,
            polytopal_core: None,
            seed: None,
        })
    }

    /// The unit ball as the degenerate no-spike, D = 1 case.
    pub fn unit_ball(d: usize) -> SpikyBody {
        SpikyBody {
            schema: BODY_SCHEMA.to_string(),
            dimension: d,
            big_d: 1.0,
            points: Vec::new(),
            polytopal_core: None,
            seed: None,
        }
    }

    pub fn n_spikes(&self) -> usize {
        self.points.len()
    }

    /// alpha = arcsin(1/D), the cap radius of the illuminating set at a spike.
    pub fn alpha(&self) -> f64 {
        (1.0 / self.big_d).asin()
    }

    pub fn inner_radius(&self) -> f64 {
        1.0 / self.big_d
    }

    /// Iterate the signed spikes +X_i, -X_i (index order, + before -).
    pub fn signed_spikes(&self) -> impl Iterator<Item = UnitVector> + '_ {
        self.points
            .iter()
            .flat_map(|p| [p.clone(), p.negated()])
    }

    /// FNV-1a hash of the geometric content; keys derived randomness in the
    /// oracle and identifies the body inside certificates.
    pub fn content_hash(&self) -> u64 {
        let mut h = 0xcbf2_9ce4_8422_2325_u64;
        let mut eat = |word: u64| {
            for byte in word.to_le_bytes() {
                h = (h ^ u64::from(byte)).wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        eat(self.dimension as u64);
        eat(self.big_d.to_bits());
        for p in &self.points {
            for c in p.coords() {
                eat(c.to_bits());
            }
        }
        if let Some(core) = &self.polytopal_core {
            for p in core {
                for c in p.coords() {
                    eat(c.to_bits());
                }
            }
        }
        h
    }
}

fn check_big_d(big_d: f64) -> Result<()> {
    if !(big_d > 1.0 && big_d.is_finite()) {
        return Err(Error::domain(format!("D must be finite and > 1, got {big_d}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventId {
    E1,
    E2Prime,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum EventWitness {
    /// A spike pair violating the E1 separation; `angle` is
    /// min(angle(X_i, X_j), pi - angle(X_i, X_j)), the offending clause.
    ClosePair {
        i: usize,
        j: usize,
        #[serde(with = "crate::hexfloat::serde_f64")]
        angle: f64,
    },
    /// A net center whose (alpha + delta)-cap holds more than T signed spikes.
    CrowdedCap { center: usize, count: usize },
}

/// The multiplicity maximum over net centers (reported even when E2' does
/// not occur).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CapCount {
    pub center: usize,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EventReport {
    pub event: EventId,
    pub occurred: bool,
    /// pi - 2*alpha (an angle) for E1; T = N*theta*p (a count) for E2'.
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub threshold: f64,
    pub witnesses: Vec<EventWitness>,
    pub max_count: Option<CapCount>,
}

/// E1: is some pair of spikes too close (in the ±-identified sense)?
///
/// Occurs iff |<X_i, X_j>| > cos(pi - 2*alpha) for some i != j; comparisons
/// carry a 1e-12 tie band counted toward occurrence. Requires D < sqrt(2)
/// so that pi - 2*alpha lies in (0, pi/2).
pub fn check_e1(body: &SpikyBody) -> Result<EventReport> {
    let alpha = body.alpha();
    let threshold = PI - 2.0 * alpha;
    if !(threshold > 0.0 && threshold < FRAC_PI_2) {
        return Err(Error::precondition(format!(
            "E1 needs pi - 2*alpha in (0, pi/2), i.e. 1 < D < sqrt(2); D = {} gives {threshold}",
            body.big_d
        )));
    }
    let cos_threshold = threshold.cos();
    let points = &body.points;
    let mut witnesses: Vec<EventWitness> = (0..points.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let pi_ref = &points[i];
            points[i + 1..].iter().enumerate().filter_map(move |(off, pj)| {
                let j = i + 1 + off;
                let d = pi_ref.dot(pj);
                if d.abs() >= cos_threshold - EVENT_TIE_TOL {
                    let a = angle(pi_ref, pj).expect("dims equal by construction");
                    Some(EventWitness::ClosePair { i, j, angle: a.min(PI - a) })
                } else {
                    None
                }
            })
        })
        .collect();
    witnesses.sort_by_key(|w| match w {
        EventWitness::ClosePair { i, j, .. } => (*i, *j),
        EventWitness::CrowdedCap { .. } => unreachable!(),
    });
    Ok(EventReport {
        event: EventId::E1,
        occurred: !witnesses.is_empty(),
        threshold,
        witnesses,
        max_count: None,
    })
}

/// E2': does some net direction see more than T = N*theta*p signed spikes
/// within angle alpha + delta?
pub fn check_e2_prime(body: &SpikyBody, net: &DeltaNet, theta: f64) -> Result<EventReport> {
    if body.dimension != net.dimension {
        return Err(Error::DimensionMismatch { left: body.dimension, right: net.dimension });
    }
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::domain(format!("theta must be positive, got {theta}")));
    }
    let radius = body.alpha() + net.delta;
    let p = 2.0 * cap::cap_measure(body.dimension, radius)?;
    let t = body.n_spikes() as f64 * theta * p;

    let counts = cap_multiplicities(body, &net.centers, radius)?;
    let mut witnesses = Vec::new();
    let mut max_count = CapCount { center: 0, count: 0 };
    for (center, &count) in counts.iter().enumerate() {
        if count as f64 > t - EVENT_TIE_TOL {
            witnesses.push(EventWitness::CrowdedCap { center, count });
        }
        if count > max_count.count {
            max_count = CapCount { center, count };
        }
    }
    Ok(EventReport {
        event: EventId::E2Prime,
        occurred: !witnesses.is_empty(),
        threshold: t,
        witnesses,
        max_count: Some(max_count),
    })
}

/// Count, for each probe direction, the signed spikes ±X_i within the given
/// angular radius (inclusive, with the 1e-12 tie band counting inward).
pub fn multiplicity_profile(
    body: &SpikyBody,
    directions: &[UnitVector],
    radius: f64,
) -> Result<Vec<usize>> {
    cap_multiplicities(body, directions, radius)
}

fn cap_multiplicities(
    body: &SpikyBody,
    directions: &[UnitVector],
    radius: f64,
) -> Result<Vec<usize>> {
    for v in directions {
        if v.dim() != body.dimension {
            return Err(Error::DimensionMismatch { left: body.dimension, right: v.dim() });
        }
    }
    if !(radius > 0.0 && radius < PI) {
        return Err(Error::domain(format!("cap radius must be in (0, pi), got {radius}")));
    }
    Ok(directions
        .par_iter()
        .map(|v| {
            body.points
                .iter()
                .map(|x| {
                    let a = angle(v, x).expect("dims checked");
                    usize::from(a <= radius + EVENT_TIE_TOL) + usize::from(PI - a <= radius + EVENT_TIE_TOL)
                })
                .sum()
        })
        .collect())
}

/// An illumination lower-bound certificate: the outcome of the E1/E2'
/// checks over a coverage-verified net, carrying 2/(theta*p) iff both are
/// clean. The bound is conditional on the net truly covering, so the net's
/// probe-based coverage confidence travels with it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub schema: String,
    pub dimension: usize,
    pub n_spikes: usize,
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub big_d: f64,
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub alpha: f64,
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub delta: f64,
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub theta: f64,
    /// p = 2 * cap_measure(d, alpha + delta).
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub p: f64,
    /// T = N * theta * p, stored unrounded.
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub t: f64,
    pub e1: EventReport,
    pub e2_prime: EventReport,
    #[serde(with = "crate::hexfloat::serde_opt_f64")]
    pub lower_bound: Option<f64>,
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub coverage_confidence: f64,
    /// True whenever the net's coverage is probe-certified rather than exact.
    pub probabilistically_certified: bool,
    pub warnings: Vec<String>,
    /// FNV-1a hash of the body content (see [`SpikyBody::content_hash`]).
    pub body_hash: u64,
    pub net_size: usize,
}

/// Run both event checks and emit the lower bound 2/(theta*p) iff neither
/// event occurred. The net must have a passing coverage report.
pub fn certify(body: &SpikyBody, net: &DeltaNet, theta: f64) -> Result<Certificate> {
    if !net.coverage.pass {
        return Err(Error::precondition(
            "certify requires a net with a passing coverage verification".to_string(),
        ));
    }
    let e1 = check_e1(body)?;
    let e2_prime = check_e2_prime(body, net, theta)?;
    let p = 2.0 * cap::cap_measure(body.dimension, body.alpha() + net.delta)?;
    let t = body.n_spikes() as f64 * theta * p;
    let mut warnings = Vec::new();
    if theta < 6.0 {
        warnings.push(format!(
            "theta = {theta} < 6: the Chernoff-type tail bound does not apply, \
             though the certificate implication itself is unaffected"
        ));
    }
    let clean = !e1.occurred && !e2_prime.occurred;
    Ok(Certificate {
        schema: CERTIFICATE_SCHEMA.to_string(),
        dimension: body.dimension,
        n_spikes: body.n_spikes(),
        big_d: body.big_d,
        alpha: body.alpha(),
        delta: net.delta,
        theta,
        p,
        t,
        e1,
        e2_prime,
        lower_bound: clean.then(|| 2.0 / (theta * p)),
        coverage_confidence: net.coverage.confidence,
        probabilistically_certified: true,
        warnings,
        body_hash: body.content_hash(),
        net_size: net.size(),
    })
}

/// Replace the inner ball by the ± of a core_density-net scaled to radius
/// 1/D. Support evaluations then use the finite max formula. The spikes,
/// and hence every event check and certificate, are unchanged.
pub fn polytopal_variant(body: &SpikyBody, core_density: f64) -> Result<SpikyBody> {
    if !(core_density > 0.0 && core_density < FRAC_PI_4) {
        return Err(Error::domain(format!(
            "core density must be in (0, pi/4), got {core_density}"
        )));
    }
    let seed = body
        .seed
        .unwrap_or(SeedSpec::new(0, 0))
        .derive(stream_block::POLYTOPAL_CORE, 0);
    let net = build_delta_net(body.dimension, core_density, seed, 100_000)?;
    let mut variant = body.clone();
    variant.polytopal_core = Some(net.centers);
    Ok(variant)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::net::verify_net_coverage;

    fn seed(k: u64) -> SeedSpec {
        SeedSpec::new(k, 0)
    }

    #[test]
    fn construct_is_deterministic_and_validated() {
        let a = SpikyBody::construct(4, 100, 1.05, seed(7)).unwrap();
        let b = SpikyBody::construct(4, 100, 1.05, seed(7)).unwrap();
        assert_eq!(a.content_hash(), b.content_hash());
        for (x, y) in a.points.iter().zip(&b.points) {
            assert_eq!(x.coords(), y.coords());
        }
        assert!(SpikyBody::construct(4, 0, 1.05, seed(0)).is_err());
        assert!(SpikyBody::construct(4, 1, 1.0, seed(0)).is_err());
        assert!(SpikyBody::construct(1, 1, 1.05, seed(0)).is_err());
    }

    #[test]
    fn e1_no_pairs_never_occurs() {
        let body = SpikyBody::construct(3, 1, 1.1, seed(3)).unwrap();
        let report = check_e1(&body).unwrap();
        assert!(!report.occurred);
        assert!(report.witnesses.is_empty());
    }

    #[test]
    fn e1_planar_threshold_cases() {
        // d=2, D=1.1: alpha = arcsin(1/1.1); place X2 just outside / inside
        // the pi - 2*alpha window around X1.
        let big_d = 1.1;
        let alpha = (1.0_f64 / big_d).asin();
        let threshold = PI - 2.0 * alpha;
        let e1v = UnitVector::standard_basis(2, 0);
        let at = |a: f64| UnitVector::normalized(vec![a.cos(), a.sin()]).unwrap();

        let clean = SpikyBody::from_unit_points(2, vec![e1v.clone(), at(threshold + 0.01)], big_d).unwrap();
        assert!(!check_e1(&clean).unwrap().occurred);

        let close = SpikyBody::from_unit_points(2, vec![e1v.clone(), at(threshold - 0.01)], big_d).unwrap();
        let report = check_e1(&close).unwrap();
        assert!(report.occurred);
        assert_eq!(report.witnesses.len(), 1);

        // antipodal duplicate: angle(-X1, X2) = 0 < threshold
        let anti = SpikyBody::from_unit_points(2, vec![e1v.clone(), e1v.negated()], big_d).unwrap();
        assert!(check_e1(&anti).unwrap().occurred);
    }

    #[test]
    fn e1_rejects_large_d() {
        let body = SpikyBody::from_unit_points(
            2,
            vec![UnitVector::standard_basis(2, 0)],
            1.5,
        )
        .unwrap();
        assert!(matches!(check_e1(&body), Err(Error::Precondition(_))));
    }

    #[test]
    fn e1_symmetry_under_negation_and_permutation() {
        let body = SpikyBody::construct(3, 8, 1.05, seed(11)).unwrap();
        let base = check_e1(&body).unwrap().occurred;
        // negate one spike
        let mut negated = body.points.clone();
        negated[3] = negated[3].negated();
        let body2 = SpikyBody::from_unit_points(3, negated, 1.05).unwrap();
        assert_eq!(check_e1(&body2).unwrap().occurred, base);
        // permute
        let mut permuted = body.points.clone();
        permuted.reverse();
        let body3 = SpikyBody::from_unit_points(3, permuted, 1.05).unwrap();
        assert_eq!(check_e1(&body3).unwrap().occurred, base);
    }

    #[test]
    fn e2_small_body_cannot_exceed_two() {
        // N=1: max multiplicity is 2, so T >= 2 can never be exceeded
        let body = SpikyBody::construct(3, 1, 1.1, seed(5)).unwrap();
        let net = build_delta_net(3, body.alpha() / 2.0, seed(6), 50_000).unwrap();
        // choose theta so that T = 1*theta*p >= 2
        let p = 2.0 * cap::cap_measure(3, body.alpha() + net.delta).unwrap();
        let theta = 2.5 / p;
        let report = check_e2_prime(&body, &net, theta).unwrap();
        assert!(!report.occurred);
        let mc = report.max_count.unwrap();
        assert!(mc.count <= 2);
    }

    #[test]
    fn e2_adversarial_identical_spikes() {
        // all spikes equal: the nearest net center sees all N of them
        let x = UnitVector::normalized(vec![0.2, -0.9, 0.4]).unwrap();
        let body = SpikyBody::from_unit_points(3, vec![x; 40], 1.1).unwrap();
        let net = build_delta_net(3, 0.4, seed(9), 50_000).unwrap();
        let report = check_e2_prime(&body, &net, 6.0).unwrap();
        // T = 40 * 6 * p; occurred iff some count > T; with all spikes equal
        // the max count is 40 (or 80 if radius >= pi - small)
        let mc = report.max_count.unwrap();
        assert!(mc.count >= 40);
        let p = 2.0 * cap::cap_measure(3, body.alpha() + net.delta).unwrap();
        assert_eq!(report.occurred, mc.count as f64 > 40.0 * 6.0 * p - EVENT_TIE_TOL);
    }

    #[test]
    fn multiplicity_profile_matches_e2_counts() {
        let body = SpikyBody::construct(4, 50, 1.1, seed(21)).unwrap();
        let net = build_delta_net(4, body.alpha() / 3.0, seed(22), 50_000).unwrap();
        let radius = body.alpha() + net.delta;
        let profile = multiplicity_profile(&body, &net.centers, radius).unwrap();
        // independent recount with a fresh angle pass
        for (v, &count) in net.centers.iter().zip(&profile) {
            let mut manual = 0;
            for s in body.signed_spikes() {
                if angle(v, &s).unwrap() <= radius + EVENT_TIE_TOL {
                    manual += 1;
                }
            }
            assert_eq!(manual, count);
        }
    }

    #[test]
    fn multiplicity_profile_edges() {
        let ball = SpikyBody::unit_ball(3);
        let dirs = vec![UnitVector::standard_basis(3, 0)];
        assert_eq!(multiplicity_profile(&ball, &dirs, 0.5).unwrap(), vec![0]);

        let x = UnitVector::standard_basis(3, 2);
        let body = SpikyBody::from_unit_points(3, vec![x.clone()], 1.2).unwrap();
        assert_eq!(multiplicity_profile(&body, &[x.clone()], 0.3).unwrap(), vec![1]);
        // probe slightly off the spike: a nearly-full cap catches -X1 too
        let probe = x.rotate_toward(&x.any_tangent(), 1e-3).unwrap();
        assert_eq!(multiplicity_profile(&body, &[probe], PI - 1e-4).unwrap(), vec![2]);
    }

    #[test]
    fn certificate_emits_bound_iff_clean() {
        // handcrafted clean d=2 body: spikes at angles 0 and pi/2, D = 1.3
        let big_d = 1.3;
        let pts = vec![UnitVector::standard_basis(2, 0), UnitVector::standard_basis(2, 1)];
        let body = SpikyBody::from_unit_points(2, pts, big_d).unwrap();
        let net = build_delta_net(2, 0.05, seed(30), 50_000).unwrap();
        let theta = 6.0;
        let cert = certify(&body, &net, theta).unwrap();
        assert!(!cert.e1.occurred && !cert.e2_prime.occurred);
        let p = 2.0 * cap::cap_measure(2, body.alpha() + net.delta).unwrap();
        let bound = cert.lower_bound.expect("clean body must get a bound");
        assert!((bound - 2.0 / (theta * p)).abs() <= 1e-12 * bound);
        // 2N/T reproduces the bound
        let recomputed = 2.0 * cert.n_spikes as f64 / cert.t;
        assert!((recomputed - bound).abs() <= 1e-12 * bound);

        // a body failing E1 gets witnesses and no bound
        let anti = SpikyBody::from_unit_points(
            2,
            vec![UnitVector::standard_basis(2, 0), UnitVector::standard_basis(2, 0).negated()],
            big_d,
        )
        .unwrap();
        let cert2 = certify(&anti, &net, theta).unwrap();
        assert!(cert2.e1.occurred);
        assert!(cert2.lower_bound.is_none());
        assert!(!cert2.e1.witnesses.is_empty());
    }

    #[test]
    fn certify_requires_verified_net() {
        let body = SpikyBody::construct(3, 2, 1.2, seed(31)).unwrap();
        let mut net = build_delta_net(3, 0.4, seed(32), 50_000).unwrap();
        net.coverage.pass = false;
        assert!(matches!(certify(&body, &net, 6.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn theta_below_six_warns_but_checks() {
        let body = SpikyBody::construct(3, 2, 1.2, seed(33)).unwrap();
        let net = build_delta_net(3, 0.4, seed(34), 50_000).unwrap();
        let cert = certify(&body, &net, 3.0).unwrap();
        assert!(!cert.warnings.is_empty());
    }

    #[test]
    fn polytopal_variant_keeps_events_and_bounds_core_size() {
        let body = SpikyBody::construct(2, 2, 1.2, seed(40)).unwrap();
        let variant = polytopal_variant(&body, PI / 6.0).unwrap();
        let core = variant.polytopal_core.as_ref().unwrap();
        assert!(core.len() <= 12, "core of {} points", core.len());
        // E1 depends only on the spikes
        if let (Ok(a), Ok(b)) = (check_e1(&body), check_e1(&variant)) {
            assert_eq!(a.occurred, b.occurred);
        }
        assert!(polytopal_variant(&body, FRAC_PI_4).is_err());
    }

    #[test]
    fn e1_monotone_in_big_d() {
        // raising D shrinks alpha and widens the bad window: occurrences can
        // appear but never vanish
        let pts = SpikyBody::construct(3, 6, 1.05, seed(50)).unwrap().points;
        let mut occurred_at_lower_d = false;
        for big_d in [1.01, 1.05, 1.1, 1.2, 1.3, 1.4] {
            let body = SpikyBody::from_unit_points(3, pts.clone(), big_d).unwrap();
            let occ = check_e1(&body).unwrap().occurred;
            assert!(occ || !occurred_at_lower_d, "E1 flipped back off at D={big_d}");
            occurred_at_lower_d = occ;
        }
    }

    #[test]
    fn body_json_round_trip() {
        let body = SpikyBody::construct(3, 5, 1.1, seed(60)).unwrap();
        let json = serde_json::to_string(&body).unwrap();
        let back: SpikyBody = serde_json::from_str(&json).unwrap();
        assert_eq!(body.content_hash(), back.content_hash());
        assert_eq!(back.schema, BODY_SCHEMA);
    }

    #[test]
    fn net_coverage_survives_reverification() {
        let net = build_delta_net(3, 0.5, seed(70), 50_000).unwrap();
        let again = verify_net_coverage(&net, 20_000, seed(71)).unwrap();
        assert!(again.pass);
    }
}
