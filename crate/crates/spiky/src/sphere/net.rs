//! Greedy maximal separated sets as probabilistically certified delta-nets.
//!
//! A maximal delta-separated subset of the sphere is a delta-net (any point
//! farther than delta from every center could have been admitted). We build
//! by rejection sampling with a stopping rule, so maximality is only
//! probabilistic; every net therefore carries an explicit coverage report
//! instead of a silent coverage assumption.

use super::{sample_uniform_with, stream_block, SeedSpec, UnitVector};
use crate::error::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

pub const NET_SCHEMA: &str = "spiky.net/v1";

/// Probe budget for the coverage check that `build_delta_net` always runs.
pub const DEFAULT_VERIFY_PROBES: u64 = 100_000;

/// Outcome of probing a candidate net (or cap cover) for coverage.
///
/// `confidence` is the probability that probing would have caught a net whose
/// uncovered mass is at least `mass_threshold` (= 10/probes); it is NOT a
/// posterior probability that the net covers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverageReport {
    pub probes: u64,
    pub uncovered: u64,
    /// Largest distance from a probe to its nearest center, over all probes.
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub worst_gap: f64,
    /// An uncovered probe, if any was found (the worst one).
    pub witness: Option<UnitVector>,
    pub pass: bool,
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub confidence: f64,
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub mass_threshold: f64,
}

impl CoverageReport {
    pub fn unverified() -> CoverageReport {
        CoverageReport {
            probes: 0,
            uncovered: 0,
            worst_gap: f64::NAN,
            witness: None,
            pass: false,
            confidence: 0.0,
            mass_threshold: 1.0,
        }
    }
}

/// A delta-separated direction set with coverage metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeltaNet {
    pub schema: String,
    pub dimension: usize,
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub delta: f64,
    pub centers: Vec<UnitVector>,
    pub seed: SeedSpec,
    pub separation_verified: bool,
    pub coverage: CoverageReport,
}

impl DeltaNet {
    /// Assemble a net from explicit centers, verifying pairwise separation.
    /// Coverage starts unverified; run [`verify_net_coverage`] to attach one.
    pub fn from_centers(dimension: usize, delta: f64, centers: Vec<UnitVector>) -> Result<DeltaNet> {
        check_delta(delta)?;
        if centers.is_empty() {
            return Err(Error::domain("a net needs at least one center".to_string()));
        }
        for c in &centers {
            if c.dim() != dimension {
                return Err(Error::DimensionMismatch { left: dimension, right: c.dim() });
            }
        }
        let mut net = DeltaNet {
            schema: NET_SCHEMA.to_string(),
            dimension,
            delta,
            centers,
            seed: SeedSpec::new(0, 0),
            separation_verified: false,
            coverage: CoverageReport::unverified(),
        };
        if !net.check_separation()? {
            return Err(Error::domain(format!(
                "centers are not pairwise separated by more than delta = {delta}"
            )));
        }
        net.separation_verified = true;
        Ok(net)
    }

    pub fn size(&self) -> usize {
        self.centers.len()
    }

    /// The covering-size benchmark n^2 / sin^n(delta), n = d - 1.
    pub fn rogers_bound(&self) -> f64 {
        rogers_bound(self.dimension, self.delta)
    }

    /// Exact pairwise separation check: every angle strictly exceeds delta.
    pub fn check_separation(&self) -> Result<bool> {
        for (i, a) in self.centers.iter().enumerate() {
            for b in &self.centers[i + 1..] {
                if a.angle_to(b)? <= self.delta {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

pub fn rogers_bound(dimension: usize, delta: f64) -> f64 {
    let n = (dimension - 1) as f64;
    n * n / delta.sin().powi(dimension as i32 - 1)
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < FRAC_PI_2) {
        return Err(Error::domain(format!("delta must be in (0, pi/2), got {delta}")));
    }
    Ok(())
}

const MAX_REPAIR_ROUNDS: u64 = 64;

/// Greedy maximal delta-separated net: sample uniform candidates, admit one
/// iff its angle to every current center exceeds delta, stop after
/// `max_consecutive_rejections` rejections in a row.
///
/// The rejection phase alone leaves an admissible sliver of mass roughly
/// 1/max_consecutive_rejections, so construction then alternates coverage
/// scans with repair: any uncovered probe is itself admissible and is added
/// as a center. The net is returned once a full fresh probe batch
/// ([`DEFAULT_VERIFY_PROBES`] probes) finds nothing uncovered; that batch
/// becomes the net's coverage report.
pub fn build_delta_net(
    d: usize,
    delta: f64,
    seed: SeedSpec,
    max_consecutive_rejections: u64,
) -> Result<DeltaNet> {
    if d < 2 {
        return Err(Error::domain(format!("sphere dimension must be >= 2, got {d}")));
    }
    check_delta(delta)?;
    if max_consecutive_rejections == 0 {
        return Err(Error::domain("max_consecutive_rejections must be >= 1".to_string()));
    }
    let size_cap = (10.0 * rogers_bound(d, delta)).ceil();
    let cos_delta = delta.cos();
    let over_cap = |len: usize| -> Result<()> {
        if len as f64 > size_cap {
            return Err(Error::ResourceLimit(format!(
                "net exceeded size cap {size_cap} (10x the n^2/sin^n(delta) benchmark)"
            )));
        }
        Ok(())
    };

    let mut rng = seed.derive(stream_block::NET_CANDIDATES, 0).rng();
    let mut centers: Vec<UnitVector> = Vec::new();
    let mut rejections = 0u64;
    while rejections < max_consecutive_rejections {
        let cand = sample_uniform_with(d, &mut rng);
        // angle > delta for all centers <=> dot < cos(delta)
        if centers.iter().all(|c| c.dot(&cand) < cos_delta) {
            centers.push(cand);
            rejections = 0;
            over_cap(centers.len())?;
        } else {
            rejections += 1;
        }
    }

    let mut coverage = None;
    for round in 0..MAX_REPAIR_ROUNDS {
        let verify_seed = seed.derive(stream_block::NET_VERIFY, round);
        let (report, uncovered) =
            coverage_scan(d, delta, &centers, DEFAULT_VERIFY_PROBES, verify_seed)?;
        if report.pass {
            coverage = Some(report);
            break;
        }
        for cand in uncovered {
            if centers.iter().all(|c| c.dot(&cand) < cos_delta) {
                centers.push(cand);
                over_cap(centers.len())?;
            }
        }
    }
    let coverage = coverage.ok_or_else(|| {
        Error::ResourceLimit(format!(
            "net coverage did not stabilize within {MAX_REPAIR_ROUNDS} repair rounds"
        ))
    })?;

    let mut net = DeltaNet {
        schema: NET_SCHEMA.to_string(),
        dimension: d,
        delta,
        centers,
        seed,
        separation_verified: false,
        coverage,
    };
    net.separation_verified = net.check_separation()?;
    debug_assert!(net.separation_verified);
    Ok(net)
}

/// Probe the sphere uniformly and report the probes not within `delta` of
/// any center. Zero uncovered probes passes; any uncovered probe fails with
/// the worst witness.
pub fn verify_net_coverage(net: &DeltaNet, probes: u64, seed: SeedSpec) -> Result<CoverageReport> {
    let (report, _) = coverage_scan(net.dimension, net.delta, &net.centers, probes, seed)?;
    Ok(report)
}

/// Shared probe scan. Returns the report plus every uncovered probe in
/// probe order (deterministic regardless of the parallel schedule).
fn coverage_scan(
    dimension: usize,
    delta: f64,
    centers: &[UnitVector],
    probes: u64,
    seed: SeedSpec,
) -> Result<(CoverageReport, Vec<UnitVector>)> {
    if probes == 0 {
        return Err(Error::domain("coverage verification needs probes >= 1".to_string()));
    }
    let cos_delta = delta.cos();
    let batch = super::sample_batch(dimension, probes as usize, seed)?;

    // per probe: (uncovered?, (gap, index)); worst = max gap, ties to lowest index
    let per_probe: Vec<(bool, f64)> = batch
        .par_iter()
        .map(|p| {
            let best_dot = centers
                .iter()
                .map(|c| c.dot(p))
                .fold(f64::NEG_INFINITY, f64::max);
            (best_dot < cos_delta, best_dot.clamp(-1.0, 1.0).acos())
        })
        .collect();

    let mut uncovered_list = Vec::new();
    let mut worst = (f64::NEG_INFINITY, usize::MAX);
    let mut uncovered = 0u64;
    for (i, &(is_uncovered, gap)) in per_probe.iter().enumerate() {
        if gap > worst.0 {
            worst = (gap, i);
        }
        if is_uncovered {
            uncovered += 1;
            uncovered_list.push(batch[i].clone());
        }
    }

    let mass_threshold = (10.0 / probes as f64).min(1.0);
    let report = CoverageReport {
        probes,
        uncovered,
        worst_gap: worst.0,
        witness: if uncovered > 0 { Some(batch[worst.1].clone()) } else { None },
        pass: uncovered == 0,
        confidence: 1.0 - (1.0 - mass_threshold).powf(probes as f64),
        mass_threshold,
    };
    Ok((report, uncovered_list))
}
