//! Seeded parallel Monte Carlo campaigns with analytic-bound comparisons.
//!
//! Every trial is a pure function of (master_seed, stream_id); workers only
//! change scheduling, never results, so reports are bit-identical across
//! worker counts. Trials are isolated: a panicking trial records an error
//! outcome and the campaign continues.

use super::config::{ExperimentConfig, ExperimentKind};
use crate::body::{check_e1, check_e2_prime, certify, SpikyBody};
use crate::bounds::{feasibility_scan, greedy_cap_cover};
use crate::cap::{binomial_tail_exact, cap_measure, chernoff_bound};
use crate::error::{Error, Result};
use crate::oracle::{cap_predicate, illuminates, OracleOpts};
use crate::sphere::net::{build_delta_net, DeltaNet};
use crate::sphere::{SeedSpec, RNG_ALGORITHM};
use rand::Rng;
use rand_distr::Distribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

pub const REPORT_SCHEMA: &str = "spiky.report/v1";

/// Trials at or below this count are embedded verbatim in the report.
const TRIAL_EMBED_LIMIT: u64 = 4096;

/// One trial's outcome; reproducible from (config, stream_id) alone.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TrialRecord {
    pub stream_id: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub e1_occurred: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub e2_occurred: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max_multiplicity: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub chernoff_exceeded: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub factcap_checked: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub factcap_mismatches: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub certificate: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    /// Diagnostics only; excluded from serialized reports so that re-runs
    /// are bit-identical.
    #[serde(skip)]
    pub wall_time_us: u64,
}

/// A bound-versus-empirical comparison. Every row carries the analytic
/// bound, the empirical value, a Wilson 95% CI, and a pass flag.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundRow {
    pub claim: String,
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub analytic_bound: f64,
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub empirical: f64,
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub sigma: f64,
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub ci_low: f64,
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub ci_high: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CampaignReport {
    pub schema: String,
    pub library_version: String,
    pub rng_algorithm: String,
    pub config: super::config::CanonicalConfig,
    pub config_hash: String,
    pub trials_run: u64,
    pub trial_errors: u64,
    pub counts: BTreeMap<String, u64>,
    pub rows: Vec<BoundRow>,
    /// Number of rows whose pass flag is false (drives the CLI exit code).
    pub violations: u64,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trial_records: Option<Vec<TrialRecord>>,
    /// Kind-specific payload (scan table, cover summary).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub payload: Option<serde_json::Value>,
}

/// Wilson score interval for a binomial proportion at z = 1.96.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.96_f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = (z / denom) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

fn rate_row(
    claim: impl Into<String>,
    bound: f64,
    successes: u64,
    trials: u64,
    equality: bool,
) -> BoundRow {
    let empirical = if trials == 0 { 0.0 } else { successes as f64 / trials as f64 };
    let sigma = if trials == 0 {
        0.0
    } else {
        (empirical * (1.0 - empirical) / trials as f64).sqrt()
    };
    let (ci_low, ci_high) = wilson_interval(successes, trials);
    let pass = if trials == 0 {
        true
    } else if equality {
        (empirical - bound).abs() <= 4.0 * sigma.max(bound_sigma_floor(bound, trials))
    } else {
        empirical <= bound + 4.0 * sigma
    };
    BoundRow {
        claim: claim.into(),
        analytic_bound: bound,
        empirical,
        sigma,
        ci_low,
        ci_high,
        pass,
    }
}

/// Sampling sigma floor for equality claims with zero observed variance:
/// use the binomial sigma implied by the analytic value itself.
fn bound_sigma_floor(bound: f64, trials: u64) -> f64 {
    let b = bound.clamp(0.0, 1.0);
    (b * (1.0 - b) / trials as f64).sqrt()
}

/// Execute the configured campaign. Deterministic for any worker count.
pub fn run_campaign(config: &ExperimentConfig) -> Result<CampaignReport> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    pool.install(|| run_in_pool(config))
}

fn run_in_pool(config: &ExperimentConfig) -> Result<CampaignReport> {
    let mut warnings = Vec::new();

    // single-shot kinds produce a payload instead of per-trial records
    match config.kind {
        ExperimentKind::Scan => {
            let (n_min, n_max) = config.n_range.expect("validated");
            let table = feasibility_scan(config.big_d, n_min, n_max)?;
            return Ok(finish(config, Vec::new(), Vec::new(), warnings, Some(serde_json::to_value(&table)?)));
        }
        ExperimentKind::CoverBench => {
            let radius = (1.0 / config.big_d).asin();
            let cover = greedy_cap_cover(
                config.dim,
                radius,
                SeedSpec::new(config.master_seed, u64::MAX - 1),
                config.probes,
            )?;
            let mut rows = Vec::new();
            if let Some(benchmark) = cover.formula_benchmark {
                rows.push(BoundRow {
                    claim: format!(
                        "greedy cover size <= (n ln n + n ln ln n + 5n)/Omega at d={}, radius=arcsin(1/{})",
                        config.dim, config.big_d
                    ),
                    analytic_bound: benchmark,
                    empirical: cover.size() as f64,
                    sigma: 0.0,
                    ci_low: cover.size() as f64,
                    ci_high: cover.size() as f64,
                    pass: (cover.size() as f64) <= benchmark,
                });
            }
            return Ok(finish(config, Vec::new(), rows, warnings, Some(serde_json::to_value(&cover)?)));
        }
        _ => {}
    }

    // shared fixtures for trial kinds
    let shared_net: Option<DeltaNet> = match config.kind {
        ExperimentKind::McE2 | ExperimentKind::EndToEnd => {
            let alpha = (1.0 / config.big_d).asin();
            let delta = config.delta.resolve(alpha, config.dim);
            Some(build_delta_net(
                config.dim,
                delta,
                SeedSpec::new(config.master_seed, u64::MAX),
                100_000,
            )?)
        }
        _ => None,
    };

    let records: Vec<TrialRecord> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let started = std::time::Instant::now();
            let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
                run_trial(config, shared_net.as_ref(), t)
            }));
            let mut record = match result {
                Ok(Ok(record)) => record,
                Ok(Err(err)) => TrialRecord {
                    stream_id: t,
                    error: Some(err.to_string()),
                    ..Default::default()
                },
                Err(panic) => {
                    let msg = panic
                        .downcast_ref::<&str>()
                        .map(|s| s.to_string())
                        .or_else(|| panic.downcast_ref::<String>().cloned())
                        .unwrap_or_else(|| "trial panicked".to_string());
                    TrialRecord {
                        stream_id: t,
                        error: Some(msg),
                        ..Default::default()
                    }
                }
            };
            record.wall_time_us = started.elapsed().as_micros() as u64;
            record
        })
        .collect();

    let mut rows = Vec::new();
    let trials = config.trials;
    match config.kind {
        ExperimentKind::McE1 => {
            let occurred = records.iter().filter(|r| r.e1_occurred == Some(true)).count() as u64;
            let alpha = (1.0 / config.big_d).asin();
            let omega = cap_measure(config.dim, PI - 2.0 * alpha)?;
            let union_bound = ((config.spikes * config.spikes) as f64 * omega).min(1.0);
            rows.push(rate_row(
                format!(
                    "P(E1) <= N^2 Omega(pi-2alpha) = {}^2 * {omega:.6e} (one-sided + 4 sigma)",
                    config.spikes
                ),
                union_bound,
                occurred,
                trials,
                false,
            ));
            if config.spikes == 2 {
                rows.push(rate_row(
                    "P(E1) = 2 Omega(pi-2alpha) exactly (single pair; two-sided 4 sigma)",
                    (2.0 * omega).min(1.0),
                    occurred,
                    trials,
                    true,
                ));
            }
        }
        ExperimentKind::McE2 => {
            let net = shared_net.as_ref().expect("built above");
            let occurred = records.iter().filter(|r| r.e2_occurred == Some(true)).count() as u64;
            let alpha = (1.0 / config.big_d).asin();
            let radius = alpha + net.delta;
            let p = 2.0 * cap_measure(config.dim, radius)?;
            let t_threshold = config.spikes as f64 * config.theta * p;
            if radius < FRAC_PI_2 && p < 1.0 {
                let tail = binomial_tail_exact(config.spikes as u64, p, t_threshold.min(config.spikes as f64))?;
                let bound = (net.size() as f64 * tail).min(1.0);
                rows.push(rate_row(
                    format!(
                        "P(E2') <= |net| * P(Binom({}, p) > N theta p), |net| = {}",
                        config.spikes,
                        net.size()
                    ),
                    bound,
                    occurred,
                    trials,
                    false,
                ));
                if config.theta >= 6.0 {
                    let n_sphere = (config.dim - 1) as f64;
                    let rogers = n_sphere * n_sphere / net.delta.sin().powi(config.dim as i32 - 1);
                    let chern = chernoff_bound(config.spikes as u64, p, config.theta)?;
                    rows.push(rate_row(
                        "P(E2') <= (n^2/sin^n delta) * 2^(-N theta p)",
                        (rogers * chern).min(1.0),
                        occurred,
                        trials,
                        false,
                    ));
                }
            } else {
                warnings.push(format!(
                    "alpha + delta = {radius} >= pi/2: the binomial model for cap \
                     multiplicities does not apply; bound rows omitted"
                ));
            }
        }
        ExperimentKind::McChernoff => {
            let p = config.prob.expect("validated");
            let exceeded = records
                .iter()
                .filter(|r| r.chernoff_exceeded == Some(true))
                .count() as u64;
            let threshold = config.spikes as f64 * config.theta * p;
            let exact = if threshold >= config.spikes as f64 {
                0.0
            } else {
                binomial_tail_exact(config.spikes as u64, p, threshold)?
            };
            rows.push(rate_row(
                format!("P(xi > N theta p) <= exact tail, N = {}, p = {p}", config.spikes),
                exact,
                exceeded,
                trials,
                false,
            ));
            if config.theta >= 6.0 {
                rows.push(rate_row(
                    "P(xi > N theta p) <= 2^(-N theta p)",
                    chernoff_bound(config.spikes as u64, p, config.theta)?,
                    exceeded,
                    trials,
                    false,
                ));
            } else {
                warnings.push(format!("theta = {} < 6: Chernoff row omitted", config.theta));
            }
        }
        ExperimentKind::FactCap => {
            let checked: u64 = records.iter().filter_map(|r| r.factcap_checked).sum();
            let mismatches: u64 = records.iter().filter_map(|r| r.factcap_mismatches).sum();
            // this claim is exact: any mismatch outside the band fails
            let mut row = rate_row(
                "fact-cap agreement: oracle == cap predicate outside the 1e-3 band",
                0.0,
                mismatches,
                checked.max(1),
                false,
            );
            row.pass = mismatches == 0;
            rows.push(row);
        }
        ExperimentKind::EndToEnd => {
            let net = shared_net.as_ref().expect("built above");
            let succeeded = records.iter().filter(|r| r.certificate == Some(true)).count() as u64;
            let alpha = (1.0 / config.big_d).asin();
            let omega = cap_measure(config.dim, PI - 2.0 * alpha)?;
            let b1 = ((config.spikes * config.spikes) as f64 * omega).min(1.0);
            let radius = alpha + net.delta;
            let p = 2.0 * cap_measure(config.dim, radius)?;
            let b2 = if p < 1.0 {
                let t_threshold = config.spikes as f64 * config.theta * p;
                (net.size() as f64
                    * binomial_tail_exact(
                        config.spikes as u64,
                        p,
                        t_threshold.min(config.spikes as f64),
                    )?)
                .min(1.0)
            } else {
                1.0
            };
            let lower = (1.0 - b1 - b2).max(0.0);
            // one-sided from below: success rate must reach 1 - P(E1) - P(E2')
            let empirical = succeeded as f64 / trials.max(1) as f64;
            let sigma = (empirical * (1.0 - empirical) / trials.max(1) as f64).sqrt();
            let (ci_low, ci_high) = wilson_interval(succeeded, trials.max(1));
            rows.push(BoundRow {
                claim: "P(certificate) >= 1 - P(E1) bound - P(E2') bound".to_string(),
                analytic_bound: lower,
                empirical,
                sigma,
                ci_low,
                ci_high,
                pass: trials == 0 || empirical >= lower - 4.0 * sigma,
            });
        }
        ExperimentKind::Scan | ExperimentKind::CoverBench => unreachable!(),
    }

    Ok(finish(config, records, rows, warnings, None))
}

fn finish(
    config: &ExperimentConfig,
    records: Vec<TrialRecord>,
    rows: Vec<BoundRow>,
    warnings: Vec<String>,
    payload: Option<serde_json::Value>,
) -> CampaignReport {
    let mut counts = BTreeMap::new();
    let mut add = |key: &str, v: u64| {
        if v > 0 {
            counts.insert(key.to_string(), v);
        }
    };
    add("e1_occurred", records.iter().filter(|r| r.e1_occurred == Some(true)).count() as u64);
    add("e2_occurred", records.iter().filter(|r| r.e2_occurred == Some(true)).count() as u64);
    add(
        "chernoff_exceeded",
        records.iter().filter(|r| r.chernoff_exceeded == Some(true)).count() as u64,
    );
    add("certificates", records.iter().filter(|r| r.certificate == Some(true)).count() as u64);
    add("factcap_checked", records.iter().filter_map(|r| r.factcap_checked).sum());
    add("factcap_mismatches", records.iter().filter_map(|r| r.factcap_mismatches).sum());
    let trial_errors = records.iter().filter(|r| r.error.is_some()).count() as u64;
    let violations = rows.iter().filter(|r| !r.pass).count() as u64;
    CampaignReport {
        schema: REPORT_SCHEMA.to_string(),
        library_version: crate::VERSION.to_string(),
        rng_algorithm: RNG_ALGORITHM.to_string(),
        config: config.canonical(),
        config_hash: config.config_hash(),
        trials_run: records.len() as u64,
        trial_errors,
        counts,
        rows,
        violations,
        warnings,
        trial_records: (records.len() as u64 <= TRIAL_EMBED_LIMIT && !records.is_empty())
            .then_some(records),
        payload,
    }
}

fn run_trial(config: &ExperimentConfig, net: Option<&DeltaNet>, t: u64) -> Result<TrialRecord> {
    let seed = SeedSpec::new(config.master_seed, t);
    let mut record = TrialRecord { stream_id: t, ..Default::default() };
    match config.kind {
        ExperimentKind::McE1 => {
            let body = SpikyBody::construct(config.dim, config.spikes, config.big_d, seed)?;
            record.e1_occurred = Some(check_e1(&body)?.occurred);
        }
        ExperimentKind::McE2 => {
            let body = SpikyBody::construct(config.dim, config.spikes, config.big_d, seed)?;
            let report = check_e2_prime(&body, net.expect("shared net"), config.theta)?;
            record.e2_occurred = Some(report.occurred);
            record.max_multiplicity = report.max_count.map(|m| m.count);
        }
        ExperimentKind::McChernoff => {
            let p = config.prob.expect("validated");
            let dist = rand_distr::Binomial::new(config.spikes as u64, p)
                .map_err(|e| Error::Config(format!("binomial: {e}")))?;
            let xi = dist.sample(&mut seed.rng());
            record.chernoff_exceeded =
                Some(xi as f64 > config.spikes as f64 * config.theta * p);
        }
        ExperimentKind::FactCap => {
            let body = SpikyBody::construct(config.dim, config.spikes, config.big_d, seed)?;
            if check_e1(&body)?.occurred {
                record.e1_occurred = Some(true);
                record.factcap_checked = Some(0);
                record.factcap_mismatches = Some(0);
            } else {
                record.e1_occurred = Some(false);
                let (checked, mismatches) = factcap_probes(config, &body, seed)?;
                record.factcap_checked = Some(checked);
                record.factcap_mismatches = Some(mismatches);
            }
        }
        ExperimentKind::EndToEnd => {
            let body = SpikyBody::construct(config.dim, config.spikes, config.big_d, seed)?;
            let cert = certify(&body, net.expect("shared net"), config.theta)?;
            record.e1_occurred = Some(cert.e1.occurred);
            record.e2_occurred = Some(cert.e2_prime.occurred);
            record.certificate = Some(cert.lower_bound.is_some());
        }
        ExperimentKind::Scan | ExperimentKind::CoverBench => unreachable!(),
    }
    Ok(record)
}

/// Probe (spike, direction) pairs on an E1-clean body: directions are drawn
/// half uniformly, half concentrated near the cap boundary, always at least
/// 1e-3 away from it; a mismatch is oracle != predicate.
const FACTCAP_BAND: f64 = 1e-3;

fn factcap_probes(
    config: &ExperimentConfig,
    body: &SpikyBody,
    seed: SeedSpec,
) -> Result<(u64, u64)> {
    let mut rng = seed.derive(crate::sphere::stream_block::PROBE_SWEEP, 0).rng();
    let alpha = body.alpha();
    let opts = OracleOpts::fast();
    let mut checked = 0_u64;
    let mut mismatches = 0_u64;
    for k in 0..config.probes {
        let spike = (k as usize) % body.n_spikes();
        let anti = body.points[spike].negated();
        let tangent = {
            // a random tangent direction at the cap center
            let raw = crate::sphere::sample_uniform_with(body.dimension, &mut rng);
            let d = raw.dot(&anti);
            let coords: Vec<f64> = raw
                .coords()
                .iter()
                .zip(anti.coords())
                .map(|(r, a)| r - d * a)
                .collect();
            match crate::sphere::UnitVector::normalized(coords) {
                Ok(t) => t,
                Err(_) => anti.any_tangent(),
            }
        };
        // even probes: uniform distance in (band, pi - band);
        // odd probes: stress the cap boundary from either side
        let beta = if k % 2 == 0 {
            FACTCAP_BAND + rng.random::<f64>() * (PI - 2.0 * FACTCAP_BAND)
        } else {
            let side: bool = rng.random();
            let off = FACTCAP_BAND + rng.random::<f64>() * 0.05;
            if side { alpha + off } else { (alpha - off).max(FACTCAP_BAND) }
        };
        if (beta - alpha).abs() < FACTCAP_BAND {
            continue;
        }
        let u = anti.rotate_toward(&tangent, beta)?;
        let predicted = cap_predicate(body, spike, &u)?;
        let observed = illuminates(body, spike, &u, &opts)?.illuminated;
        checked += 1;
        if predicted != observed {
            mismatches += 1;
        }
    }
    Ok((checked, mismatches))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{DeltaPolicy, ReportFormat, CONFIG_SCHEMA};

    fn config(kind: ExperimentKind) -> ExperimentConfig {
        ExperimentConfig {
            schema: CONFIG_SCHEMA.to_string(),
            kind,
            dim: 3,
            spikes: 2,
            big_d: 1.1,
            theta: 6.0,
            delta: DeltaPolicy::AlphaOverN,
            trials: 200,
            master_seed: 99,
            probes: 4,
            prob: None,
            n_range: None,
            workers: 2,
            out: None,
            format: ReportFormat::Json,
        }
    }

    #[test]
    fn mc_e1_bound_row_passes() {
        let report = run_campaign(&config(ExperimentKind::McE1)).unwrap();
        assert_eq!(report.trials_run, 200);
        assert_eq!(report.trial_errors, 0);
        assert_eq!(report.rows.len(), 2, "union bound + exact N=2 row");
        assert!(report.rows.iter().all(|r| r.pass), "{:?}", report.rows);
    }

    #[test]
    fn zero_trials_is_empty_success() {
        let mut cfg = config(ExperimentKind::McE1);
        cfg.trials = 0;
        let report = run_campaign(&cfg).unwrap();
        assert_eq!(report.trials_run, 0);
        assert_eq!(report.violations, 0);
        assert!(report.trial_records.is_none());
    }

    #[test]
    fn mc_chernoff_respects_bounds() {
        let mut cfg = config(ExperimentKind::McChernoff);
        cfg.spikes = 50;
        cfg.prob = Some(0.08);
        cfg.trials = 2000;
        let report = run_campaign(&cfg).unwrap();
        assert!(report.rows.iter().all(|r| r.pass), "{:?}", report.rows);
        assert_eq!(report.violations, 0);
    }

    #[test]
    fn workers_do_not_change_the_report() {
        for kind in [ExperimentKind::McE1, ExperimentKind::McChernoff] {
            let mut cfg = config(kind);
            if kind == ExperimentKind::McChernoff {
                cfg.prob = Some(0.1);
                cfg.spikes = 30;
            }
            cfg.trials = 128;
            let mut jsons = Vec::new();
            for workers in [1usize, 4, 16] {
                cfg.workers = workers;
                let report = run_campaign(&cfg).unwrap();
                jsons.push(serde_json::to_string_pretty(&report).unwrap());
            }
            assert_eq!(jsons[0], jsons[1]);
            assert_eq!(jsons[1], jsons[2]);
        }
    }

    #[test]
    fn scan_campaign_embeds_table() {
        let mut cfg = config(ExperimentKind::Scan);
        cfg.n_range = Some((2, 10));
        let report = run_campaign(&cfg).unwrap();
        let payload = report.payload.expect("scan payload");
        assert!(payload.get("rows").is_some());
    }

    #[test]
    fn end_to_end_emits_certificates() {
        let mut cfg = config(ExperimentKind::EndToEnd);
        cfg.trials = 50;
        cfg.dim = 3;
        cfg.spikes = 2;
        cfg.big_d = 1.05;
        let report = run_campaign(&cfg).unwrap();
        assert_eq!(report.trial_errors, 0);
        assert!(report.counts.contains_key("certificates"), "{:?}", report.counts);
    }
}
