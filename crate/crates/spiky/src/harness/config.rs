//! Campaign configuration: a fully serializable description of one
//! experiment, hashed into every output.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const CONFIG_SCHEMA: &str = "spiky.config/v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    McE1,
    McE2,
    McChernoff,
    FactCap,
    EndToEnd,
    Scan,
    CoverBench,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case")]
pub enum DeltaPolicy {
    /// delta = alpha / n with n = dim - 1 (the sphere dimension).
    AlphaOverN,
    Explicit {
        #[serde(with = "crate::hexfloat::serde_f64")]
        delta: f64,
    },
}

impl DeltaPolicy {
    pub fn resolve(&self, alpha: f64, dim: usize) -> f64 {
        match self {
            DeltaPolicy::AlphaOverN => alpha / (dim - 1) as f64,
            DeltaPolicy::Explicit { delta } => *delta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub schema: String,
    pub kind: ExperimentKind,
    pub dim: usize,
    pub spikes: usize,
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub big_d: f64,
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub theta: f64,
    pub delta: DeltaPolicy,
    pub trials: u64,
    pub master_seed: u64,
    /// Probe budget; per-kind meaning (net verification probes for mc-e2 /
    /// end-to-end, probe pairs per trial for factcap, cloud size for
    /// cover-bench).
    pub probes: u64,
    /// Explicit success probability for mc-chernoff.
    #[serde(default, with = "crate::hexfloat::serde_opt_f64")]
    pub prob: Option<f64>,
    /// Sphere-dimension range for scan.
    #[serde(default)]
    pub n_range: Option<(usize, usize)>,
    /// Worker threads (0 = rayon default). Runtime concern: excluded from
    /// the canonical form, so reports are identical across worker counts.
    #[serde(default)]
    pub workers: usize,
    /// Output path; runtime concern, excluded from the canonical form.
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default = "default_format")]
    pub format: ReportFormat,
}

fn default_format() -> ReportFormat {
    ReportFormat::Json
}

/// The identity of an experiment: everything that affects results.
/// Worker count and output routing are deliberately absent.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CanonicalConfig {
    pub schema: String,
    pub kind: ExperimentKind,
    pub dim: usize,
    pub spikes: usize,
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub big_d: f64,
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub theta: f64,
    pub delta: DeltaPolicy,
    pub trials: u64,
    pub master_seed: u64,
    pub probes: u64,
    #[serde(default, with = "crate::hexfloat::serde_opt_f64")]
    pub prob: Option<f64>,
    #[serde(default)]
    pub n_range: Option<(usize, usize)>,
}

impl ExperimentConfig {
    pub fn canonical(&self) -> CanonicalConfig {
        CanonicalConfig {
            schema: self.schema.clone(),
            kind: self.kind,
            dim: self.dim,
            spikes: self.spikes,
            big_d: self.big_d,
            theta: self.theta,
            delta: self.delta,
            trials: self.trials,
            master_seed: self.master_seed,
            probes: self.probes,
            prob: self.prob,
            n_range: self.n_range,
        }
    }

    /// FNV-1a hash (hex) of the canonical JSON form.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_string(&self.canonical()).expect("config serializes");
        let mut h = 0xcbf2_9ce4_8422_2325_u64;
        for byte in json.as_bytes() {
            h = (h ^ u64::from(*byte)).wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{h:016x}")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != CONFIG_SCHEMA {
            return Err(Error::Config(format!(
                "unsupported config schema {:?} (expected {CONFIG_SCHEMA})",
                self.schema
            )));
        }
        let need_dim = |min: usize| -> Result<()> {
            if self.dim < min {
                return Err(Error::Config(format!("dim must be >= {min}, got {}", self.dim)));
            }
            Ok(())
        };
        match self.kind {
            ExperimentKind::McE1 | ExperimentKind::McE2 | ExperimentKind::EndToEnd
            | ExperimentKind::FactCap => {
                need_dim(2)?;
                if self.spikes == 0 {
                    return Err(Error::Config("spikes must be >= 1".to_string()));
                }
                if !(self.big_d > 1.0 && self.big_d < std::f64::consts::SQRT_2) {
                    return Err(Error::Config(format!(
                        "event campaigns need 1 < D < sqrt(2), got {}",
                        self.big_d
                    )));
                }
            }
            ExperimentKind::McChernoff => {
                if self.spikes == 0 {
                    return Err(Error::Config("mc-chernoff uses spikes as the binomial trial count; need >= 1".to_string()));
                }
                match self.prob {
                    Some(p) if p > 0.0 && p < 1.0 => {}
                    _ => {
                        return Err(Error::Config(
                            "mc-chernoff requires prob in (0, 1)".to_string(),
                        ))
                    }
                }
            }
            ExperimentKind::Scan => {
                if self.n_range.is_none() {
                    return Err(Error::Config("scan requires n_range".to_string()));
                }
                if !(self.big_d > 1.0) {
                    return Err(Error::Config("scan requires D > 1".to_string()));
                }
            }
            ExperimentKind::CoverBench => {
                need_dim(2)?;
                if !(self.big_d > 1.0) {
                    return Err(Error::Config("cover-bench requires D > 1".to_string()));
                }
                if self.probes == 0 {
                    return Err(Error::Config("cover-bench requires probes >= 1".to_string()));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ExperimentConfig {
        ExperimentConfig {
            schema: CONFIG_SCHEMA.to_string(),
            kind: ExperimentKind::McE1,
            dim: 3,
            spikes: 2,
            big_d: 1.1,
            theta: 6.0,
            delta: DeltaPolicy::AlphaOverN,
            trials: 100,
            master_seed: 42,
            probes: 1000,
            prob: None,
            n_range: None,
            workers: 0,
            out: None,
            format: ReportFormat::Json,
        }
    }

    #[test]
    fn hash_ignores_runtime_fields() {
        let a = base();
        let mut b = base();
        b.workers = 16;
        b.out = Some("elsewhere.json".to_string());
        assert_eq!(a.config_hash(), b.config_hash());
        let mut c = base();
        c.master_seed = 43;
        assert_ne!(a.config_hash(), c.config_hash());
    }

    #[test]
    fn validation_catches_bad_configs() {
        let mut cfg = base();
        cfg.big_d = 1.5;
        assert!(cfg.validate().is_err());
        let mut cfg = base();
        cfg.kind = ExperimentKind::McChernoff;
        assert!(cfg.validate().is_err(), "needs prob");
        cfg.prob = Some(0.05);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = base();
        let json = serde_json::to_string_pretty(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(cfg.config_hash(), back.config_hash());
    }
}
