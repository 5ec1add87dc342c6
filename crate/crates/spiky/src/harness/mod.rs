//! Experiment harness: configuration, seeded parallel campaigns, and
//! report emission.

pub mod campaign;
pub mod config;
pub mod report;

pub use campaign::{run_campaign, BoundRow, CampaignReport, TrialRecord, REPORT_SCHEMA};
pub use config::{
    CanonicalConfig, DeltaPolicy, ExperimentConfig, ExperimentKind, ReportFormat, CONFIG_SCHEMA,
};
pub use report::{emit_report, ingest_report, load_json, omega_csv, report_csv, save_json, scan_csv};
