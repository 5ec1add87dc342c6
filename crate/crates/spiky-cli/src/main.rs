//! CLI for spiky-ball illumination experiments.
//!
//! Geometry files (bodies, nets, covers, certificates, plans, reports) are
//! versioned JSON with bit-exact hex floats; campaigns exit nonzero when an
//! analytic bound is violated beyond 4 standard errors.

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use spiky::body::{certify, SpikyBody};
use spiky::bounds::{
    feasibility_scan, greedy_cap_cover, illuminate_with_cover, illumination_upper_bound,
    plan_parameters, plan_parameters_relaxed, CoverCheckOpts,
};
use spiky::cap::CapMeasure;
use spiky::harness::{
    emit_report, ingest_report, load_json, omega_csv, report_csv, run_campaign, save_json,
    scan_csv, DeltaPolicy, ExperimentConfig, ExperimentKind, ReportFormat, CONFIG_SCHEMA,
};
use spiky::oracle::{cap_predicate, gauge, illuminates, membership_margin, OracleOpts};
use spiky::sphere::net::{build_delta_net, DeltaNet};
use spiky::sphere::{SeedSpec, UnitVector};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "spiky", version, about = "Spiky-ball illumination bounds and experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate normalized cap measures over an angle grid.
    Omega {
        /// Ambient dimensions (repeatable).
        #[arg(long, required = true)]
        dim: Vec<usize>,
        /// Number of grid angles in (0, pi).
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Compute the full parameter plan for one (D, n).
    Plan {
        #[arg(long = "bigD")]
        big_d: f64,
        /// Ambient dimension d = n + 1.
        #[arg(long)]
        dim: usize,
        /// Compute even when D is outside the claimed range (1, 1.116).
        #[arg(long)]
        relaxed: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scan the planner across sphere dimensions and report flag onsets.
    Scan {
        #[arg(long = "bigD")]
        big_d: f64,
        #[arg(long, default_value_t = 2)]
        n_min: usize,
        #[arg(long)]
        n_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Construct a random spiky body and write it to JSON.
    Build {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        spikes: usize,
        #[arg(long = "bigD")]
        big_d: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check E1/E2' for a body against a net and emit a certificate.
    Certify {
        #[arg(long)]
        body: PathBuf,
        /// Existing net JSON; omit to build one fresh per --delta.
        #[arg(long)]
        net: Option<PathBuf>,
        /// Net spacing: "alpha/n" or an explicit angle in radians.
        #[arg(long, default_value = "alpha/n")]
        delta: String,
        #[arg(long, default_value_t = 6.0)]
        theta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Where to write a freshly built net.
        #[arg(long)]
        emit_net: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Oracle queries against a body: margins, gauges, illumination.
    Probe {
        #[arg(long)]
        body: PathBuf,
        /// Comma-separated point coordinates for margin + gauge.
        #[arg(long)]
        point: Option<String>,
        /// Spike index for an illumination query.
        #[arg(long)]
        spike: Option<usize>,
        /// Comma-separated direction for the illumination query.
        #[arg(long)]
        direction: Option<String>,
    },
    /// Greedy cap covering at radius arcsin(1/D) (or an explicit radius).
    Cover {
        #[arg(long)]
        dim: usize,
        #[arg(long = "bigD")]
        big_d: Option<f64>,
        /// Explicit cap radius in radians (overrides --bigD).
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Probe-cloud size.
        #[arg(long, default_value_t = 1_000_000)]
        probes: u64,
        /// Optional body JSON to validate the cover against.
        #[arg(long)]
        body: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The covering-based illumination upper bound for (D, n).
    Upper {
        #[arg(long = "bigD")]
        big_d: f64,
        /// Ambient dimension n of the body.
        #[arg(long)]
        dim: usize,
    },
    /// Monte Carlo estimate of P(E1) against its union bound.
    McE1(CampaignArgs),
    /// Monte Carlo estimate of P(E2') against tail bounds over a fixed net.
    McE2(CampaignArgs),
    /// Monte Carlo binomial tails against the 2^(-N theta p) bound.
    McChernoff {
        /// Binomial trial count N.
        #[arg(long)]
        spikes: u64,
        /// Success probability p.
        #[arg(long)]
        prob: f64,
        #[arg(long, default_value_t = 6.0)]
        theta: f64,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// Oracle-vs-cap-predicate agreement sweep on E1-clean bodies.
    #[command(name = "factcap")]
    FactCap(CampaignArgs),
    /// Run a campaign from a JSON config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the config's worker count.
        #[arg(long)]
        workers: Option<usize>,
        /// Override the config's output path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-ingest a report, verify round-trip fidelity, print a summary.
    Report {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(clap::Args)]
struct CampaignArgs {
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    spikes: usize,
    #[arg(long = "bigD")]
    big_d: f64,
    #[arg(long, default_value_t = 6.0)]
    theta: f64,
    /// Net spacing: "alpha/n" or an explicit angle in radians.
    #[arg(long, default_value = "alpha/n")]
    delta: String,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Probe budget (per-trial probe pairs for factcap).
    #[arg(long, default_value_t = 8)]
    probes: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "json")]
    format: String,
}

fn parse_delta(s: &str) -> Result<DeltaPolicy> {
    if s == "alpha/n" {
        return Ok(DeltaPolicy::AlphaOverN);
    }
    let delta: f64 = s.parse().context("delta must be \"alpha/n\" or an angle in radians")?;
    Ok(DeltaPolicy::Explicit { delta })
}

fn parse_format(s: &str) -> Result<ReportFormat> {
    match s {
        "json" => Ok(ReportFormat::Json),
        "csv" => Ok(ReportFormat::Csv),
        other => bail!("unknown format {other:?} (expected json or csv)"),
    }
}

fn parse_vector(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().context("vector components must be floats"))
        .collect()
}

fn campaign_config(kind: ExperimentKind, args: &CampaignArgs) -> Result<ExperimentConfig> {
    Ok(ExperimentConfig {
        schema: CONFIG_SCHEMA.to_string(),
        kind,
        dim: args.dim,
        spikes: args.spikes,
        big_d: args.big_d,
        theta: args.theta,
        delta: parse_delta(&args.delta)?,
        trials: args.trials,
        master_seed: args.seed,
        probes: args.probes,
        prob: None,
        n_range: None,
        workers: args.workers,
        out: args.out.as_ref().map(|p| p.display().to_string()),
        format: parse_format(&args.format)?,
    })
}

/// Run a campaign, write/print the report, and exit nonzero on violations.
fn finish_campaign(config: ExperimentConfig) -> Result<()> {
    let report = run_campaign(&config)?;
    let out = config.out.as_ref().map(PathBuf::from);
    if let Some(path) = out {
        emit_report(&report, config.format, &path)?;
        eprintln!("report written to {}", path.display());
    } else {
        match config.format {
            ReportFormat::Json => print!("{}", spiky::harness::report::to_json_string(&report)?),
            ReportFormat::Csv => print!("{}", report_csv(&report)),
        }
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for row in &report.rows {
        eprintln!(
            "[{}] {} | bound {:.6e} empirical {:.6e} ci [{:.6e}, {:.6e}]",
            if row.pass { "pass" } else { "FAIL" },
            row.claim,
            row.analytic_bound,
            row.empirical,
            row.ci_low,
            row.ci_high,
        );
    }
    if report.violations > 0 {
        eprintln!("{} bound violation(s) beyond 4 sigma", report.violations);
        std::process::exit(2);
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Omega { dim, grid, out, format } => {
            if grid == 0 {
                bail!("grid must be >= 1");
            }
            let mut rows = Vec::new();
            for d in dim {
                for k in 1..=grid {
                    let phi = std::f64::consts::PI * k as f64 / (grid + 1) as f64;
                    rows.push(CapMeasure::compute(d, phi)?);
                }
            }
            let text = match format.as_str() {
                "csv" => omega_csv(&rows),
                "json" => serde_json::to_string_pretty(&rows)? + "\n",
                other => bail!("unknown format {other:?}"),
            };
            match out {
                Some(path) => std::fs::write(path, text)?,
                None => print!("{text}"),
            }
        }
        Command::Plan { big_d, dim, relaxed, out } => {
            if dim < 3 {
                bail!("--dim is the ambient dimension d = n + 1; need dim >= 3");
            }
            let n = dim - 1;
            let plan = if relaxed {
                plan_parameters_relaxed(big_d, n)?
            } else {
                plan_parameters(big_d, n)?
            };
            let json = spiky::harness::report::to_json_string(&plan)?;
            match out {
                Some(path) => std::fs::write(path, &json)?,
                None => print!("{json}"),
            }
            eprintln!(
                "n={} feasible={} lower_bound={:.6e} (log2 {:.3})",
                plan.n, plan.feasible, plan.lower_bound, plan.log2_lower_bound
            );
        }
        Command::Scan { big_d, n_min, n_max, out, format } => {
            let table = feasibility_scan(big_d, n_min, n_max)?;
            let text = match format.as_str() {
                "csv" => scan_csv(&table),
                "json" => spiky::harness::report::to_json_string(&table)?,
                other => bail!("unknown format {other:?}"),
            };
            match out {
                Some(path) => std::fs::write(path, text)?,
                None => print!("{text}"),
            }
            eprintln!("first fully feasible n: {:?}", table.onset_feasible);
        }
        Command::Build { dim, spikes, big_d, seed, out } => {
            let body = SpikyBody::construct(dim, spikes, big_d, SeedSpec::new(seed, 0))?;
            save_json(&out, &body)?;
            eprintln!(
                "body written to {} (d={dim}, N={spikes}, D={big_d}, alpha={:.6})",
                out.display(),
                body.alpha()
            );
        }
        Command::Certify { body, net, delta, theta, seed, emit_net, out } => {
            let body: SpikyBody = load_json(&body)?;
            let net: DeltaNet = match net {
                Some(path) => load_json(&path)?,
                None => {
                    let alpha = body.alpha();
                    let delta = parse_delta(&delta)?.resolve(alpha, body.dimension);
                    let net = build_delta_net(body.dimension, delta, SeedSpec::new(seed, 0), 100_000)?;
                    if let Some(path) = &emit_net {
                        save_json(path, &net)?;
                        eprintln!("net written to {}", path.display());
                    }
                    net
                }
            };
            let cert = certify(&body, &net, theta)?;
            let json = spiky::harness::report::to_json_string(&cert)?;
            match out {
                Some(path) => std::fs::write(path, &json)?,
                None => print!("{json}"),
            }
            match cert.lower_bound {
                Some(bound) => eprintln!(
                    "certificate: i(K) >= {bound:.6e} (coverage confidence {:.6})",
                    cert.coverage_confidence
                ),
                None => eprintln!(
                    "no bound: E1 occurred = {}, E2' occurred = {}",
                    cert.e1.occurred, cert.e2_prime.occurred
                ),
            }
        }
        Command::Probe { body, point, spike, direction } => {
            let body: SpikyBody = load_json(&body)?;
            let opts = OracleOpts::default();
            let mut result = serde_json::Map::new();
            if let Some(point) = point {
                let p = parse_vector(&point)?;
                let margin = membership_margin(&body, &p, &opts)?;
                let g = gauge(&body, &p, &opts)?;
                result.insert("margin".to_string(), serde_json::to_value(&margin)?);
                result.insert("gauge".to_string(), serde_json::to_value(&g)?);
            }
            if let (Some(i), Some(dir)) = (spike, direction) {
                let u = UnitVector::normalized(parse_vector(&dir)?)
                    .map_err(|e| anyhow::anyhow!("direction: {e}"))?;
                let probe = illuminates(&body, i, &u, &opts)?;
                result.insert("illuminates".to_string(), serde_json::to_value(&probe)?);
                result.insert(
                    "cap_predicate".to_string(),
                    serde_json::to_value(cap_predicate(&body, i, &u)?)?,
                );
            }
            if result.is_empty() {
                bail!("nothing to probe: pass --point and/or --spike with --direction");
            }
            println!("{}", serde_json::to_string_pretty(&serde_json::Value::Object(result))?);
        }
        Command::Cover { dim, big_d, radius, seed, probes, body, out } => {
            let radius = match (radius, big_d) {
                (Some(r), _) => r,
                (None, Some(d)) => (1.0 / d).asin(),
                (None, None) => bail!("pass --radius or --bigD"),
            };
            let cover = greedy_cap_cover(dim, radius, SeedSpec::new(seed, 0), probes)?;
            eprintln!(
                "cover of {} caps at radius {radius:.6} (benchmark {:?})",
                cover.size(),
                cover.formula_benchmark
            );
            if let Some(path) = body {
                let body: SpikyBody = load_json(&path)?;
                let report = illuminate_with_cover(&body, &cover, &CoverCheckOpts::default())?;
                eprintln!(
                    "illumination check: pass={} spike_failures={} oracle_validated={}",
                    report.pass,
                    report.spike_failures.len(),
                    report.oracle_validated
                );
                if !report.pass {
                    std::process::exit(2);
                }
            }
            if let Some(path) = out {
                save_json(&path, &cover)?;
                eprintln!("cover written to {}", path.display());
            }
        }
        Command::Upper { big_d, dim } => {
            let bound = illumination_upper_bound(big_d, dim)?;
            println!("{bound:.6e}");
        }
        Command::McE1(args) => finish_campaign(campaign_config(ExperimentKind::McE1, &args)?)?,
        Command::McE2(args) => finish_campaign(campaign_config(ExperimentKind::McE2, &args)?)?,
        Command::FactCap(args) => finish_campaign(campaign_config(ExperimentKind::FactCap, &args)?)?,
        Command::McChernoff { spikes, prob, theta, trials, seed, workers, out, format } => {
            let config = ExperimentConfig {
                schema: CONFIG_SCHEMA.to_string(),
                kind: ExperimentKind::McChernoff,
                dim: 2,
                spikes: spikes as usize,
                big_d: 1.1,
                theta,
                delta: DeltaPolicy::AlphaOverN,
                trials,
                master_seed: seed,
                probes: 0,
                prob: Some(prob),
                n_range: None,
                workers,
                out: out.map(|p| p.display().to_string()),
                format: parse_format(&format)?,
            };
            finish_campaign(config)?;
        }
        Command::Run { config, workers, out } => {
            let mut config: ExperimentConfig = load_json(&config)?;
            if let Some(w) = workers {
                config.workers = w;
            }
            if let Some(o) = out {
                config.out = Some(o.display().to_string());
            }
            finish_campaign(config)?;
        }
        Command::Report { input } => {
            let report = ingest_report(&input)?;
            // round-trip check: re-serializing must reproduce the file bytes
            let original = std::fs::read_to_string(&input)?;
            let reemitted = spiky::harness::report::to_json_string(&report)?;
            let round_trip_ok = original == reemitted;
            println!(
                "schema {} | config {} | trials {} | errors {} | violations {} | round-trip {}",
                report.schema,
                report.config_hash,
                report.trials_run,
                report.trial_errors,
                report.violations,
                if round_trip_ok { "bit-exact" } else { "MISMATCH" }
            );
            for row in &report.rows {
                println!(
                    "[{}] {} | bound {:.6e} empirical {:.6e}",
                    if row.pass { "pass" } else { "FAIL" },
                    row.claim,
                    row.analytic_bound,
                    row.empirical
                );
            }
            if !round_trip_ok || report.violations > 0 {
                std::process::exit(2);
            }
        }
    }
    Ok(())
}
