//! Command-line front end: `simulate`, `detect`, `scan`, `power`, `calibrate`.
//!
//! Machine-readable output is JSON on stdout; diagnostics go to stderr.
//! Exit codes: 0 success, 1 runtime or numeric failure, 2 usage or
//! configuration error.

pub mod config;
pub mod csvio;
pub mod units;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::auxmodel::{optimal_efficiency, weight_efficiency, weight_moments, WeightFunction};
use crate::detector::{detect, detect_weighted, estimate_theta, null_moments, DetectionResult};
use crate::error::Error;
use crate::lightcurve::{template_efficiency, LightCurveProfile};
use crate::power::{predicted_snr, threshold_theta, zm_efficiency_table, DEFAULT_REPLICATES};
use crate::scan::scan;
use crate::simulator::{derive_seed, expected_count, simulate, RateModel};
use crate::stats::{ks_test, ks_uniform, summarize, variance_stderr};

use config::{Config, WeightChoice};
use csvio::{read_events, write_events, EventTable};

/// Errors surfaced by the command-line front end.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Library(#[from] Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "photon-score",
    version,
    about = "Event-weighted periodicity tests for photon lists"
)]
pub struct Cli {
    /// Worker threads for replicate and grid parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate an event list and write it as CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Phase offset of the light curve, in cycles.
        #[arg(long, default_value_t = 0.0)]
        tau: f64,
    },
    /// Run the detection pipeline on an event list.
    Detect {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        events: PathBuf,
    },
    /// Evaluate the statistic on a frequency grid.
    Scan {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        events: PathBuf,
        /// CSV file for the per-point table.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Predict detection power and template efficiencies.
    Power {
        #[arg(long)]
        config: PathBuf,
        /// CSV file for the Z_m efficiency table.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Null Monte Carlo calibration report.
    Calibrate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = DEFAULT_REPLICATES)]
        replicates: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV file for per-replicate values.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be >= 1");
            return 2;
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("warning: thread pool already configured: {e}");
        }
    }
    match execute(&cli.command) {
        Ok(value) => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            let _ = serde_json::to_writer_pretty(&mut lock, &value);
            let _ = writeln!(lock);
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cmd: &Command) -> Result<serde_json::Value, CliError> {
    match cmd {
        Command::Simulate {
            config,
            out,
            seed,
            tau,
        } => cmd_simulate(config, out, *seed, *tau),
        Command::Detect { config, events } => cmd_detect(config, events),
        Command::Scan {
            config,
            events,
            out,
        } => cmd_scan(config, events, out.as_deref()),
        Command::Power { config, out } => cmd_power(config, out.as_deref()),
        Command::Calibrate {
            config,
            replicates,
            seed,
            out,
        } => cmd_calibrate(config, *replicates, *seed, out.as_deref()),
    }
}

fn to_json<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("serializable output")
}

pub fn cmd_simulate(
    config: &Path,
    out: &Path,
    seed: u64,
    tau: f64,
) -> Result<serde_json::Value, CliError> {
    let cfg = Config::load(config)?;
    let model = cfg.require(&cfg.model, "model")?;
    let densities = cfg.require(&cfg.densities, "densities")?;
    if !(0.0..1.0).contains(&tau) {
        return Err(CliError::Config(format!(
            "--tau: must be in [0, 1), got {tau}"
        )));
    }
    if let Some(g) = cfg.geometry {
        if (g.theta() - model.theta).abs() > 1e-3 {
            eprintln!(
                "note: model.theta = {} differs from the disc geometry's alpha / mu = {:.6}",
                model.theta,
                g.theta()
            );
        }
    }
    let events = simulate(model, densities, tau, seed)?;
    write_events(out, &events, None, cfg.units)?;
    Ok(json!({
        "n_events": events.len(),
        "expected_count": expected_count(model),
        "theta": model.theta,
        "seed": seed,
        "out": out.display().to_string(),
    }))
}

/// Per-event weights and the source fraction they were built with.
fn event_weights(cfg: &Config, table: &EventTable) -> Result<(Vec<f64>, Option<f64>), CliError> {
    let choice = cfg.require(&cfg.weight, "weight")?;
    match choice {
        WeightChoice::Precomputed => {
            let w = table.weights.clone().ok_or_else(|| {
                CliError::Input("weight kind `precomputed` needs a `weight` column".into())
            })?;
            Ok((w, cfg.theta))
        }
        WeightChoice::Function(wf) => {
            let theta = match (cfg.theta, cfg.densities.as_ref()) {
                (Some(t), _) => Some(t),
                (None, Some(d)) => {
                    let z: Vec<(f64, f64)> =
                        table.events.iter().map(|e| (e.energy, e.angle)).collect();
                    Some(estimate_theta(&z, d)?)
                }
                (None, None) => None,
            };
            let wf = match theta {
                Some(t) if wf.uses_theta() => wf.with_theta(t)?,
                _ => wf.clone(),
            };
            let w = table
                .events
                .iter()
                .map(|e| wf.weight(e.energy, e.angle))
                .collect::<Result<Vec<f64>, Error>>()?;
            Ok((w, theta))
        }
    }
}

fn detection_span(cfg: &Config) -> Result<f64, CliError> {
    cfg.span
        .ok_or_else(|| CliError::Config("span: give `span` or a `model` section".into()))
}

pub fn cmd_detect(config: &Path, events: &Path) -> Result<serde_json::Value, CliError> {
    let cfg = Config::load(config)?;
    let phase = *cfg.require(&cfg.phase, "phase")?;
    let template = cfg.require(&cfg.template, "template")?;
    let span = detection_span(&cfg)?;
    cfg.require(&cfg.weight, "weight")?;
    let mut table = read_events(events, cfg.units)?;
    sort_by_time(&mut table);
    let (weights, theta) = event_weights(&cfg, &table)?;
    let result = detect_weighted(&table.events, &weights, &phase, template, span, theta)?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    Ok(to_json(&result))
}

fn sort_by_time(table: &mut EventTable) {
    if table.events.windows(2).all(|p| p[0].time <= p[1].time) {
        return;
    }
    let mut idx: Vec<usize> = (0..table.events.len()).collect();
    idx.sort_by(|&a, &b| table.events[a].time.total_cmp(&table.events[b].time));
    table.events = idx.iter().map(|&i| table.events[i]).collect();
    if let Some(w) = &table.weights {
        table.weights = Some(idx.iter().map(|&i| w[i]).collect());
    }
}

pub fn cmd_scan(
    config: &Path,
    events: &Path,
    out: Option<&Path>,
) -> Result<serde_json::Value, CliError> {
    let cfg = Config::load(config)?;
    let spec = cfg.require(&cfg.scan, "scan")?;
    let template = cfg.require(&cfg.template, "template")?;
    let span = detection_span(&cfg)?;
    let epoch = cfg.phase.map(|p| p.epoch).unwrap_or(0.0);
    let mut table = read_events(events, cfg.units)?;
    sort_by_time(&mut table);
    let (weights, theta) = event_weights(&cfg, &table)?;
    let result = scan(&table.events, &weights, spec, template, epoch, span)?;
    if let Some(path) = out {
        let file = std::fs::File::create(path)
            .map_err(|e| CliError::Input(format!("cannot create {}: {e}", path.display())))?;
        result.write_csv(std::io::BufWriter::new(file))?;
    }
    let mut v = to_json(&result.summary());
    v["theta_used"] = json!(theta);
    Ok(v)
}

pub fn cmd_power(config: &Path, out: Option<&Path>) -> Result<serde_json::Value, CliError> {
    let cfg = Config::load(config)?;
    let model = cfg.require(&cfg.model, "model")?;
    let template = cfg.require(&cfg.template, "template")?;
    let theta = cfg.theta.unwrap_or(model.theta);
    let (weight_kind, eff_w) = match &cfg.weight {
        None | Some(WeightChoice::Function(WeightFunction::Unit)) => ("unit", 1.0),
        Some(WeightChoice::Precomputed) => {
            return Err(CliError::Config(
                "weight: `precomputed` weights have no analytic efficiency".into(),
            ))
        }
        Some(WeightChoice::Function(wf)) => {
            let d = cfg.require(&cfg.densities, "densities")?;
            let wf = wf.with_theta(theta)?;
            let m = weight_moments(&wf, theta, d)?;
            (wf.kind(), weight_efficiency(&m, theta)?)
        }
    };
    let mu0 = expected_count(model) / model.span;
    let source = &model.profile;
    let prediction = predicted_snr(theta, model.span, mu0, eff_w, template, source)?;

    let mut report = json!({
        "prediction": prediction,
        "efficiency": {"weight": weight_kind, "value": eff_w},
    });
    if let Some(d) = &cfg.densities {
        if theta > 0.0 && theta < 1.0 {
            report["efficiency"]["optimal"] = json!(optimal_efficiency(theta, d)?);
        }
    }
    if source.eta() > 0.0 {
        report["template_efficiency"] = json!(template_efficiency(template, source)?);
        if let Some(target) = cfg.power.target_snr {
            report["threshold_theta"] = json!(threshold_theta(
                model.span, mu0, eff_w, template, source, target
            )?);
        }
    }
    let table_m = cfg.power.table_m.unwrap_or(10);
    if let Some(path) = out {
        let table = efficiency_table(source, table_m)?;
        let file = std::fs::File::create(path)
            .map_err(|e| CliError::Input(format!("cannot create {}: {e}", path.display())))?;
        let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
        w.write_record(["m", "efficiency_percent"])
            .map_err(std::io::Error::from)?;
        for (m, e) in &table {
            w.write_record([m.to_string(), format!("{e:.6}")])
                .map_err(std::io::Error::from)?;
        }
        w.flush()?;
        report["efficiency_table"] = json!(table
            .iter()
            .map(|(m, e)| json!({"m": m, "percent": e}))
            .collect::<Vec<_>>());
    }
    Ok(report)
}

fn efficiency_table(
    source: &LightCurveProfile,
    max_m: usize,
) -> Result<Vec<(usize, f64)>, CliError> {
    if source.eta() == 0.0 {
        return Err(CliError::Config(
            "model.profile: the efficiency table needs a pulsed profile (eta > 0)".into(),
        ));
    }
    Ok(zm_efficiency_table(source, max_m)?)
}

/// Calibration of one null replicate.
#[derive(Debug, Clone)]
struct NullReplicate {
    result: DetectionResult,
    theta_hat: Option<f64>,
}

pub fn cmd_calibrate(
    config: &Path,
    replicates: usize,
    seed: u64,
    out: Option<&Path>,
) -> Result<serde_json::Value, CliError> {
    let cfg = Config::load(config)?;
    let model = cfg.require(&cfg.model, "model")?;
    let densities = *cfg.require(&cfg.densities, "densities")?;
    let template = cfg.require(&cfg.template, "template")?;
    let wf = match cfg.require(&cfg.weight, "weight")? {
        WeightChoice::Function(wf) => wf.clone(),
        WeightChoice::Precomputed => {
            return Err(CliError::Config(
                "weight: `precomputed` weights cannot be used for simulated replicates".into(),
            ))
        }
    };
    if replicates < 2 {
        return Err(CliError::Config("--replicates: need at least 2".into()));
    }
    let null_model = RateModel {
        profile: model.profile.with_eta(0.0)?,
        ..model.clone()
    };
    let phase = cfg.phase.unwrap_or(model.phase);
    let span = model.span;
    let estimated = cfg.theta.is_none() && wf.uses_theta();
    let reps: Vec<NullReplicate> = (0..replicates as u64)
        .into_par_iter()
        .map(|i| -> Result<NullReplicate, Error> {
            let events = simulate(&null_model, &densities, 0.0, derive_seed(seed, i))?;
            let theta = if estimated {
                None
            } else {
                Some(cfg.theta.unwrap_or(model.theta))
            };
            let result = detect(&events, &wf, &phase, template, theta, &densities, span)?;
            Ok(NullReplicate {
                theta_hat: if estimated { result.theta_used } else { None },
                result,
            })
        })
        .collect::<Result<_, _>>()?;

    let m = template.m();
    let harmonics: Vec<serde_json::Value> = (0..m)
        .map(|n| {
            let x: Vec<f64> = reps
                .iter()
                .map(|r| 2.0 * r.result.an_sq[n] / r.result.sum_w2)
                .collect();
            let s = summarize(&x);
            let ks = ks_test(&x, |v| 1.0 - (-0.5 * v.max(0.0)).exp());
            json!({"n": n + 1, "mean": s.mean, "stderr": s.stderr, "ks_chi2_2": ks})
        })
        .collect();
    let p: Vec<f64> = reps.iter().map(|r| r.result.p_value).collect();
    let qt: Vec<f64> = reps.iter().map(|r| r.result.qt).collect();
    let s: Vec<f64> = reps.iter().map(|r| r.result.sum_w2).collect();
    let qs = summarize(&qt);
    let ss = summarize(&s);
    let mean_s2 = s.iter().map(|v| v * v).sum::<f64>() / s.len() as f64;
    let (mean_pred, _) = null_moments(ss.mean, template, span);
    let var_pred = 2.0 * template.sum_fourth() * mean_s2 / (span * span)
        + (template.sum_sq() / span).powi(2) * ss.variance;
    let mut report = json!({
        "replicates": replicates,
        "seed": seed,
        "theta_mode": if estimated { "estimated" } else { "known" },
        "harmonics": harmonics,
        "p_value_uniformity": ks_uniform(&p),
        "qt_mean": {"empirical": qs.mean, "stderr": qs.stderr, "predicted": mean_pred},
        "qt_variance": {
            "empirical": qs.variance,
            "stderr": variance_stderr(&qt),
            "predicted": var_pred,
            "ratio": qs.variance / var_pred,
        },
    });
    if estimated {
        let th: Vec<f64> = reps.iter().filter_map(|r| r.theta_hat).collect();
        let t = summarize(&th);
        report["theta_hat"] = json!({"mean": t.mean, "sd": t.variance.sqrt()});
    }
    if let Some(path) = out {
        let file = std::fs::File::create(path)
            .map_err(|e| CliError::Input(format!("cannot create {}: {e}", path.display())))?;
        let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
        w.write_record(["replicate", "n_events", "qt", "sum_w2", "p_value"])
            .map_err(std::io::Error::from)?;
        for (i, r) in reps.iter().enumerate() {
            w.write_record([
                i.to_string(),
                r.result.n_events.to_string(),
                format!("{:.16e}", r.result.qt),
                format!("{:.16e}", r.result.sum_w2),
                format!("{:.16e}", r.result.p_value),
            ])
            .map_err(std::io::Error::from)?;
        }
        w.flush()?;
    }
    Ok(report)
}
