//! Command-line front end: configuration documents, scenario dispatch and
//! deterministic CSV/JSON output. The only module that touches the file
//! system.
//!
//! ```text
//! hybridmem <SCENARIO> --config PATH --out DIR [--format csv|json]
//!           [--set key=value]... [--convention paper-literal|phase-corrected]
//!           [--workers N]
//! ```
//!
//! Each run writes one data file per table plus `manifest.json`. Exit status
//! is 0 on success, 2 for configuration errors, 3 for numerical-invariant
//! failures and 4 for I/O errors, with a one-line JSON diagnostic on stderr.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde_json::Value;

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::experiments::{
    dispersive_config, run_decoherence_study, run_detuning_heatmap, run_dispersive_compare,
    run_dispersive_heatmap, run_ramp_sweep, run_resonant_storage, run_separation_study, sweep, Axis,
    Protocol, Reduction, SweepResult, SweepScenario,
};
use crate::model::{UnitMode, UnitSystem};
use crate::TOOL_VERSION;

mod config;
mod output;

pub use config::{parse_config, parse_document, Document, Study, SweepDoc};
pub use output::{
    format_float, render, sha256_hex, write_atomic, write_records, Format, OutputFile, RunManifest, Table,
    MANIFEST_FILE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Scenario {
    /// Resonant storage time series.
    Fig2,
    /// Ramp time × initial detuning.
    Fig3,
    /// Detuning heatmap, resonant protocol.
    Fig4,
    /// Full versus effective dispersive dynamics.
    Fig5,
    /// Detuning heatmap, dispersive protocol.
    Fig6,
    /// Drive leakage versus control-line distance.
    Fig7,
    /// Lindblad runs versus qubit decay rate.
    Fig8,
    /// The configuration's own sweep block.
    CustomSweep,
}

impl Scenario {
    pub const ALL: [Scenario; 8] = [
        Self::Fig2,
        Self::Fig3,
        Self::Fig4,
        Self::Fig5,
        Self::Fig6,
        Self::Fig7,
        Self::Fig8,
        Self::CustomSweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Fig2 => "fig2",
            Self::Fig3 => "fig3",
            Self::Fig4 => "fig4",
            Self::Fig5 => "fig5",
            Self::Fig6 => "fig6",
            Self::Fig7 => "fig7",
            Self::Fig8 => "fig8",
            Self::CustomSweep => "custom-sweep",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Command-line arguments.
#[derive(Debug, Clone, Parser)]
#[command(
    name = "hybridmem",
    version,
    about = "Flux-qubit / NV-ensemble quantum memory simulations"
)]
pub struct Cli {
    pub scenario: Scenario,
    /// Configuration document (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Dotted-path override, e.g. `--set nve.g=0.5`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// paper-literal or phase-corrected.
    #[arg(long)]
    pub convention: Option<String>,
    /// Sweep worker threads.
    #[arg(long, env = "HYBRIDMEM_WORKERS")]
    pub workers: Option<usize>,
}

/// Entry point of the `hybridmem` binary.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(manifest) => {
            println!("{}", cli.out.join(MANIFEST_FILE).display());
            log::info!(
                "{} finished in {:.3} s",
                manifest.scenario,
                manifest.duration_seconds
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", error_line(&e));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

/// One-line JSON diagnostic: `{"error": kind, "exit_code": n, "message": ...}`.
pub fn error_line(e: &Error) -> String {
    let mut v = serde_json::json!({
        "error": e.kind(),
        "exit_code": e.exit_code(),
        "message": e.to_string(),
    });
    if let Error::Config { path, .. } = e {
        v["path"] = path.clone().into();
    }
    v.to_string()
}

/// Reads the configuration, applies flag overrides and runs the scenario.
pub fn run(cli: &Cli) -> Result<RunManifest> {
    let bytes = fs::read(&cli.config).map_err(|e| Error::io(&cli.config, e))?;
    let text =
        std::str::from_utf8(&bytes).map_err(|e| Error::config("<document>", format!("not UTF-8: {e}")))?;
    let mut doc = parse_document(text, &cli.set)?;
    if let Some(c) = &cli.convention {
        doc.options.convention = c.parse()?;
    }
    if cli.workers.is_some() {
        doc.options.workers = cli.workers;
    }
    doc.options.validate()?;
    run_scenario(
        cli.scenario,
        &doc,
        Some(&cli.config),
        &bytes,
        &cli.out,
        cli.format,
    )
}

/// Runs `scenario`, writes its tables atomically under `out_dir` and then
/// the manifest that lists them.
pub fn run_scenario(
    scenario: Scenario,
    doc: &Document,
    config_path: Option<&Path>,
    config_bytes: &[u8],
    out_dir: &Path,
    format: Format,
) -> Result<RunManifest> {
    let started = Instant::now();
    let tables = compute_tables(scenario, doc)?;
    let outputs = write_records(&tables, format, out_dir)?;
    let manifest = RunManifest {
        scenario: scenario.name().to_string(),
        config_path: config_path.map(Path::to_path_buf),
        config_sha256: sha256_hex(config_bytes),
        format,
        outputs,
        tool_version: TOOL_VERSION.to_string(),
        duration_seconds: started.elapsed().as_secs_f64(),
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest)
        .map_err(|e| Error::Numerical(format!("manifest encoding failed: {e}")))?;
    bytes.push(b'\n');
    write_atomic(&out_dir.join(MANIFEST_FILE), &bytes)?;
    Ok(manifest)
}

/// The data tables of a scenario, values in document units. Pure.
pub fn compute_tables(scenario: Scenario, doc: &Document) -> Result<Vec<Table>> {
    let cfg = &doc.config;
    let opts = &doc.options;
    let unit = cfg.unit;
    let study = &doc.study;
    let tag = |t: Table| stamp(t, scenario, doc);
    Ok(match scenario {
        Scenario::Fig2 => {
            let traj = run_resonant_storage(cfg, opts)?;
            vec![tag(trajectory_table("trajectory", &traj, &unit, None))]
        }
        Scenario::Fig3 => {
            require("study.ramp_times", &study.ramp_times)?;
            require("study.delta_maxes", &study.delta_maxes)?;
            let taus: Vec<f64> = study.ramp_times.iter().map(|&v| unit.time_in(v)).collect();
            let dmax: Vec<f64> = study.delta_maxes.iter().map(|&v| unit.frequency_in(v)).collect();
            let result = run_ramp_sweep(cfg, &taus, &dmax, opts)?;
            let axes = [
                Axis::new("ramp_time", study.ramp_times.clone()),
                Axis::new("delta_max", study.delta_maxes.clone()),
            ];
            vec![tag(heatmap_table(&result, &axes))]
        }
        Scenario::Fig4 | Scenario::Fig6 | Scenario::CustomSweep => {
            let axes = &doc
                .sweep
                .as_ref()
                .ok_or_else(|| Error::config("sweep", "this scenario needs a sweep block"))?
                .axes;
            let result = match scenario {
                Scenario::Fig4 => run_detuning_heatmap(
                    cfg,
                    &doc.sweep_spec(SweepScenario::Resonant, Reduction::AtNominalTransferTime)?,
                    opts,
                )?,
                Scenario::Fig6 => run_dispersive_heatmap(
                    cfg,
                    &doc.sweep_spec(SweepScenario::Dispersive, Reduction::MaxOverTime)?,
                    opts,
                )?,
                _ => {
                    let spec = doc.sweep_spec(scenario_of(cfg), Reduction::MaxOverTime)?;
                    sweep(cfg, &spec, opts)?
                }
            };
            vec![tag(heatmap_table(&result, axes))]
        }
        Scenario::Fig5 => {
            let cmp = run_dispersive_compare(cfg, opts)?;
            let peaks = |t: Table| {
                t.meta("lambda", unit.frequency_out(cmp.lambda))
                    .meta("full_peak_t", unit.time_out(cmp.full_peak.t))
                    .meta("full_peak_fidelity", cmp.full_peak.fidelity)
                    .meta("effective_peak_t", unit.time_out(cmp.effective_peak.t))
                    .meta("effective_peak_fidelity", cmp.effective_peak.fidelity)
            };
            vec![
                tag(peaks(trajectory_table("trajectory_full", &cmp.full, &unit, None))),
                tag(peaks(trajectory_table(
                    "trajectory_effective",
                    &cmp.effective,
                    &unit,
                    None,
                ))),
            ]
        }
        Scenario::Fig7 => {
            require("study.d_n_values", &study.d_n_values)?;
            let protocol = study.protocol.unwrap_or_else(|| Protocol::detect(cfg));
            let r = run_separation_study(cfg, &study.d_n_values, study.theta, protocol, opts)?;
            let meta = |t: Table| {
                t.meta("protocol", serde_json::to_value(protocol).unwrap_or(Value::Null))
                    .meta("theta", r.theta)
                    .meta("omega_c", unit.frequency_out(r.omega_c))
            };
            vec![
                tag(meta(
                    Table::new("separation")
                        .column("d_n", r.d_n.clone())
                        .column(
                            "omega_nv",
                            r.omega_nv.iter().map(|&w| unit.frequency_out(w)).collect(),
                        )
                        .column("proposed", r.proposed.clone())
                        .column("single", r.single.clone()),
                )),
                tag(meta(trajectory_table(
                    "trajectory_proposed",
                    &r.proposed_series,
                    &unit,
                    None,
                ))),
                tag(meta(trajectory_table(
                    "trajectory_single",
                    &r.single_series,
                    &unit,
                    None,
                ))),
            ]
        }
        Scenario::Fig8 => {
            if study.gammas.is_empty() {
                return Err(Error::config(
                    "study.gammas",
                    "fig8 needs at least one decay rate",
                ));
            }
            let gammas: Vec<f64> = study.gammas.iter().map(|&v| unit.frequency_in(v)).collect();
            let mut runs = vec![(
                study.protocol.unwrap_or_else(|| Protocol::detect(cfg)),
                cfg.clone(),
            )];
            if let Some(d) = study.dispersive_detuning {
                runs.push((Protocol::Dispersive, dispersive_config(cfg, unit.frequency_in(d))));
            }
            let mut tables = Vec::new();
            for (protocol, c) in runs {
                let name = match protocol {
                    Protocol::Resonant => "resonant",
                    Protocol::Dispersive => "dispersive",
                };
                let study_runs = run_decoherence_study(&c, &gammas, protocol, opts)?;
                let mut series = Table::new(format!("decoherence_{name}"));
                let mut peaks = (Vec::new(), Vec::new(), Vec::new());
                for (run, &g_doc) in study_runs.iter().zip(&study.gammas) {
                    series = append(
                        series,
                        trajectory_table("", &run.trajectory, &unit, Some(("gamma", g_doc))),
                    );
                    peaks.0.push(g_doc);
                    peaks.1.push(unit.time_out(run.peak.t));
                    peaks.2.push(run.peak.fidelity);
                }
                tables.push(tag(series));
                tables.push(tag(Table::new(format!("peaks_{name}"))
                    .column("gamma", peaks.0)
                    .column("t_peak", peaks.1)
                    .column("fidelity", peaks.2)));
            }
            tables
        }
    })
}

fn scenario_of(cfg: &crate::model::SystemConfig) -> SweepScenario {
    if cfg.schedule.as_ref().is_some_and(|s| s.omega_m.is_some()) {
        SweepScenario::Ramp
    } else {
        match Protocol::detect(cfg) {
            Protocol::Resonant => SweepScenario::Resonant,
            Protocol::Dispersive => SweepScenario::Dispersive,
        }
    }
}

fn require(path: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::config(path, "must list at least one value"));
    }
    Ok(())
}

fn stamp(t: Table, scenario: Scenario, doc: &Document) -> Table {
    let (time_unit, frequency_unit) = match doc.config.unit.mode {
        UnitMode::DimensionlessGamma => ("1/gamma", "gamma"),
        UnitMode::SiAngular => ("s", "MHz"),
    };
    t.meta("scenario", scenario.name())
        .meta("convention", doc.options.convention.to_string())
        .meta("time_unit", time_unit)
        .meta("frequency_unit", frequency_unit)
        .meta("tool_version", TOOL_VERSION)
}

/// `t,fidelity,pop_C,pop_M,pop_NVE,norm`, optionally led by a constant column.
fn trajectory_table(name: &str, traj: &Trajectory, unit: &UnitSystem, lead: Option<(&str, f64)>) -> Table {
    let r = &traj.records;
    let pop = |k: usize| {
        r.iter()
            .map(|x| x.populations.map_or(f64::NAN, |p| p[k]))
            .collect()
    };
    let mut t = Table::new(name);
    if let Some((col, v)) = lead {
        t = t.column(col, vec![v; r.len()]);
    }
    t.column("t", r.iter().map(|x| unit.time_out(x.t)).collect())
        .column(
            "fidelity",
            r.iter().map(|x| x.fidelity.unwrap_or(f64::NAN)).collect(),
        )
        .column("pop_C", pop(0))
        .column("pop_M", pop(1))
        .column("pop_NVE", pop(2))
        .column("norm", r.iter().map(|x| x.norm).collect())
}

fn append(mut acc: Table, next: Table) -> Table {
    if acc.columns.is_empty() {
        acc.columns = next.columns;
    } else {
        for (a, b) in acc.columns.iter_mut().zip(next.columns) {
            a.1.extend(b.1);
        }
    }
    acc
}

/// Long format: one row per cell, axis columns echo `axes` (document units).
fn heatmap_table(result: &SweepResult, axes: &[Axis]) -> Table {
    let (n0, n1) = result.shape();
    let mut cols: Vec<Vec<f64>> = vec![Vec::with_capacity(n0 * n1); axes.len() + 1];
    for i in 0..n0 {
        for j in 0..n1 {
            cols[0].push(axes[0].values[i]);
            if let Some(a) = axes.get(1) {
                cols[1].push(a.values[j]);
            }
            cols[axes.len()].push(result.get(i, j));
        }
    }
    let mut t = Table::new("heatmap")
        .meta(
            "reduction",
            serde_json::to_value(result.reduction).unwrap_or(Value::Null),
        )
        .meta("sweep_hash", result.config_hash.clone());
    let mut cols = cols.into_iter();
    for a in axes {
        t = t.column(a.param.clone(), cols.next().unwrap_or_default());
    }
    t.column("fidelity", cols.next().unwrap_or_default())
}
