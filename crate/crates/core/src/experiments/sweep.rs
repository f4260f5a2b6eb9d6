use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::scenarios::staged_peak;
use super::{dispersive_window, initial_state, lambda_of, target_state, Protocol, RunOptions};
use crate::error::{Error, Result};
use crate::model::SystemConfig;
use crate::TOOL_VERSION;

/// What each sweep cell runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepScenario {
    /// Resonant storage, scored in the bare ensemble frame.
    Resonant,
    /// Dispersive storage, scored in the dressed ensemble frame.
    Dispersive,
    /// ω_M ramp into resonance, then resonant storage.
    Ramp,
}

impl SweepScenario {
    fn protocol(self) -> Protocol {
        match self {
            Self::Resonant | Self::Ramp => Protocol::Resonant,
            Self::Dispersive => Protocol::Dispersive,
        }
    }
}

/// How a cell's fidelity curve becomes one number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reduction {
    /// Maximum over the scenario window after any schedule has finished.
    MaxOverTime,
    /// Value at the nominal transfer time of the unswept configuration.
    AtNominalTransferTime,
}

/// Unit class of a swept value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Frequency,
    Time,
    Dimensionless,
}

/// A swept parameter: a named detuning/protocol knob or a dotted config path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SweepParam {
    /// ω_C relative to ω_M; below M for resonant scans, above for dispersive.
    DeltaC,
    /// ω_NV relative to ω_M, same sign rule as `DeltaC`.
    DeltaNv,
    /// `DeltaC` and `DeltaNv` together.
    Delta,
    /// λ = (J_t − g)/J_t at fixed J_t.
    Mismatch,
    /// Ramp start above ω_C.
    DeltaMax,
    /// Ramp duration.
    RampTime,
    /// Any numeric field of the configuration, e.g. `nve.g`.
    Path(String),
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "delta_c" => Self::DeltaC,
            "delta_nv" => Self::DeltaNv,
            "delta" => Self::Delta,
            "mismatch" => Self::Mismatch,
            "delta_max" => Self::DeltaMax,
            "ramp_time" => Self::RampTime,
            path if !path.is_empty()
                && path.split('.').all(|seg| {
                    !seg.is_empty() && seg.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
                }) =>
            {
                Self::Path(path.to_string())
            }
            other => {
                return Err(Error::config(
                    "sweep.axes.param",
                    format!("not a sweep parameter: {other:?}"),
                ))
            }
        })
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::DeltaC => "delta_c",
            Self::DeltaNv => "delta_nv",
            Self::Delta => "delta",
            Self::Mismatch => "mismatch",
            Self::DeltaMax => "delta_max",
            Self::RampTime => "ramp_time",
            Self::Path(p) => p,
        })
    }
}

impl SweepParam {
    pub fn quantity(&self) -> Quantity {
        match self {
            Self::DeltaC | Self::DeltaNv | Self::Delta | Self::DeltaMax => Quantity::Frequency,
            Self::RampTime => Quantity::Time,
            Self::Mismatch => Quantity::Dimensionless,
            Self::Path(p) => {
                let mut segs = p.rsplit('.');
                let last = segs.next().unwrap_or("");
                let parent = segs.next().unwrap_or("");
                match (parent, last) {
                    ("omega_m", "start" | "target") => Quantity::Frequency,
                    (_, "start" | "stop" | "duration") => Quantity::Time,
                    (
                        _,
                        "omega" | "omega_nv" | "g" | "j_t" | "decay_rate" | "zero_field_d"
                        | "drive_frequency" | "omega_c_override" | "omega_c" | "value",
                    ) => Quantity::Frequency,
                    _ => Quantity::Dimensionless,
                }
            }
        }
    }

    /// Writes `value` into `cfg`.
    pub fn apply(&self, cfg: &mut SystemConfig, value: f64, scenario: SweepScenario) -> Result<()> {
        let sign = match scenario {
            SweepScenario::Dispersive => 1.0,
            SweepScenario::Resonant | SweepScenario::Ramp => -1.0,
        };
        let w_m = cfg.qubit_m.omega;
        match self {
            Self::DeltaC => cfg.qubit_c.omega = w_m + sign * value,
            Self::DeltaNv => cfg.nve.omega_nv = w_m + sign * value,
            Self::Delta => {
                cfg.qubit_c.omega = w_m + sign * value;
                cfg.nve.omega_nv = w_m + sign * value;
            }
            Self::Mismatch => {
                if value == 1.0 {
                    return Err(Error::InvalidParameter(
                        "mismatch λ = 1 leaves g undefined".into(),
                    ));
                }
                cfg.nve.g = cfg.j_t * (1.0 - value);
            }
            Self::DeltaMax | Self::RampTime => {
                let w_c = cfg.qubit_c.omega;
                let ramp = cfg
                    .schedule
                    .as_mut()
                    .and_then(|s| s.omega_m.as_mut())
                    .ok_or_else(|| Error::config("schedule.omega_m", "ramp sweeps need an ω_M ramp"))?;
                if *self == Self::DeltaMax {
                    ramp.start = w_c + value;
                } else {
                    if value < 0.0 {
                        return Err(Error::InvalidParameter(format!(
                            "ramp time must be >= 0, got {value}"
                        )));
                    }
                    ramp.duration = value;
                }
            }
            Self::Path(path) => set_path(cfg, path, value)?,
        }
        Ok(())
    }
}

fn set_path(cfg: &mut SystemConfig, path: &str, value: f64) -> Result<()> {
    let mut doc = serde_json::to_value(&*cfg)
        .map_err(|e| Error::Numerical(format!("config serialisation failed: {e}")))?;
    let pointer = format!("/{}", path.replace('.', "/"));
    let slot = doc
        .pointer_mut(&pointer)
        .ok_or_else(|| Error::config(path, "no such configuration field"))?;
    if !(slot.is_number() || slot.is_null()) {
        return Err(Error::config(path, "not a numeric field"));
    }
    *slot = if slot.is_u64() && value >= 0.0 && value.fract() == 0.0 {
        serde_json::Value::from(value as u64)
    } else {
        serde_json::Value::from(value)
    };
    *cfg = serde_json::from_value(doc).map_err(|e| Error::config(path, e.to_string()))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub param: String,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(param: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            param: param.into(),
            values,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub scenario: SweepScenario,
    pub axes: Vec<Axis>,
    pub reduction: Reduction,
}

impl SweepSpec {
    fn params(&self) -> Result<Vec<SweepParam>> {
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(Error::config(
                "sweep.axes",
                format!("need 1 or 2 axes, got {}", self.axes.len()),
            ));
        }
        self.axes
            .iter()
            .enumerate()
            .map(|(k, a)| {
                if a.values.is_empty() {
                    return Err(Error::config(format!("sweep.axes[{k}].values"), "empty axis"));
                }
                if a.values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::config(
                        format!("sweep.axes[{k}].values"),
                        "non-finite value",
                    ));
                }
                a.param.parse().map_err(|_| {
                    Error::config(
                        format!("sweep.axes[{k}].param"),
                        format!("not a sweep parameter: {:?}", a.param),
                    )
                })
            })
            .collect()
    }
}

/// Fidelity over a 1- or 2-axis grid, rows along the first axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub scenario: SweepScenario,
    pub reduction: Reduction,
    pub axes: Vec<Axis>,
    pub grid: Vec<Vec<f64>>,
    pub config_hash: String,
    pub tool_version: String,
}

impl SweepResult {
    pub fn shape(&self) -> (usize, usize) {
        (self.grid.len(), self.grid.first().map_or(0, Vec::len))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.grid[i][j]
    }

    /// `(i, j, F)` of the largest cell, first in row-major order on ties.
    pub fn argmax(&self) -> (usize, usize, f64) {
        let mut best = (0, 0, f64::NEG_INFINITY);
        for (i, row) in self.grid.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        best
    }

    /// Row-major `(axis values, F)` records.
    pub fn cells(&self) -> Vec<(Vec<f64>, f64)> {
        let mut out = Vec::new();
        for (i, row) in self.grid.iter().enumerate() {
            for (j, &f) in row.iter().enumerate() {
                let mut coords = vec![self.axes[0].values[i]];
                if let Some(a) = self.axes.get(1) {
                    coords.push(a.values[j]);
                }
                out.push((coords, f));
            }
        }
        out
    }
}

/// SHA-256 over everything that determines a sweep's numbers.
pub fn config_hash(cfg: &SystemConfig, spec: &SweepSpec, opts: &RunOptions) -> String {
    let numerics = RunOptions {
        workers: None,
        ..*opts
    };
    let doc = serde_json::json!({ "config": cfg, "sweep": spec, "numerics": numerics });
    let bytes = serde_json::to_vec(&doc).expect("plain data serialises");
    hex::encode(Sha256::digest(&bytes))
}

/// Evaluates every cell of `spec`. Cells may run concurrently; the grid is
/// assembled in row-major order regardless.
pub fn sweep(cfg: &SystemConfig, spec: &SweepSpec, opts: &RunOptions) -> Result<SweepResult> {
    cfg.validate()?;
    opts.validate()?;
    let params = spec.params()?;
    let protocol = spec.scenario.protocol();
    let t_star = protocol.transfer_time(cfg)?;
    let (window, points) = match spec.scenario {
        SweepScenario::Resonant | SweepScenario::Ramp => (2.0 * t_star, 2 * opts.points_per_transfer + 1),
        SweepScenario::Dispersive => (
            dispersive_window(lambda_of(cfg)?)?,
            3 * opts.points_per_transfer + 1,
        ),
    };
    let nominal = match spec.reduction {
        Reduction::MaxOverTime => None,
        Reduction::AtNominalTransferTime => Some(t_star),
    };

    let n0 = spec.axes[0].values.len();
    let n1 = spec.axes.get(1).map_or(1, |a| a.values.len());
    let indices: Vec<(usize, usize)> = (0..n0).flat_map(|i| (0..n1).map(move |j| (i, j))).collect();
    let eval = |&(i, j): &(usize, usize)| -> Result<f64> {
        let mut cell = cfg.clone();
        params[0].apply(&mut cell, spec.axes[0].values[i], spec.scenario)?;
        if let Some(p) = params.get(1) {
            p.apply(&mut cell, spec.axes[1].values[j], spec.scenario)?;
        }
        cell.validate()?;
        let basis = cell.basis();
        let psi0 = initial_state(cell.alpha, cell.beta, &basis)?;
        let target = target_state(cell.alpha, cell.beta, opts.convention, protocol.kind(), &basis)?;
        let f = staged_peak(&cell, protocol, &psi0, &target, window, nominal, points, opts)?;
        if !(-super::FIDELITY_SLACK..=1.0 + super::FIDELITY_SLACK).contains(&f) {
            return Err(Error::Numerical(format!(
                "fidelity {f} outside [0, 1] at cell ({i}, {j})"
            )));
        }
        Ok(f)
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = opts.workers {
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))?;
    let flat: Vec<f64> = pool.install(|| indices.par_iter().map(eval).collect::<Result<_>>())?;

    Ok(SweepResult {
        scenario: spec.scenario,
        reduction: spec.reduction,
        axes: spec.axes.clone(),
        grid: flat.chunks(n1).map(<[f64]>::to_vec).collect(),
        config_hash: config_hash(cfg, spec, opts),
        tool_version: TOOL_VERSION.to_string(),
    })
}

fn check_axes(spec: &SweepSpec, allowed: &[&str], what: &str) -> Result<()> {
    for (k, a) in spec.axes.iter().enumerate() {
        if !allowed.contains(&a.param.as_str()) {
            return Err(Error::config(
                format!("sweep.axes[{k}].param"),
                format!("{what} axes must be one of {allowed:?}, got {:?}", a.param),
            ));
        }
    }
    Ok(())
}

/// Maximum fidelity after an ω_M ramp, over ramp times × initial detunings.
pub fn run_ramp_sweep(
    cfg: &SystemConfig,
    taus: &[f64],
    delta_maxes: &[f64],
    opts: &RunOptions,
) -> Result<SweepResult> {
    if let Some(t) = taus.iter().find(|&&t| t < 0.0) {
        return Err(Error::InvalidParameter(format!(
            "ramp time must be >= 0, got {t}"
        )));
    }
    let spec = SweepSpec {
        scenario: SweepScenario::Ramp,
        axes: vec![
            Axis::new("ramp_time", taus.to_vec()),
            Axis::new("delta_max", delta_maxes.to_vec()),
        ],
        reduction: Reduction::MaxOverTime,
    };
    sweep(cfg, &spec, opts)
}

/// Resonant-storage fidelity over (Δ_C, Δ_NV) or (Δ, λ).
pub fn run_detuning_heatmap(cfg: &SystemConfig, spec: &SweepSpec, opts: &RunOptions) -> Result<SweepResult> {
    check_axes(
        spec,
        &["delta_c", "delta_nv", "delta", "mismatch"],
        "detuning heatmap",
    )?;
    let spec = SweepSpec {
        scenario: SweepScenario::Resonant,
        ..spec.clone()
    };
    sweep(cfg, &spec, opts)
}

/// Dispersive-storage fidelity over (Δ_C, Δ_NV) or (Δ, λ), maximised over
/// `[0, 3π/(2Λ)]` of the unswept configuration by default.
pub fn run_dispersive_heatmap(
    cfg: &SystemConfig,
    spec: &SweepSpec,
    opts: &RunOptions,
) -> Result<SweepResult> {
    check_axes(
        spec,
        &["delta_c", "delta_nv", "delta", "mismatch"],
        "dispersive heatmap",
    )?;
    let spec = SweepSpec {
        scenario: SweepScenario::Dispersive,
        ..spec.clone()
    };
    sweep(cfg, &spec, opts)
}
