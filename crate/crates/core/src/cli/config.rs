//! The configuration document: one JSON object, strict keys, values in the
//! units selected by its `unit` block.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::experiments::{
    Axis, Protocol, Quantity, Reduction, RunOptions, SweepParam, SweepScenario, SweepSpec,
};
use crate::linalg::C64;
use crate::model::{
    DriveParams, FluxQubitParams, NveParams, Schedule, SystemConfig, UnitMode, UnitSystem, DEFAULT_G_FACTOR,
};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    #[serde(default)]
    unit: RawUnit,
    qubit_c: RawQubit,
    qubit_m: RawQubit,
    nve: RawNve,
    j_t: f64,
    drive: Option<DriveParams>,
    schedule: Option<Schedule>,
    initial: RawInitial,
    #[serde(default)]
    numerics: RunOptions,
    #[serde(default)]
    study: Study,
    sweep: Option<SweepDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawUnit {
    mode: UnitMode,
    /// rad/s.
    gamma: Option<f64>,
}

impl Default for RawUnit {
    fn default() -> Self {
        Self {
            mode: UnitMode::DimensionlessGamma,
            gamma: None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQubit {
    omega: f64,
    #[serde(default)]
    decay_rate: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNve {
    omega_nv: f64,
    g: f64,
    #[serde(default = "default_n_spins")]
    n_spins: f64,
    #[serde(default = "default_fock_cutoff")]
    fock_cutoff: usize,
    zero_field_d: Option<f64>,
    #[serde(default = "default_g_factor")]
    g_factor: f64,
    b_ext_z: Option<f64>,
}

fn default_n_spins() -> f64 {
    1.0e6
}

fn default_fock_cutoff() -> usize {
    2
}

fn default_g_factor() -> f64 {
    DEFAULT_G_FACTOR
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    alpha: Amplitude,
    beta: Amplitude,
}

/// A real number or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
enum Amplitude {
    Real(f64),
    Complex([f64; 2]),
}

impl From<Amplitude> for C64 {
    fn from(a: Amplitude) -> Self {
        match a {
            Amplitude::Real(re) => C64::new(re, 0.0),
            Amplitude::Complex([re, im]) => C64::new(re, im),
        }
    }
}

/// Scenario inputs, in document units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Study {
    /// Ramp durations (time).
    pub ramp_times: Vec<f64>,
    /// Ramp start above ω_C (frequency).
    pub delta_maxes: Vec<f64>,
    /// Control-line distances, metres.
    pub d_n_values: Vec<f64>,
    /// Rotation angle `Ω_C t_rot`.
    pub theta: f64,
    /// Overrides protocol detection.
    pub protocol: Option<Protocol>,
    /// Decay rates Γ = γ_C = γ_M (frequency).
    pub gammas: Vec<f64>,
    /// Also run the dispersive protocol with C and the ensemble this far
    /// above M (frequency).
    pub dispersive_detuning: Option<f64>,
}

impl Default for Study {
    fn default() -> Self {
        Self {
            ramp_times: Vec::new(),
            delta_maxes: Vec::new(),
            d_n_values: Vec::new(),
            theta: PI / 4.0,
            protocol: None,
            gammas: Vec::new(),
            dispersive_detuning: None,
        }
    }
}

/// A sweep block, in document units. Scenario and reduction fall back to
/// the defaults of the scenario that runs it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepDoc {
    pub scenario: Option<SweepScenario>,
    pub axes: Vec<Axis>,
    pub reduction: Option<Reduction>,
}

/// A parsed and validated configuration document.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    /// Internal units.
    pub config: SystemConfig,
    /// Internal units.
    pub options: RunOptions,
    pub study: Study,
    pub sweep: Option<SweepDoc>,
}

impl Document {
    pub fn unit(&self) -> &UnitSystem {
        &self.config.unit
    }

    /// Converts a document-unit value of the given kind to internal units.
    pub fn to_internal(&self, q: Quantity, v: f64) -> f64 {
        match q {
            Quantity::Frequency => self.unit().frequency_in(v),
            Quantity::Time => self.unit().time_in(v),
            Quantity::Dimensionless => v,
        }
    }

    /// The sweep block in internal units, with fallbacks filled in.
    pub fn sweep_spec(&self, scenario: SweepScenario, reduction: Reduction) -> Result<SweepSpec> {
        let doc = self
            .sweep
            .as_ref()
            .ok_or_else(|| Error::config("sweep", "this scenario needs a sweep block"))?;
        let axes = doc
            .axes
            .iter()
            .enumerate()
            .map(|(k, a)| {
                let param: SweepParam = a.param.parse().map_err(|_| {
                    Error::config(
                        format!("sweep.axes[{k}].param"),
                        format!("not a sweep parameter: {:?}", a.param),
                    )
                })?;
                let q = param.quantity();
                Ok(Axis::new(
                    a.param.clone(),
                    a.values.iter().map(|&v| self.to_internal(q, v)).collect(),
                ))
            })
            .collect::<Result<_>>()?;
        Ok(SweepSpec {
            scenario: doc.scenario.unwrap_or(scenario),
            axes,
            reduction: doc.reduction.unwrap_or(reduction),
        })
    }
}

/// Parses a configuration document into a validated [`SystemConfig`].
pub fn parse_config(text: &str) -> Result<SystemConfig> {
    Ok(parse_document(text, &[])?.config)
}

/// Parses a document after applying `key=value` overrides on dotted paths.
/// Override values are read as JSON, falling back to a plain string.
pub fn parse_document(text: &str, overrides: &[String]) -> Result<Document> {
    let mut value: Value =
        serde_json::from_str(text).map_err(|e| Error::config("<document>", e.to_string()))?;
    for o in overrides {
        apply_override(&mut value, o)?;
    }
    let raw: RawDocument = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        Error::config(
            if path == "." { "<document>".into() } else { path },
            e.into_inner().to_string(),
        )
    })?;
    convert(raw)
}

fn apply_override(doc: &mut Value, spec: &str) -> Result<()> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::config("--set", format!("expected key=value, got {spec:?}")))?;
    if path.is_empty() || path.split('.').any(str::is_empty) {
        return Err(Error::config("--set", format!("malformed key {path:?}")));
    }
    let new = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut slot = doc;
    for seg in path.split('.') {
        slot = match slot {
            Value::Object(map) => map
                .entry(seg)
                .or_insert_with(|| Value::Object(Default::default())),
            Value::Array(items) => seg
                .parse::<usize>()
                .ok()
                .and_then(|i| items.get_mut(i))
                .ok_or_else(|| Error::config(path, format!("no element {seg:?}")))?,
            _ => return Err(Error::config(path, format!("cannot descend into {seg:?}"))),
        };
    }
    *slot = new;
    Ok(())
}

fn convert(raw: RawDocument) -> Result<Document> {
    let unit = match raw.unit.gamma {
        Some(g) => {
            UnitSystem::new(raw.unit.mode, g).map_err(|e| Error::config("unit.gamma", e.to_string()))?
        }
        None => UnitSystem {
            mode: raw.unit.mode,
            ..UnitSystem::default()
        },
    };
    let f = |v: f64| unit.frequency_in(v);
    let t = |v: f64| unit.time_in(v);
    let qubit = |q: &RawQubit| FluxQubitParams {
        omega: f(q.omega),
        decay_rate: f(q.decay_rate),
    };
    let drive = raw.drive.map(|d| DriveParams {
        drive_frequency: d.drive_frequency.map(f),
        omega_c_override: d.omega_c_override.map(f),
        ..d
    });
    let schedule = raw.schedule.map(|mut s| {
        if let Some(r) = s.omega_m.as_mut() {
            r.start = f(r.start);
            r.target = f(r.target);
            r.duration = t(r.duration);
        }
        for seg in &mut s.j_t {
            seg.start = t(seg.start);
            seg.value = f(seg.value);
        }
        if let Some(w) = s.drive.as_mut() {
            w.start = t(w.start);
            w.stop = t(w.stop);
            w.omega_c = f(w.omega_c);
            w.omega_nv = f(w.omega_nv);
        }
        s
    });
    let config = SystemConfig {
        unit,
        qubit_c: qubit(&raw.qubit_c),
        qubit_m: qubit(&raw.qubit_m),
        nve: NveParams {
            omega_nv: f(raw.nve.omega_nv),
            g: f(raw.nve.g),
            n_spins: raw.nve.n_spins,
            fock_cutoff: raw.nve.fock_cutoff,
            zero_field_d: raw.nve.zero_field_d.map(f),
            g_factor: raw.nve.g_factor,
            b_ext_z: raw.nve.b_ext_z,
        },
        j_t: f(raw.j_t),
        drive,
        schedule,
        alpha: raw.initial.alpha.into(),
        beta: raw.initial.beta.into(),
    };
    config.validate()?;
    let options = RunOptions {
        dt_max: raw.numerics.dt_max.map(t),
        ..raw.numerics
    };
    options.validate()?;
    Ok(Document {
        config,
        options,
        study: raw.study,
        sweep: raw.sweep,
    })
}
