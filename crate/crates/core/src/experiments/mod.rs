//! Storage protocols, targets and fidelities, plus the parameter-sweep
//! engine behind the heatmap scenarios.
//!
//! Every run starts from `α|0_C 0_M 0⟩ + β|1_C 0_M 0⟩` and is scored against
//! `α|0_C 0_M 0⟩ + β·p|0_C 0_M 1⟩`, where `p` is the transfer phase of the
//! protocol under [`TargetConvention::PhaseCorrected`] and 1 under
//! [`TargetConvention::PaperLiteral`].

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analytic::{dispersive_transfer_time, resonant_transfer_time};
use crate::dynamics::{
    default_dt_max, evolve_lindblad, evolve_pure, fastest_frequency, ConfigHamiltonian, Hamiltonian,
    StateRef, TimeGrid, Trajectory,
};
use crate::error::{Error, Result};
use crate::linalg::{ComplexVector, C64};
use crate::model::{collapse_operators, dispersive_detunings, effective_lambda, Basis, SystemConfig};

mod scenarios;
mod sweep;

pub use scenarios::{
    effective_hamiltonian, run_decoherence_study, run_dispersive_compare, run_resonant_storage,
    run_rwa_validation, run_separation_study, DecoherenceRun, DispersiveComparison, RwaComparison,
    SeparationResult,
};
pub use sweep::{
    config_hash, run_detuning_heatmap, run_dispersive_heatmap, run_ramp_sweep, sweep, Axis, Quantity,
    Reduction, SweepParam, SweepResult, SweepScenario, SweepSpec,
};

/// Lindblad runs use this fraction of the default step: RK4 is not exact
/// on a static generator, the unitary engine is.
pub const LINDBLAD_DT_FACTOR: f64 = 0.25;

/// Fidelities may exceed 1 by round-off only.
pub const FIDELITY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetConvention {
    /// Target `α|0⟩ + β|1⟩` on the ensemble, exactly as written.
    PaperLiteral,
    /// Target `α|0⟩ + β·p|1⟩` with `p` the protocol's transfer phase.
    #[default]
    PhaseCorrected,
}

impl FromStr for TargetConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper-literal" => Ok(Self::PaperLiteral),
            "phase-corrected" => Ok(Self::PhaseCorrected),
            other => Err(Error::config(
                "convention",
                format!("expected paper-literal or phase-corrected, got {other:?}"),
            )),
        }
    }
}

impl fmt::Display for TargetConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::PaperLiteral => "paper-literal",
            Self::PhaseCorrected => "phase-corrected",
        })
    }
}

/// Which exchange moves the excitation into the ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransferKind {
    /// Resonant three-body chain C–M–NVE.
    Resonant,
    /// Dispersive C–NVE swap through a virtually excited M.
    Dispersive,
    /// Direct C–NVE exchange without a coupler.
    Single,
}

impl TransferKind {
    /// Phase acquired by the stored component at a complete transfer.
    pub fn phase(self) -> C64 {
        match self {
            Self::Resonant => C64::new(-1.0, 0.0),
            Self::Dispersive | Self::Single => C64::new(0.0, -1.0),
        }
    }
}

fn check_amplitudes(alpha: C64, beta: C64) -> Result<()> {
    let norm = alpha.norm_sqr() + beta.norm_sqr();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidState(format!("|α|² + |β|² = {norm}, expected 1")));
    }
    Ok(())
}

/// `α|0_C 0_M 0⟩ + β|1_C 0_M 0⟩`.
pub fn initial_state(alpha: C64, beta: C64, basis: &Basis) -> Result<ComplexVector> {
    check_amplitudes(alpha, beta)?;
    let mut psi = ComplexVector::zeros(basis.dim());
    psi[basis.index(0, 0, 0)] = alpha;
    psi[basis.phi1()] += beta;
    Ok(psi)
}

/// `|0_C⟩ ⊗ |0_M⟩ ⊗ (α|0⟩ + β·p|1⟩)` with `p` set by the convention.
pub fn target_state(
    alpha: C64,
    beta: C64,
    convention: TargetConvention,
    kind: TransferKind,
    basis: &Basis,
) -> Result<ComplexVector> {
    check_amplitudes(alpha, beta)?;
    let p = match convention {
        TargetConvention::PaperLiteral => C64::new(1.0, 0.0),
        TargetConvention::PhaseCorrected => kind.phase(),
    };
    let mut t = ComplexVector::zeros(basis.dim());
    t[basis.index(0, 0, 0)] = alpha;
    t[basis.phi3()] += beta * p;
    Ok(t)
}

/// `|⟨T|ψ⟩|²` or `⟨T|ρ|T⟩`; the target already carries the `|0_M⟩` factor.
pub fn fidelity(state: StateRef<'_>, target: &ComplexVector) -> Result<f64> {
    Ok(state.overlap(target)?.max(0.0))
}

/// Knobs shared by every scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunOptions {
    pub convention: TargetConvention,
    /// Output points per nominal transfer time.
    pub points_per_transfer: usize,
    /// Pins the substep length (internal time units).
    pub dt_max: Option<f64>,
    /// Multiplies the default substep length.
    pub dt_scale: f64,
    /// Sweep worker threads; `None` uses every core.
    pub workers: Option<usize>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            convention: TargetConvention::PhaseCorrected,
            points_per_transfer: 200,
            dt_max: None,
            dt_scale: 1.0,
            workers: None,
        }
    }
}

impl RunOptions {
    pub fn validate(&self) -> Result<()> {
        if self.points_per_transfer < 2 {
            return Err(Error::config(
                "numerics.points_per_transfer",
                "must be at least 2",
            ));
        }
        if !(self.dt_scale.is_finite() && self.dt_scale > 0.0) {
            return Err(Error::config("numerics.dt_scale", "must be positive"));
        }
        if let Some(dt) = self.dt_max {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(Error::config("numerics.dt_max", "must be positive"));
            }
        }
        if self.workers == Some(0) {
            return Err(Error::config("workers", "must be at least 1"));
        }
        Ok(())
    }

    /// Substep for `h` over `[t0, t1]`, scaled by `factor`.
    pub(crate) fn dt_for(&self, h: &dyn Hamiltonian, t0: f64, t1: f64, factor: f64) -> Result<f64> {
        if let Some(dt) = self.dt_max {
            return Ok(dt * factor);
        }
        let omega = fastest_frequency(h, t0, t1)?;
        let base = default_dt_max(omega).unwrap_or(t1 - t0);
        Ok(base * self.dt_scale * factor)
    }

    pub(crate) fn grid(
        &self,
        h: &dyn Hamiltonian,
        t0: f64,
        t1: f64,
        transfers: f64,
        factor: f64,
    ) -> Result<TimeGrid> {
        let n = (transfers * self.points_per_transfer as f64).round() as usize + 1;
        TimeGrid::new(t0, t1, n.max(2), self.dt_for(h, t0, t1, factor)?)
    }
}

/// Storage protocol of the three-body circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    /// All three units on resonance, `J_t = g`.
    Resonant,
    /// C and the ensemble detuned from M by the same amount.
    Dispersive,
}

impl Protocol {
    /// Resonant when C, M and the ensemble share one frequency.
    pub fn detect(cfg: &SystemConfig) -> Self {
        let w = cfg.qubit_m.omega;
        if cfg.qubit_c.omega == w && cfg.nve.omega_nv == w {
            Self::Resonant
        } else {
            Self::Dispersive
        }
    }

    pub fn kind(self) -> TransferKind {
        match self {
            Self::Resonant => TransferKind::Resonant,
            Self::Dispersive => TransferKind::Dispersive,
        }
    }

    /// Frame in which fidelities are read: the bare ensemble frequency for
    /// resonant runs, the ensemble frequency dressed by M,
    /// `ω_NV + g²/(ω_NV − ω_M)`, for dispersive runs.
    pub fn frame(self, cfg: &SystemConfig) -> Result<f64> {
        match self {
            Self::Resonant => Ok(cfg.nve.omega_nv),
            Self::Dispersive => {
                let d = cfg.nve.omega_nv - cfg.qubit_m.omega;
                if d == 0.0 {
                    return Err(Error::InvalidParameter(
                        "zero detuning: dispersive regime undefined".into(),
                    ));
                }
                Ok(cfg.nve.omega_nv + cfg.nve.g * cfg.nve.g / d)
            }
        }
    }

    /// First complete transfer: `π/(√2 g)` or `π/(2Λ)`.
    pub fn transfer_time(self, cfg: &SystemConfig) -> Result<f64> {
        match self {
            Self::Resonant => resonant_transfer_time(cfg.nve.g, 0),
            Self::Dispersive => dispersive_transfer_time(lambda_of(cfg)?, 0),
        }
    }
}

/// `Λ` of a configuration, detunings read as ω_j − ω_M.
pub fn lambda_of(cfg: &SystemConfig) -> Result<f64> {
    let (dc, dnv) = dispersive_detunings(cfg);
    effective_lambda(cfg.nve.g, cfg.j_t, dnv, dc)
}

/// Puts C and the ensemble at `ω_M + detuning`.
pub fn dispersive_config(base: &SystemConfig, detuning: f64) -> SystemConfig {
    let mut cfg = base.clone();
    cfg.qubit_c.omega = cfg.qubit_m.omega + detuning;
    cfg.nve.omega_nv = cfg.qubit_m.omega + detuning;
    cfg
}

/// Pure-state run of a configuration over `[0, transfers·t*]`, fidelity and
/// populations filled in.
pub fn simulate(
    cfg: &SystemConfig,
    protocol: Protocol,
    transfers: f64,
    opts: &RunOptions,
) -> Result<Trajectory> {
    let (h, psi0, target, t_end) = setup(cfg, protocol, transfers, opts)?;
    let grid = opts.grid(&h, 0.0, t_end, transfers, 1.0)?;
    evolve_pure(&h, &psi0, &grid)?
        .with_fidelity(&target)?
        .with_populations(&cfg.basis())
}

/// Lindblad counterpart of [`simulate`] with the configuration's decay rates.
pub fn simulate_open(
    cfg: &SystemConfig,
    protocol: Protocol,
    transfers: f64,
    opts: &RunOptions,
) -> Result<Trajectory> {
    let (h, psi0, target, t_end) = setup(cfg, protocol, transfers, opts)?;
    let grid = opts.grid(&h, 0.0, t_end, transfers, LINDBLAD_DT_FACTOR)?;
    let ops = collapse_operators(cfg)?;
    evolve_lindblad(&h, &ops, &psi0.projector(), &grid)?
        .with_fidelity(&target)?
        .with_populations(&cfg.basis())
}

fn setup<'a>(
    cfg: &'a SystemConfig,
    protocol: Protocol,
    transfers: f64,
    opts: &RunOptions,
) -> Result<(ConfigHamiltonian<'a>, ComplexVector, ComplexVector, f64)> {
    cfg.validate()?;
    opts.validate()?;
    if !(transfers > 0.0) {
        return Err(Error::InvalidParameter("window must be positive".into()));
    }
    let basis = cfg.basis();
    let h = ConfigHamiltonian::new(cfg, protocol.frame(cfg)?);
    let psi0 = initial_state(cfg.alpha, cfg.beta, &basis)?;
    let target = target_state(cfg.alpha, cfg.beta, opts.convention, protocol.kind(), &basis)?;
    Ok((h, psi0, target, transfers * protocol.transfer_time(cfg)?))
}

/// A fidelity maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub t: f64,
    pub fidelity: f64,
}

/// Grid maximum of `f` over `times`, polished by golden-section search
/// between the neighbouring grid points. `f` must be cheap and exact.
pub fn refine_peak(f: impl Fn(f64) -> f64, times: &[f64]) -> Peak {
    refine(&f, None, times)
}

/// As [`refine_peak`], but an interior maximum is located by bisecting the
/// sign change of the exact derivative `df`, which resolves the peak time to
/// rounding error rather than to the square root of it.
pub fn refine_peak_with_slope(f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64, times: &[f64]) -> Peak {
    refine(&f, Some(&df), times)
}

fn refine(f: &dyn Fn(f64) -> f64, df: Option<&dyn Fn(f64) -> f64>, times: &[f64]) -> Peak {
    let values: Vec<f64> = times.iter().map(|&t| f(t)).collect();
    let mut k = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[k] {
            k = i;
        }
    }
    let lo = times[k.saturating_sub(1)];
    let hi = times[(k + 1).min(times.len() - 1)];
    let mut best = Peak {
        t: times[k],
        fidelity: values[k],
    };
    if hi <= lo {
        return best;
    }
    if let Some(df) = df {
        if let Some(t) = slope_root(df, lo, times[k], hi) {
            let v = f(t);
            if v >= best.fidelity - 1e-14 {
                return Peak {
                    t,
                    fidelity: v.max(best.fidelity),
                };
            }
        }
    }
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    for (t, v) in [(c, fc), (d, fd)] {
        if v > best.fidelity {
            best = Peak { t, fidelity: v };
        }
    }
    best
}

/// A point in `[lo, hi]` where `df` falls from positive to non-positive.
fn slope_root(df: &dyn Fn(f64) -> f64, lo: f64, mid: f64, hi: f64) -> Option<f64> {
    let (mut a, mut b) = if df(mid) > 0.0 { (mid, hi) } else { (lo, mid) };
    if !(df(a) > 0.0) || df(b) > 0.0 {
        return None;
    }
    while b - a > 0.0 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if df(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

/// Uniform sample times over `[t0, t1]`.
pub(crate) fn linspace(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| {
            if k + 1 == n {
                t1
            } else {
                t0 + (t1 - t0) * k as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// `3π/(2Λ)`, the window of the dispersive scans.
pub fn dispersive_window(lambda: f64) -> Result<f64> {
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(Error::InvalidParameter(
            "dispersive window degenerate for Λ = 0".into(),
        ));
    }
    Ok(3.0 * PI / (2.0 * lambda.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn targets() {
        let basis = Basis::new(2);
        let (a, b) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        for conv in [TargetConvention::PaperLiteral, TargetConvention::PhaseCorrected] {
            let t = target_state(a, b, conv, TransferKind::Resonant, &basis).unwrap();
            assert_eq!(t, basis.ket(0, 0, 0));
        }
        let a = C64::new(1.0 / 3f64.sqrt(), 0.0);
        let b = C64::new((2.0f64 / 3.0).sqrt(), 0.0);
        let lit = target_state(
            a,
            b,
            TargetConvention::PaperLiteral,
            TransferKind::Resonant,
            &basis,
        )
        .unwrap();
        assert_eq!(lit[0], a);
        assert_eq!(lit[basis.phi3()], b);
        let cor = target_state(
            a,
            b,
            TargetConvention::PhaseCorrected,
            TransferKind::Resonant,
            &basis,
        )
        .unwrap();
        assert_eq!(cor[basis.phi3()], -b);
        let dis = target_state(
            a,
            b,
            TargetConvention::PhaseCorrected,
            TransferKind::Dispersive,
            &basis,
        )
        .unwrap();
        assert_eq!(dis[basis.phi3()], b * C64::new(0.0, -1.0));
        assert!(target_state(
            b,
            b,
            TargetConvention::PaperLiteral,
            TransferKind::Resonant,
            &basis
        )
        .is_err());
    }

    #[test]
    fn fidelity_examples() {
        let basis = Basis::new(2);
        let a = C64::new(1.0 / 3f64.sqrt(), 0.0);
        let b = C64::new((2.0f64 / 3.0).sqrt(), 0.0);
        let target = target_state(
            a,
            b,
            TargetConvention::PhaseCorrected,
            TransferKind::Resonant,
            &basis,
        )
        .unwrap();
        assert!((fidelity(StateRef::Pure(&target), &target).unwrap() - 1.0).abs() < 1e-15);
        let psi0 = initial_state(a, b, &basis).unwrap();
        assert!((fidelity(StateRef::Pure(&psi0), &target).unwrap() - 1.0 / 9.0).abs() < 1e-15);
        let orth = basis.ket(0, 1, 0);
        assert_eq!(fidelity(StateRef::Pure(&orth), &target).unwrap(), 0.0);
        let rho = psi0.projector();
        assert!((fidelity(StateRef::Mixed(&rho), &target).unwrap() - 1.0 / 9.0).abs() < 1e-15);
        assert!(fidelity(StateRef::Pure(&ComplexVector::basis(4, 0)), &target).is_err());
    }

    #[test]
    fn convention_parsing() {
        assert_eq!(
            "paper-literal".parse::<TargetConvention>().unwrap(),
            TargetConvention::PaperLiteral
        );
        assert!("other".parse::<TargetConvention>().is_err());
        assert_eq!(TargetConvention::default().to_string(), "phase-corrected");
    }

    #[test]
    fn protocol_frames() {
        let cfg = SystemConfig::ideal(100.0, 1.0, 1.0);
        assert_eq!(Protocol::detect(&cfg), Protocol::Resonant);
        assert_eq!(Protocol::Resonant.frame(&cfg).unwrap(), 100.0);
        assert!(Protocol::Dispersive.frame(&cfg).is_err());
        let d = dispersive_config(&cfg, 10.0);
        assert_eq!(Protocol::detect(&d), Protocol::Dispersive);
        assert!((Protocol::Dispersive.frame(&d).unwrap() - 110.1).abs() < 1e-12);
        assert!((lambda_of(&d).unwrap() - 0.1).abs() < 1e-15);
        assert!((Protocol::Dispersive.transfer_time(&d).unwrap() - 5.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn golden_refinement_finds_smooth_peak() {
        let f = |t: f64| 1.0 - (t - 0.123_456).powi(2);
        let times = linspace(0.0, 1.0, 11);
        let p = refine_peak(f, &times);
        assert!((p.t - 0.123_456).abs() < 1e-7);
        assert!(p.fidelity >= f(0.1));
    }

    #[test]
    fn slope_refinement_resolves_peak_to_rounding() {
        let f = |t: f64| 1.0 - (t - 0.123_456).powi(2);
        let df = |t: f64| -2.0 * (t - 0.123_456);
        let p = refine_peak_with_slope(f, df, &linspace(0.0, 1.0, 11));
        assert!((p.t - 0.123_456).abs() < 1e-15);
        let edge = refine_peak_with_slope(|t| t, |_| 1.0, &linspace(0.0, 1.0, 11));
        assert_eq!(edge.t, 1.0);
    }

    #[test]
    fn resonant_simulation_reaches_unit_fidelity() {
        let cfg = SystemConfig::ideal(10.0, 1.0, 1.0);
        let tr = simulate(&cfg, Protocol::Resonant, 1.0, &RunOptions::default()).unwrap();
        let last = tr.records.last().unwrap();
        assert!((last.fidelity.unwrap() - 1.0).abs() < 1e-12);
        assert!((tr.records[0].fidelity.unwrap() - 1.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn open_simulation_without_decay_matches_pure() {
        let cfg = SystemConfig::ideal(10.0, 1.0, 1.0);
        let opts = RunOptions {
            points_per_transfer: 20,
            ..RunOptions::default()
        };
        let p = simulate(&cfg, Protocol::Resonant, 1.0, &opts).unwrap();
        let m = simulate_open(&cfg, Protocol::Resonant, 1.0, &opts).unwrap();
        for (a, b) in p.records.iter().zip(&m.records) {
            assert!((a.fidelity.unwrap() - b.fidelity.unwrap()).abs() < 1e-8);
        }
    }
}
