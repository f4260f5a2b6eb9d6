use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::model::basis::Basis;
use crate::model::formulas::{
    nv_transition_frequency, rabi_frequency_nve, rabi_frequency_qubit, DEFAULT_G_FACTOR,
};
use crate::model::schedule::Schedule;
use crate::model::units::UnitSystem;

/// A flux qubit at its degeneracy point, where the splitting equals the
/// tunnelling energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxQubitParams {
    pub omega: f64,
    /// Energy relaxation rate γ_j entering the master equation.
    pub decay_rate: f64,
}

impl FluxQubitParams {
    pub fn new(omega: f64) -> Self {
        Self {
            omega,
            decay_rate: 0.0,
        }
    }
}

/// The NV ensemble as a single bosonic mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NveParams {
    pub omega_nv: f64,
    /// Collective coupling to qubit M (already √N-enhanced).
    pub g: f64,
    pub n_spins: f64,
    pub fock_cutoff: usize,
    /// Zero-field splitting D, internal units. Optional; only used to
    /// cross-check `omega_nv`.
    pub zero_field_d: Option<f64>,
    pub g_factor: f64,
    /// Axial bias field, tesla.
    pub b_ext_z: Option<f64>,
}

impl NveParams {
    pub fn new(omega_nv: f64, g: f64) -> Self {
        Self {
            omega_nv,
            g,
            n_spins: 1.0e6,
            fock_cutoff: 2,
            zero_field_d: None,
            g_factor: DEFAULT_G_FACTOR,
            b_ext_z: None,
        }
    }
}

/// Geometry of the control line and the computing-qubit loop. Lengths in
/// metres, currents in amperes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveParams {
    pub i_ext: f64,
    pub d_c: f64,
    pub d_n: f64,
    pub loop_side: f64,
    pub persistent_current: f64,
    /// Internal units. When given it must match ω_C.
    pub drive_frequency: Option<f64>,
    /// Pins Ω_C (internal units) instead of evaluating the loop formula.
    pub omega_c_override: Option<f64>,
}

impl DriveParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("i_ext", self.i_ext),
            ("d_c", self.d_c),
            ("d_n", self.d_n),
            ("loop_side", self.loop_side),
            ("persistent_current", self.persistent_current),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(
                    format!("drive.{name}"),
                    format!("must be positive, got {v}"),
                ));
            }
        }
        if let Some(w) = self.omega_c_override {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::config("drive.omega_c_override", "must be non-negative"));
            }
        }
        Ok(())
    }

    /// Ω_C in internal units: the override when present, the loop formula otherwise.
    pub fn omega_c(&self, unit: &UnitSystem) -> f64 {
        self.omega_c_override
            .unwrap_or_else(|| unit.from_angular(rabi_frequency_qubit(self)))
    }

    /// Ω_C from the loop formula regardless of any override.
    pub fn omega_c_formula(&self, unit: &UnitSystem) -> f64 {
        unit.from_angular(rabi_frequency_qubit(self))
    }

    pub fn omega_nv(&self, unit: &UnitSystem, n_spins: f64, g_factor: f64) -> f64 {
        unit.from_angular(rabi_frequency_nve(self, n_spins, g_factor))
    }
}

/// Every physical parameter of the C ⊗ M ⊗ NVE circuit, in internal units
/// (see [`UnitSystem`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub unit: UnitSystem,
    pub qubit_c: FluxQubitParams,
    pub qubit_m: FluxQubitParams,
    pub nve: NveParams,
    pub j_t: f64,
    pub drive: Option<DriveParams>,
    pub schedule: Option<Schedule>,
    pub alpha: C64,
    pub beta: C64,
}

impl SystemConfig {
    /// All three units on resonance at `omega`, γ-scaled, storing
    /// α = 1/√3, β = √(2/3).
    pub fn ideal(omega: f64, g: f64, j_t: f64) -> Self {
        Self {
            unit: UnitSystem::default(),
            qubit_c: FluxQubitParams::new(omega),
            qubit_m: FluxQubitParams::new(omega),
            nve: NveParams::new(omega, g),
            j_t,
            drive: None,
            schedule: None,
            alpha: C64::new(1.0 / 3f64.sqrt(), 0.0),
            beta: C64::new((2.0f64 / 3.0).sqrt(), 0.0),
        }
    }

    pub fn basis(&self) -> Basis {
        Basis::new(self.nve.fock_cutoff)
    }

    pub fn dim(&self) -> usize {
        4 * self.nve.fock_cutoff
    }

    /// Δ_C = ω_M − ω_C (static ω_M).
    pub fn delta_c(&self) -> f64 {
        self.qubit_m.omega - self.qubit_c.omega
    }

    /// Δ_NV = ω_M − ω_NV (static ω_M).
    pub fn delta_nv(&self) -> f64 {
        self.qubit_m.omega - self.nve.omega_nv
    }

    /// λ = (J_t − g)/J_t.
    pub fn mismatch(&self) -> f64 {
        (self.j_t - self.nve.g) / self.j_t
    }

    pub fn omega_m_at(&self, t: f64) -> Result<f64> {
        match &self.schedule {
            Some(s) => Ok(s.omega_m_at(t)?.unwrap_or(self.qubit_m.omega)),
            None => check_time(t).map(|_| self.qubit_m.omega),
        }
    }

    pub fn j_t_at(&self, t: f64) -> Result<f64> {
        match &self.schedule {
            Some(s) => Ok(s.j_t_at(t)?.unwrap_or(self.j_t)),
            None => check_time(t).map(|_| self.j_t),
        }
    }

    /// True when nothing in the Hamiltonian depends on time.
    pub fn is_static(&self) -> bool {
        self.schedule.as_ref().is_none_or(|s| s.is_static())
    }

    pub fn validate(&self) -> Result<()> {
        positive("qubit_c.omega", self.qubit_c.omega)?;
        positive("qubit_m.omega", self.qubit_m.omega)?;
        positive("nve.omega_nv", self.nve.omega_nv)?;
        non_negative("qubit_c.decay_rate", self.qubit_c.decay_rate)?;
        non_negative("qubit_m.decay_rate", self.qubit_m.decay_rate)?;
        non_negative("nve.g", self.nve.g)?;
        finite("j_t", self.j_t)?;
        if self.nve.fock_cutoff < 2 {
            return Err(Error::config(
                "nve.fock_cutoff",
                format!("must be at least 2, got {}", self.nve.fock_cutoff),
            ));
        }
        if !(self.nve.n_spins >= 1.0 && self.nve.n_spins.fract() == 0.0) {
            return Err(Error::config(
                "nve.n_spins",
                format!("must be a positive integer count, got {}", self.nve.n_spins),
            ));
        }
        positive("nve.g_factor", self.nve.g_factor)?;
        if let (Some(d), Some(b)) = (self.nve.zero_field_d, self.nve.b_ext_z) {
            let expected = nv_transition_frequency(self.unit.to_angular(d), self.nve.g_factor, b)
                .map_err(|e| Error::config("nve.b_ext_z", e.to_string()))?;
            let expected = self.unit.from_angular(expected);
            if ((self.nve.omega_nv - expected) / expected).abs() > 1e-9 {
                return Err(Error::config(
                    "nve.omega_nv",
                    format!(
                        "inconsistent with D and B_z: expected {expected}, got {}",
                        self.nve.omega_nv
                    ),
                ));
            }
        }
        let norm = self.alpha.norm_sqr() + self.beta.norm_sqr();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::config(
                "initial",
                format!("|α|² + |β|² = {norm}, expected 1"),
            ));
        }
        if let Some(d) = &self.drive {
            d.validate()?;
            if let Some(wd) = d.drive_frequency {
                if ((wd - self.qubit_c.omega) / self.qubit_c.omega).abs() > 1e-9 {
                    return Err(Error::config(
                        "drive.drive_frequency",
                        "drive must be resonant with qubit C",
                    ));
                }
            }
        }
        if let Some(s) = &self.schedule {
            s.validate()?;
        }
        Ok(())
    }

    /// Places M at `omega_m`, C at ω_M − Δ_C and the ensemble at ω_M − Δ_NV.
    pub fn with_detunings(mut self, delta_c: f64, delta_nv: f64) -> Self {
        self.qubit_c.omega = self.qubit_m.omega - delta_c;
        self.nve.omega_nv = self.qubit_m.omega - delta_nv;
        self
    }

    pub fn with_initial(mut self, alpha: C64, beta: C64) -> Self {
        self.alpha = alpha;
        self.beta = beta;
        self
    }

    pub fn with_fock_cutoff(mut self, n: usize) -> Self {
        self.nve.fock_cutoff = n;
        self
    }

    pub fn with_decay(mut self, gamma_c: f64, gamma_m: f64) -> Self {
        self.qubit_c.decay_rate = gamma_c;
        self.qubit_m.decay_rate = gamma_m;
        self
    }
}

pub(crate) fn check_time(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "time {t} is outside the schedule domain [0, ∞)"
        )));
    }
    Ok(())
}

fn positive(path: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::config(path, format!("must be positive, got {v}")));
    }
    Ok(())
}

fn non_negative(path: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v >= 0.0) {
        return Err(Error::config(path, format!("must be non-negative, got {v}")));
    }
    Ok(())
}

fn finite(path: &str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::config(path, "must be finite"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ideal_config_is_valid() {
        let cfg = SystemConfig::ideal(100.0, 1.0, 1.0);
        cfg.validate().unwrap();
        assert_eq!(cfg.dim(), 8);
        assert_eq!(cfg.delta_c(), 0.0);
        assert_eq!(cfg.mismatch(), 0.0);
    }

    #[test]
    fn fock_cutoff_one_rejected() {
        let cfg = SystemConfig::ideal(100.0, 1.0, 1.0).with_fock_cutoff(1);
        let err = cfg.validate().unwrap_err();
        assert!(matches!(err, Error::Config { ref path, .. } if path == "nve.fock_cutoff"));
    }

    #[test]
    fn unnormalized_initial_rejected() {
        let cfg = SystemConfig::ideal(100.0, 1.0, 1.0).with_initial(C64::new(1.0, 0.0), C64::new(1.0, 0.0));
        assert!(matches!(cfg.validate(), Err(Error::Config { ref path, .. }) if path == "initial"));
    }

    #[test]
    fn detunings_follow_definition() {
        let cfg = SystemConfig::ideal(100.0, 1.0, 1.0).with_detunings(0.5, -0.25);
        assert!((cfg.delta_c() - 0.5).abs() < 1e-12);
        assert!((cfg.delta_nv() + 0.25).abs() < 1e-12);
    }

    #[test]
    fn nv_frequency_cross_check() {
        let unit = UnitSystem::si();
        let mut cfg = SystemConfig::ideal(2880.0, 35.0, 35.0);
        cfg.unit = unit;
        cfg.nve.zero_field_d = Some(2880.0);
        cfg.nve.b_ext_z = Some(0.0);
        cfg.validate().unwrap();
        cfg.nve.b_ext_z = Some(0.01);
        assert!(cfg.validate().is_err());
        cfg.nve.omega_nv =
            2880.0 - 2.0 * crate::model::formulas::MU_B * 0.01 / crate::model::formulas::HBAR / unit.gamma;
        cfg.validate().unwrap();
    }
}
