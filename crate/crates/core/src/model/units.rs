use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How configuration values are entered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnitMode {
    /// Frequencies in units of γ, times in units of 1/γ.
    DimensionlessGamma,
    /// Frequencies in MHz (ordinary frequency, converted to angular), times in seconds.
    #[serde(alias = "si")]
    SiAngular,
}

/// Unit bookkeeping.
///
/// Internally every frequency is an angular frequency divided by `gamma`
/// and every time is multiplied by it, whatever the input mode. In
/// `DimensionlessGamma` mode inputs are already γ-scaled; in `SiAngular` mode `gamma` is only a numerical scale, 2π·1 MHz
/// by default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    pub mode: UnitMode,
    /// Reference angular frequency in rad/s.
    pub gamma: f64,
}

pub const DEFAULT_SI_SCALE: f64 = 2.0 * PI * 1.0e6;

impl UnitSystem {
    pub fn dimensionless(gamma: f64) -> Result<Self> {
        Self::new(UnitMode::DimensionlessGamma, gamma)
    }

    pub fn si() -> Self {
        Self {
            mode: UnitMode::SiAngular,
            gamma: DEFAULT_SI_SCALE,
        }
    }

    pub fn new(mode: UnitMode, gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "unit scale γ must be positive, got {gamma}"
            )));
        }
        Ok(Self { mode, gamma })
    }

    /// rad/s → internal.
    pub fn from_angular(&self, rad_per_s: f64) -> f64 {
        rad_per_s / self.gamma
    }

    /// internal → rad/s.
    pub fn to_angular(&self, internal: f64) -> f64 {
        internal * self.gamma
    }

    pub fn from_seconds(&self, seconds: f64) -> f64 {
        seconds * self.gamma
    }

    pub fn to_seconds(&self, internal: f64) -> f64 {
        internal / self.gamma
    }

    /// A frequency as written in a config document → internal.
    pub fn frequency_in(&self, value: f64) -> f64 {
        match self.mode {
            UnitMode::DimensionlessGamma => value,
            UnitMode::SiAngular => self.from_angular(2.0 * PI * value * 1.0e6),
        }
    }

    /// Internal frequency → config-document units.
    pub fn frequency_out(&self, internal: f64) -> f64 {
        match self.mode {
            UnitMode::DimensionlessGamma => internal,
            UnitMode::SiAngular => self.to_angular(internal) / (2.0 * PI * 1.0e6),
        }
    }

    /// A time as written in a config document → internal.
    pub fn time_in(&self, value: f64) -> f64 {
        match self.mode {
            UnitMode::DimensionlessGamma => value,
            UnitMode::SiAngular => self.from_seconds(value),
        }
    }

    /// Internal time → config-document units (γt or seconds).
    pub fn time_out(&self, internal: f64) -> f64 {
        match self.mode {
            UnitMode::DimensionlessGamma => internal,
            UnitMode::SiAngular => self.to_seconds(internal),
        }
    }
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self {
            mode: UnitMode::DimensionlessGamma,
            gamma: DEFAULT_SI_SCALE,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn si_round_trip() {
        let u = UnitSystem::si();
        let w = u.frequency_in(35.0);
        assert!((w - 35.0).abs() < 1e-12);
        assert!((u.to_angular(w) - 2.0 * PI * 35e6).abs() < 1e-3);
        assert!((u.time_out(u.time_in(0.45e-9)) - 0.45e-9).abs() < 1e-24);
    }

    #[test]
    fn rejects_nonpositive_scale() {
        assert!(UnitSystem::dimensionless(0.0).is_err());
        assert!(UnitSystem::dimensionless(-1.0).is_err());
    }
}
