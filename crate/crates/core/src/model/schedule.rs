//! Piecewise time dependence of ω_M(t), J_t(t) and the drive window.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::params::check_time;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RampShape {
    #[default]
    Linear,
    /// Half-cosine: zero slope at both ends.
    Cosine,
}

/// ω_M moves from `start` to `target` over `[0, duration]` and stays there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OmegaRamp {
    pub start: f64,
    pub target: f64,
    pub duration: f64,
    #[serde(default)]
    pub shape: RampShape,
}

impl OmegaRamp {
    pub fn at(&self, t: f64) -> f64 {
        if self.duration <= 0.0 || t >= self.duration {
            return self.target;
        }
        let s = (t / self.duration).clamp(0.0, 1.0);
        let f = match self.shape {
            RampShape::Linear => s,
            RampShape::Cosine => 0.5 * (1.0 - (PI * s).cos()),
        };
        self.start + (self.target - self.start) * f
    }
}

/// J_t takes `value` from `start` until the next segment begins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSegment {
    pub start: f64,
    pub value: f64,
}

/// Resonant drive switched on over `[start, stop)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveWindow {
    pub start: f64,
    pub stop: f64,
    pub omega_c: f64,
    pub omega_nv: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    pub omega_m: Option<OmegaRamp>,
    #[serde(default)]
    pub j_t: Vec<CouplingSegment>,
    pub drive: Option<DriveWindow>,
}

impl Schedule {
    pub fn ramp(start: f64, target: f64, duration: f64, shape: RampShape) -> Self {
        Self {
            omega_m: Some(OmegaRamp {
                start,
                target,
                duration,
                shape,
            }),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(r) = &self.omega_m {
            if !(r.duration.is_finite() && r.duration >= 0.0) {
                return Err(Error::config(
                    "schedule.omega_m.duration",
                    format!("ramp time must be non-negative, got {}", r.duration),
                ));
            }
            if !(r.start.is_finite() && r.target.is_finite() && r.start > 0.0 && r.target > 0.0) {
                return Err(Error::config(
                    "schedule.omega_m",
                    "ramp endpoints must be positive frequencies",
                ));
            }
        }
        if let Some(first) = self.j_t.first() {
            if first.start != 0.0 {
                return Err(Error::config(
                    "schedule.j_t[0].start",
                    "first coupling segment must start at t = 0",
                ));
            }
        }
        for (k, w) in self.j_t.windows(2).enumerate() {
            if !(w[1].start > w[0].start) {
                return Err(Error::config(
                    format!("schedule.j_t[{}].start", k + 1),
                    "segment boundaries must be strictly increasing",
                ));
            }
        }
        if self
            .j_t
            .iter()
            .any(|s| !s.value.is_finite() || !s.start.is_finite())
        {
            return Err(Error::config("schedule.j_t", "non-finite segment"));
        }
        if let Some(d) = &self.drive {
            if !(d.start >= 0.0 && d.stop > d.start) {
                return Err(Error::config(
                    "schedule.drive",
                    "drive window needs 0 <= start < stop",
                ));
            }
        }
        Ok(())
    }

    pub fn omega_m_at(&self, t: f64) -> Result<Option<f64>> {
        check_time(t)?;
        Ok(self.omega_m.map(|r| r.at(t)))
    }

    pub fn j_t_at(&self, t: f64) -> Result<Option<f64>> {
        check_time(t)?;
        Ok(self.j_t.iter().rev().find(|s| s.start <= t).map(|s| s.value))
    }

    /// (Ω_C, Ω_NV) when the drive is on at `t`.
    pub fn drive_at(&self, t: f64) -> Option<(f64, f64)> {
        self.drive
            .filter(|d| t >= d.start && t < d.stop)
            .map(|d| (d.omega_c, d.omega_nv))
    }

    /// Times where the Hamiltonian changes non-smoothly.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts = Vec::new();
        if let Some(r) = &self.omega_m {
            if r.duration > 0.0 {
                pts.push(r.duration);
            }
        }
        pts.extend(self.j_t.iter().skip(1).map(|s| s.start));
        if let Some(d) = &self.drive {
            pts.push(d.start);
            pts.push(d.stop);
        }
        pts.retain(|&t| t > 0.0);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    pub fn is_static(&self) -> bool {
        let ramp_static = self
            .omega_m
            .is_none_or(|r| r.duration == 0.0 || r.start == r.target);
        ramp_static && self.j_t.len() <= 1 && self.drive.is_none()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_ramp_values() {
        let s = Schedule::ramp(30.0, 10.0, 2.0, RampShape::Linear);
        assert_eq!(s.omega_m_at(0.0).unwrap(), Some(30.0));
        assert_eq!(s.omega_m_at(1.0).unwrap(), Some(20.0));
        assert_eq!(s.omega_m_at(5.0).unwrap(), Some(10.0));
        assert!(s.omega_m_at(-0.1).is_err());
        assert_eq!(s.breakpoints(), vec![2.0]);
    }

    #[test]
    fn cosine_ramp_is_continuous_at_ends() {
        let r = OmegaRamp {
            start: 5.0,
            target: 1.0,
            duration: 1.0,
            shape: RampShape::Cosine,
        };
        assert!((r.at(0.0) - 5.0).abs() < 1e-15);
        assert!((r.at(1.0 - 1e-12) - 1.0).abs() < 1e-9);
        assert!((r.at(0.5) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_duration_ramp_is_a_step() {
        let s = Schedule::ramp(30.0, 10.0, 0.0, RampShape::Linear);
        assert_eq!(s.omega_m_at(0.0).unwrap(), Some(10.0));
        assert!(s.is_static());
    }

    #[test]
    fn coupling_segments() {
        let s = Schedule {
            j_t: vec![
                CouplingSegment {
                    start: 0.0,
                    value: 0.0,
                },
                CouplingSegment {
                    start: 1.0,
                    value: 2.0,
                },
            ],
            ..Schedule::default()
        };
        s.validate().unwrap();
        assert_eq!(s.j_t_at(0.5).unwrap(), Some(0.0));
        assert_eq!(s.j_t_at(1.0).unwrap(), Some(2.0));
        assert!(!s.is_static());
        let bad = Schedule {
            j_t: vec![
                CouplingSegment {
                    start: 0.0,
                    value: 0.0,
                },
                CouplingSegment {
                    start: 0.0,
                    value: 2.0,
                },
            ],
            ..Schedule::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn negative_ramp_time_rejected() {
        let s = Schedule::ramp(30.0, 10.0, -1.0, RampShape::Linear);
        assert!(s.validate().is_err());
    }

    #[test]
    fn drive_window_is_half_open() {
        let s = Schedule {
            drive: Some(DriveWindow {
                start: 0.0,
                stop: 1.0,
                omega_c: 3.0,
                omega_nv: 0.1,
            }),
            ..Schedule::default()
        };
        assert_eq!(s.drive_at(0.0), Some((3.0, 0.1)));
        assert_eq!(s.drive_at(1.0), None);
    }
}
