//! Scalar physics: NV transition frequency, wire field, drive Rabi
//! frequencies and the dispersive exchange rate. All SI in, rad/s out,
//! unless noted.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::params::DriveParams;

/// Vacuum permeability, T·m/A.
pub const MU_0: f64 = 4.0 * PI * 1e-7;
/// Bohr magneton, J/T.
pub const MU_B: f64 = 9.274e-24;
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.0546e-34;
pub const DEFAULT_G_FACTOR: f64 = 2.0;
/// NV ground-state zero-field splitting D/2π in Hz.
pub const NV_ZERO_FIELD_SPLITTING_HZ: f64 = 2.88e9;

/// `ω_NV = D − g_e·μ_B·B_z/ħ` for the {m_s = 0, m_s = −1} pair.
///
/// `zero_field_d` in rad/s. A non-positive gap means the −1 level has
/// crossed the 0 level and the two-level reduction no longer holds.
pub fn nv_transition_frequency(zero_field_d: f64, g_factor: f64, b_z: f64) -> Result<f64> {
    let omega = zero_field_d - g_factor * MU_B * b_z / HBAR;
    if !(omega > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "NV transition frequency {omega:e} rad/s is not positive; two-level reduction invalid"
        )));
    }
    Ok(omega)
}

/// Field of a long straight wire, `B = μ₀ I / (2π d)`.
pub fn field_at_distance(current: f64, distance: f64) -> Result<f64> {
    if !(distance > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "distance must be positive, got {distance}"
        )));
    }
    Ok(MU_0 * current / (2.0 * PI * distance))
}

/// Drive Rabi frequency on the computing qubit,
/// `Ω_C = μ₀ L² I_C I_e / (2π ħ d_C)`.
pub fn rabi_frequency_qubit(p: &DriveParams) -> f64 {
    let area = p.loop_side * p.loop_side;
    MU_0 * area * p.persistent_current * p.i_ext / (2.0 * PI * HBAR * p.d_c)
}

/// Leakage Rabi frequency on the ensemble,
/// `Ω_NV = √N · g_e μ_B μ₀ I_e / (2 ħ π d_N)`.
pub fn rabi_frequency_nve(p: &DriveParams, n_spins: f64, g_factor: f64) -> f64 {
    n_spins.sqrt() * g_factor * MU_B * MU_0 * p.i_ext / (2.0 * HBAR * PI * p.d_n)
}

/// Dispersive exchange rate `Λ = (g J_t / 2)(1/Δ_NV + 1/Δ_C)`.
pub fn effective_lambda(g: f64, j_t: f64, delta_nv: f64, delta_c: f64) -> Result<f64> {
    if delta_nv == 0.0 || delta_c == 0.0 {
        return Err(Error::InvalidParameter(
            "zero detuning: dispersive regime undefined".into(),
        ));
    }
    Ok(0.5 * g * j_t * (1.0 / delta_nv + 1.0 / delta_c))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_PI_MHZ: f64 = 2.0 * PI * 1e6;

    fn fig7_drive() -> DriveParams {
        DriveParams {
            i_ext: 700e-9,
            d_c: 1.2e-6,
            d_n: 8e-6,
            loop_side: 2e-6,
            persistent_current: 60e-9,
            drive_frequency: None,
            omega_c_override: None,
        }
    }

    #[test]
    fn zero_field_gives_d() {
        let d = 2.0 * PI * NV_ZERO_FIELD_SPLITTING_HZ;
        assert_eq!(nv_transition_frequency(d, 2.0, 0.0).unwrap(), d);
    }

    #[test]
    fn zeeman_shift_at_ten_millitesla() {
        // 2 · 9.274e-24 · 0.01 / 1.0546e-34 = 1.75877...e9 rad/s ≈ 2π · 279.92 MHz
        let d = 2.0 * PI * NV_ZERO_FIELD_SPLITTING_HZ;
        let shift = 2.0 * MU_B * 0.01 / HBAR;
        assert!((shift - 1.758771102e9).abs() < 1e3);
        let w = nv_transition_frequency(d, 2.0, 0.01).unwrap();
        assert!((w / TWO_PI_MHZ - 2600.08).abs() < 0.01, "{}", w / TWO_PI_MHZ);
    }

    #[test]
    fn gap_closing_field_rejected() {
        let d = 2.0 * PI * NV_ZERO_FIELD_SPLITTING_HZ;
        let b = d * HBAR / (2.0 * MU_B);
        assert!(nv_transition_frequency(d, 2.0, b).is_err());
        assert!(nv_transition_frequency(d, 2.0, 2.0 * b).is_err());
    }

    #[test]
    fn wire_field() {
        assert_eq!(field_at_distance(0.0, 1e-6).unwrap(), 0.0);
        let b1 = field_at_distance(700e-9, 1.2e-6).unwrap();
        assert!((b1 - 1.1667e-7).abs() < 1e-10, "{b1}");
        let b2 = field_at_distance(700e-9, 8e-6).unwrap();
        assert!((b2 - 1.75e-8).abs() < 1e-12, "{b2}");
        assert!(field_at_distance(1.0, 0.0).is_err());
        assert!(field_at_distance(1.0, -1.0).is_err());
    }

    #[test]
    fn qubit_rabi_frequency() {
        let p = fig7_drive();
        let w = rabi_frequency_qubit(&p);
        assert!((w - 2.655e8).abs() / 2.655e8 < 1e-3, "{w}");
        assert!((w / TWO_PI_MHZ - 42.26).abs() < 0.05);
        let far = DriveParams {
            d_c: 2.4e-6,
            ..p.clone()
        };
        assert!((rabi_frequency_qubit(&far) - w / 2.0).abs() < 1e-6);
        let off = DriveParams { i_ext: 0.0, ..p };
        assert_eq!(rabi_frequency_qubit(&off), 0.0);
    }

    #[test]
    fn nve_rabi_frequency() {
        let p = fig7_drive();
        let w = rabi_frequency_nve(&p, 1e6, 2.0);
        assert!((w - 3.078e6).abs() / 3.078e6 < 1e-3, "{w}");
        assert!((w / TWO_PI_MHZ - 0.49).abs() < 0.01);
        let r = rabi_frequency_nve(&p, 4.0, 2.0) / rabi_frequency_nve(&p, 1.0, 2.0);
        assert!((r - 2.0).abs() < 1e-15);
        let far = DriveParams { d_n: 1e4, ..p };
        assert!(rabi_frequency_nve(&far, 1e6, 2.0) < 10.0);
    }

    #[test]
    fn lambda_values() {
        assert!((effective_lambda(1.0, 1.0, 10.0, 10.0).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(effective_lambda(0.0, 1.0, 10.0, 10.0).unwrap(), 0.0);
        assert!((effective_lambda(1.0, 1.0, 10.0, 20.0).unwrap() - 0.075).abs() < 1e-15);
        assert!(effective_lambda(1.0, 1.0, 0.0, 10.0).is_err());
        assert!(effective_lambda(1.0, 1.0, 10.0, 0.0).is_err());
    }
}
