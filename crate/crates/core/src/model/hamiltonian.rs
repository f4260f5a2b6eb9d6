//! Hamiltonian and jump-operator builders over C ⊗ M ⊗ NVE.
//!
//! Qubit operators are written in each flux qubit's energy eigenbasis at
//! the degeneracy point, so σ⁺σ⁻ counts the excitation and the qubit
//! frequency equals its tunnelling energy.

use log::warn;

use crate::error::{Error, Result};
use crate::linalg::{kron, ComplexMatrix, C64};
use crate::model::basis::Basis;
use crate::model::formulas::DEFAULT_G_FACTOR;
use crate::model::params::{DriveParams, SystemConfig};
use crate::model::units::UnitSystem;

/// Exchange terms `g(σ⁺_M b + b†σ⁻_M) + J_t(σ⁺_Mσ⁻_C + σ⁺_Cσ⁻_M)`.
fn exchange_terms(basis: &Basis, g: f64, j_t: f64) -> ComplexMatrix {
    let sm_c = basis.sigma_minus_c();
    let sm_m = basis.sigma_minus_m();
    let b = basis.annihilation();
    let mb = &sm_m.dagger() * &b;
    let mc = &sm_m.dagger() * &sm_c;
    let nve_part = (&mb + &mb.dagger()).scale_real(g);
    let qubit_part = (&mc + &mc.dagger()).scale_real(j_t);
    &nve_part + &qubit_part
}

fn free_terms(basis: &Basis, omega_c: f64, omega_m: f64, omega_nv: f64) -> ComplexMatrix {
    basis.diagonal_from(|c, m, n| omega_c * c as f64 + omega_m * m as f64 + omega_nv * n as f64)
}

/// Rotating-wave Hamiltonian in the laboratory frame,
/// `Σ_j ω_j σ⁺_jσ⁻_j + ω_NV b†b + g(σ⁺_M b + b†σ⁻_M) + J_t(σ⁺_Mσ⁻_C + σ⁺_Cσ⁻_M)`,
/// with ω_M and J_t read from the schedule at `t`.
pub fn build_h_rwa(cfg: &SystemConfig, t: f64) -> Result<ComplexMatrix> {
    build_h_frame(cfg, t, 0.0)
}

/// [`build_h_rwa`] in the frame rotating at `omega_ref` for every
/// excitation, i.e. `H_RWA − ω_ref·N̂`, plus the resonant drive terms while
/// the schedule's drive window is open. Frequencies enter as differences,
/// so large absolute frequencies lose no precision.
pub fn build_h_frame(cfg: &SystemConfig, t: f64, omega_ref: f64) -> Result<ComplexMatrix> {
    let basis = cfg.basis();
    let omega_m = cfg.omega_m_at(t)?;
    let j_t = cfg.j_t_at(t)?;
    let free = free_terms(
        &basis,
        cfg.qubit_c.omega - omega_ref,
        omega_m - omega_ref,
        cfg.nve.omega_nv - omega_ref,
    );
    let mut h = &free + &exchange_terms(&basis, cfg.nve.g, j_t);
    if let Some((om_c, om_nv)) = cfg.schedule.as_ref().and_then(|s| s.drive_at(t)) {
        h = &h + &drive_operator(&basis, om_c, om_nv);
    }
    Ok(h)
}

/// Interaction-picture Hamiltonian at exact resonance,
/// `g(b†σ⁻_M + bσ⁺_M) + J_t(σ⁻_Cσ⁺_M + σ⁺_Cσ⁻_M)`.
pub fn build_h_resonant(g: f64, j_t: f64, fock_cutoff: usize) -> ComplexMatrix {
    exchange_terms(&Basis::new(fock_cutoff), g, j_t)
}

/// Effective C–NVE Hamiltonian after eliminating qubit M,
/// `(Δ_NV + g²/Δ_NV) b†b + (Δ_C + J_t²/Δ_C) σ⁺_Cσ⁻_C + Λ(σ⁻_C b† + σ⁺_C b)`,
/// lifted to the full space with the identity on M.
///
/// This holds in the frame rotating at ω_M with the detunings measured as
/// ω_j − ω_M.
pub fn dispersive_hamiltonian(
    g: f64,
    j_t: f64,
    delta_c: f64,
    delta_nv: f64,
    fock_cutoff: usize,
) -> Result<ComplexMatrix> {
    let lambda = crate::model::formulas::effective_lambda(g, j_t, delta_nv, delta_c)?;
    let basis = Basis::new(fock_cutoff);
    let shift_nv = delta_nv + g * g / delta_nv;
    let shift_c = delta_c + j_t * j_t / delta_c;
    let diag = basis.diagonal_from(|c, _, n| shift_c * c as f64 + shift_nv * n as f64);
    let cb = &basis.sigma_minus_c() * &basis.annihilation().dagger();
    let exchange = (&cb + &cb.dagger()).scale_real(lambda);
    Ok(&diag + &exchange)
}

/// Dispersive detunings (ω_C − ω_M, ω_NV − ω_M) for a static config.
pub fn dispersive_detunings(cfg: &SystemConfig) -> (f64, f64) {
    (-cfg.delta_c(), -cfg.delta_nv())
}

/// [`dispersive_hamiltonian`] for a configuration, with qubit M parked
/// below C and the ensemble. Warns outside |Δ| ≥ 5·max(g, J_t).
pub fn build_h_dispersive(cfg: &SystemConfig) -> Result<ComplexMatrix> {
    let (delta_c, delta_nv) = dispersive_detunings(cfg);
    if delta_c == 0.0 || delta_nv == 0.0 {
        return Err(Error::InvalidParameter(
            "zero detuning: dispersive regime undefined".into(),
        ));
    }
    let scale = cfg.nve.g.abs().max(cfg.j_t.abs());
    if delta_c.abs().min(delta_nv.abs()) < 5.0 * scale {
        warn!(
            "detunings ({delta_c}, {delta_nv}) are below 5·max(g, J_t) = {}; effective Hamiltonian is a poor approximation",
            5.0 * scale
        );
    }
    dispersive_hamiltonian(cfg.nve.g, cfg.j_t, delta_c, delta_nv, cfg.nve.fock_cutoff)
}

/// Single flux-qubit/ensemble exchange `g(b†σ⁻_C + bσ⁺_C)` on C ⊗ NVE
/// alone (dimension `2·fock_cutoff`, index `c·fock_cutoff + n`).
pub fn build_h_single(g: f64, fock_cutoff: usize) -> ComplexMatrix {
    let (sm, b) = Basis::new(fock_cutoff).reduced_ladders();
    let term = &b.dagger() * &sm;
    (&term + &term.dagger()).scale_real(g)
}

/// Full laboratory-frame Hamiltonian at the flux degeneracy point,
/// `½Σ_j λ_j σ^x_j + ω_NV b†b + g σ^z_M(b† + b) + J_t σ^z_M σ^z_C`.
///
/// Written in the qubit eigenbasis, where the flux-basis σ^x becomes
/// `σ⁺σ⁻ − σ⁻σ⁺` and σ^z becomes `σ⁺ + σ⁻`, so the basis is shared with
/// [`build_h_rwa`]. Counter-rotating terms are kept.
pub fn build_h_lab(cfg: &SystemConfig) -> Result<ComplexMatrix> {
    let basis = cfg.basis();
    let omega_m = cfg.omega_m_at(0.0)?;
    let free = basis.diagonal_from(|c, m, n| {
        let zc = if c == 1 { 1.0 } else { -1.0 };
        let zm = if m == 1 { 1.0 } else { -1.0 };
        0.5 * cfg.qubit_c.omega * zc + 0.5 * omega_m * zm + cfg.nve.omega_nv * n as f64
    });
    let sm_c = basis.sigma_minus_c();
    let sm_m = basis.sigma_minus_m();
    let b = basis.annihilation();
    let x_c = &sm_c + &sm_c.dagger();
    let x_m = &sm_m + &sm_m.dagger();
    let b_sum = &b + &b.dagger();
    let nve = (&x_m * &b_sum).scale_real(cfg.nve.g);
    let qq = (&x_m * &x_c).scale_real(cfg.j_t);
    Ok(&(&free + &nve) + &qq)
}

/// `Ω_C(σ⁺_C + σ⁻_C) + Ω_NV(b + b†)` in the frame of a drive resonant with qubit C.
pub fn drive_operator(basis: &Basis, omega_c: f64, omega_nv: f64) -> ComplexMatrix {
    let sm_c = basis.sigma_minus_c();
    let b = basis.annihilation();
    let qubit = (&sm_c + &sm_c.dagger()).scale_real(omega_c);
    let mode = (&b + &b.dagger()).scale_real(omega_nv);
    &qubit + &mode
}

/// Drive terms with Rabi frequencies from the control-line geometry
/// (override for Ω_C honoured), in internal units of `unit`.
pub fn build_drive_terms(
    p: &DriveParams,
    n_spins: f64,
    g_factor: f64,
    fock_cutoff: usize,
    unit: &UnitSystem,
) -> ComplexMatrix {
    drive_operator(
        &Basis::new(fock_cutoff),
        p.omega_c(unit),
        p.omega_nv(unit, n_spins, g_factor),
    )
}

/// Drive terms for a configuration; errors when it has no drive block.
pub fn build_drive_terms_for(cfg: &SystemConfig) -> Result<ComplexMatrix> {
    let p = cfg
        .drive
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("configuration has no drive parameters".into()))?;
    let g_e = if cfg.nve.g_factor > 0.0 {
        cfg.nve.g_factor
    } else {
        DEFAULT_G_FACTOR
    };
    Ok(build_drive_terms(
        p,
        cfg.nve.n_spins,
        g_e,
        cfg.nve.fock_cutoff,
        &cfg.unit,
    ))
}

/// Jump operators `[√γ_M σ⁻_M, √γ_C σ⁻_C]`. The ensemble does not decay.
pub fn collapse_operators(cfg: &SystemConfig) -> Result<Vec<ComplexMatrix>> {
    let basis = cfg.basis();
    let mut ops = Vec::with_capacity(2);
    for (name, rate, op) in [
        (
            "qubit_m.decay_rate",
            cfg.qubit_m.decay_rate,
            basis.sigma_minus_m(),
        ),
        (
            "qubit_c.decay_rate",
            cfg.qubit_c.decay_rate,
            basis.sigma_minus_c(),
        ),
    ] {
        if !(rate.is_finite() && rate >= 0.0) {
            return Err(Error::config(
                name,
                format!("decay rate must be >= 0, got {rate}"),
            ));
        }
        ops.push(op.scale(C64::new(rate.sqrt(), 0.0)));
    }
    Ok(ops)
}

/// Embeds a C ⊗ NVE operator, see [`Basis::embed_without_m`].
pub fn embed_single(op: &ComplexMatrix, fock_cutoff: usize) -> ComplexMatrix {
    Basis::new(fock_cutoff).embed_without_m(op)
}

/// The identity on M tensored with an operator on C, for tests and tools.
pub fn qubit_c_operator(op2: &ComplexMatrix, fock_cutoff: usize) -> ComplexMatrix {
    kron(
        &kron(op2, &ComplexMatrix::identity(2)),
        &ComplexMatrix::identity(fock_cutoff),
    )
}
