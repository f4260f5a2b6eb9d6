//! Closed-form amplitudes for the resonant chain and the dispersive swap.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Amplitudes on (|φ₁⟩, |φ₂⟩, |φ₃⟩) = (|1_C 0_M 0⟩, |0_C 1_M 0⟩, |0_C 0_M 1⟩).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonantAmplitudes {
    pub c1: C64,
    pub c2: C64,
    pub c3: C64,
}

impl ResonantAmplitudes {
    pub fn norm_sqr(&self) -> f64 {
        self.c1.norm_sqr() + self.c2.norm_sqr() + self.c3.norm_sqr()
    }

    pub fn as_array(&self) -> [C64; 3] {
        [self.c1, self.c2, self.c3]
    }
}

/// Solution of the resonant chain `J_t(|φ₁⟩⟨φ₂| + h.c.) + g(|φ₂⟩⟨φ₃| + h.c.)`
/// started in |φ₁⟩:
///
/// ```text
/// C₁ = (g² + J² cos Ωt)/Ω²,  C₂ = −iJ sin(Ωt)/Ω,  C₃ = Jg(cos Ωt − 1)/Ω²,
/// Ω = √(J² + g²).
/// ```
///
/// The `g²/Ω²` term in C₁ is what makes `C₁(0) = 1`.
pub fn resonant_amplitudes(j: f64, g: f64, t: f64) -> Result<ResonantAmplitudes> {
    if j == 0.0 && g == 0.0 {
        return Err(Error::InvalidParameter(
            "resonant amplitudes undefined for J_t = g = 0".into(),
        ));
    }
    let omega_sq = j * j + g * g;
    let omega = omega_sq.sqrt();
    let (s, c) = (omega * t).sin_cos();
    Ok(ResonantAmplitudes {
        c1: C64::new((g * g + j * j * c) / omega_sq, 0.0),
        c2: C64::new(0.0, -j * s / omega),
        c3: C64::new(j * g * (c - 1.0) / omega_sq, 0.0),
    })
}

/// `t = (2k+1)π/(√2 g)`, the k-th complete transfer at `J_t = g`.
pub fn resonant_transfer_time(g: f64, k: u32) -> Result<f64> {
    if !(g > 0.0 && g.is_finite()) {
        return Err(Error::InvalidParameter(format!("coupling must be > 0, got {g}")));
    }
    Ok((2 * k + 1) as f64 * PI / (2.0_f64.sqrt() * g))
}

/// Two-level swap between |1_C 0⟩ and |0_C 1⟩ under
/// `(δ/2)(|C⟩⟨C| − |NV⟩⟨NV|) + Λ(|C⟩⟨NV| + h.c.)`, started in |C⟩.
///
/// Returns `(c_C, c_NV)` with `Ω = √(Λ² + δ²/4)`:
/// `c_C = cos Ωt − i(δ/2Ω) sin Ωt`, `c_NV = −i(Λ/Ω) sin Ωt`.
pub fn dispersive_amplitudes(lambda_eff: f64, delta_diag: f64, t: f64) -> (C64, C64) {
    let half = 0.5 * delta_diag;
    let omega = (lambda_eff * lambda_eff + half * half).sqrt();
    if omega == 0.0 {
        return (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
    }
    let (s, c) = (omega * t).sin_cos();
    (
        C64::new(c, -half / omega * s),
        C64::new(0.0, -lambda_eff / omega * s),
    )
}

/// `t = (2k+1)π/(2Λ)`.
pub fn dispersive_transfer_time(lambda_eff: f64, k: u32) -> Result<f64> {
    if !(lambda_eff.abs() > 0.0 && lambda_eff.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "effective coupling must be nonzero, got {lambda_eff}"
        )));
    }
    Ok((2 * k + 1) as f64 * PI / (2.0 * lambda_eff.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force RK4 on `i ċ = H c` for a small real-symmetric H.
    fn integrate(h: &[&[f64]], c0: &[C64], t: f64, steps: usize) -> Vec<C64> {
        let n = c0.len();
        let dt = t / steps as f64;
        let rhs = |c: &[C64]| -> Vec<C64> {
            (0..n)
                .map(|i| {
                    let s: C64 = (0..n).map(|k| c[k] * h[i][k]).sum();
                    C64::new(s.im, -s.re)
                })
                .collect()
        };
        let mut c = c0.to_vec();
        for _ in 0..steps {
            let add = |a: &[C64], b: &[C64], f: f64| -> Vec<C64> {
                a.iter().zip(b).map(|(x, y)| x + y * f).collect()
            };
            let k1 = rhs(&c);
            let k2 = rhs(&add(&c, &k1, dt / 2.0));
            let k3 = rhs(&add(&c, &k2, dt / 2.0));
            let k4 = rhs(&add(&c, &k3, dt));
            for i in 0..n {
                c[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0);
            }
        }
        c
    }

    #[test]
    fn resonant_initial_condition() {
        let a = resonant_amplitudes(0.3, 1.7, 0.0).unwrap();
        assert_eq!(
            a.as_array(),
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]
        );
    }

    #[test]
    fn resonant_full_transfer_has_phase_minus_one() {
        let t = resonant_transfer_time(1.0, 0).unwrap();
        let a = resonant_amplitudes(1.0, 1.0, t).unwrap();
        assert!(a.c1.norm() < 1e-15 && a.c2.norm() < 1e-15);
        assert!((a.c3 - C64::new(-1.0, 0.0)).norm() < 1e-15);
        let a = resonant_amplitudes(1.0, 1.0, 2.0 * t).unwrap();
        assert!((a.c1 - C64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn resonant_matches_brute_force() {
        for &(j, g, t) in &[(1.0, 1.0, 2.2), (0.4, 1.3, 7.5), (2.0, 0.5, 3.3)] {
            let want = integrate(
                &[&[0.0, j, 0.0], &[j, 0.0, g], &[0.0, g, 0.0]],
                &[C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
                t,
                20_000,
            );
            let got = resonant_amplitudes(j, g, t).unwrap().as_array();
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn resonant_rejects_zero_couplings() {
        assert!(resonant_amplitudes(0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn transfer_times() {
        let t0 = resonant_transfer_time(1.0, 0).unwrap();
        assert!((t0 - 2.221_441_469_079_183).abs() < 1e-12);
        assert!((resonant_transfer_time(1.0, 1).unwrap() - 3.0 * t0).abs() < 1e-12);
        assert!(resonant_transfer_time(0.0, 0).is_err());
        let g = 2.0 * PI * 35e6;
        assert!((resonant_transfer_time(g, 0).unwrap() * 1e9 - 10.1).abs() < 0.05);
    }

    #[test]
    fn dispersive_swap() {
        let lam = 0.1;
        let t = dispersive_transfer_time(lam, 0).unwrap();
        let (c, n) = dispersive_amplitudes(lam, 0.0, t);
        assert!(c.norm() < 1e-15);
        assert!((n - C64::new(0.0, -1.0)).norm() < 1e-15);
        assert_eq!(
            dispersive_amplitudes(lam, 0.3, 0.0),
            (C64::new(1.0, 0.0), C64::new(0.0, 0.0))
        );
    }

    #[test]
    fn dispersive_matches_brute_force() {
        let (lam, d, t) = (0.2, 0.5, 9.0);
        let want = integrate(
            &[&[d / 2.0, lam], &[lam, -d / 2.0]],
            &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            t,
            20_000,
        );
        let (c, n) = dispersive_amplitudes(lam, d, t);
        assert!((c - want[0]).norm() < 1e-10 && (n - want[1]).norm() < 1e-10);
    }

    #[test]
    fn large_splitting_suppresses_transfer() {
        let (lam, d) = (0.1, 5.0);
        let bound = lam * lam / (lam * lam + d * d / 4.0);
        let max = (0..2000)
            .map(|k| dispersive_amplitudes(lam, d, k as f64 * 0.01).1.norm_sqr())
            .fold(0.0, f64::max);
        assert!(max <= bound + 1e-15 && max > 0.99 * bound);
        assert!(bound < 2e-3);
    }
}
