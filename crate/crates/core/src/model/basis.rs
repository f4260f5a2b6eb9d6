//! Tensor-product basis C ⊗ M ⊗ NVE.
//!
//! Basis index of `|i_C, i_M, n⟩` is `((i_C·2) + i_M)·fock_cutoff + n`,
//! with `i = 1` the excited qubit state and `n` the ensemble occupation.

use crate::linalg::{kron, pauli, ComplexMatrix, ComplexVector, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Basis {
    pub fock_cutoff: usize,
}

impl Basis {
    pub fn new(fock_cutoff: usize) -> Self {
        Self { fock_cutoff }
    }

    /// Recovers the basis from a full-space dimension, if it is one.
    pub fn from_dim(dim: usize) -> Option<Self> {
        (dim.is_multiple_of(4) && dim / 4 >= 2).then(|| Self::new(dim / 4))
    }

    pub fn dim(&self) -> usize {
        4 * self.fock_cutoff
    }

    pub fn index(&self, c: usize, m: usize, n: usize) -> usize {
        debug_assert!(c < 2 && m < 2 && n < self.fock_cutoff);
        ((c * 2) + m) * self.fock_cutoff + n
    }

    /// (i_C, i_M, n) of a basis index.
    pub fn decompose(&self, index: usize) -> (usize, usize, usize) {
        let n = index % self.fock_cutoff;
        let q = index / self.fock_cutoff;
        (q / 2, q % 2, n)
    }

    pub fn ket(&self, c: usize, m: usize, n: usize) -> ComplexVector {
        ComplexVector::basis(self.dim(), self.index(c, m, n))
    }

    /// |φ₁⟩ = |1_C 0_M 0⟩
    pub fn phi1(&self) -> usize {
        self.index(1, 0, 0)
    }

    /// |φ₂⟩ = |0_C 1_M 0⟩
    pub fn phi2(&self) -> usize {
        self.index(0, 1, 0)
    }

    /// |φ₃⟩ = |0_C 0_M 1⟩
    pub fn phi3(&self) -> usize {
        self.index(0, 0, 1)
    }

    pub fn single_excitation(&self) -> [usize; 3] {
        [self.phi1(), self.phi2(), self.phi3()]
    }

    pub fn identity(&self) -> ComplexMatrix {
        ComplexMatrix::identity(self.dim())
    }

    fn fock_identity(&self) -> ComplexMatrix {
        ComplexMatrix::identity(self.fock_cutoff)
    }

    /// Truncated annihilation operator on the ensemble mode alone.
    pub fn mode_annihilation(&self) -> ComplexMatrix {
        let n = self.fock_cutoff;
        ComplexMatrix::from_fn(n, n, |i, j| {
            if j == i + 1 {
                C64::new((j as f64).sqrt(), 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    pub fn sigma_minus_c(&self) -> ComplexMatrix {
        kron(
            &kron(&pauli::sigma_minus(), &ComplexMatrix::identity(2)),
            &self.fock_identity(),
        )
    }

    pub fn sigma_minus_m(&self) -> ComplexMatrix {
        kron(
            &kron(&ComplexMatrix::identity(2), &pauli::sigma_minus()),
            &self.fock_identity(),
        )
    }

    /// `b`
    pub fn annihilation(&self) -> ComplexMatrix {
        kron(&ComplexMatrix::identity(4), &self.mode_annihilation())
    }

    pub fn number_c(&self) -> ComplexMatrix {
        self.diagonal_from(|c, _, _| c as f64)
    }

    pub fn number_m(&self) -> ComplexMatrix {
        self.diagonal_from(|_, m, _| m as f64)
    }

    /// `b†b`
    pub fn number_nve(&self) -> ComplexMatrix {
        self.diagonal_from(|_, _, n| n as f64)
    }

    /// `N̂ = σ⁺_Cσ⁻_C + σ⁺_Mσ⁻_M + b†b`
    pub fn excitation_number(&self) -> ComplexMatrix {
        self.diagonal_from(|c, m, n| (c + m + n) as f64)
    }

    pub fn diagonal_from(&self, f: impl Fn(usize, usize, usize) -> f64) -> ComplexMatrix {
        let d: Vec<f64> = (0..self.dim())
            .map(|i| {
                let (c, m, n) = self.decompose(i);
                f(c, m, n)
            })
            .collect();
        ComplexMatrix::diagonal(&d)
    }

    /// Lifts an operator on C ⊗ NVE (index `c·fock_cutoff + n`) to the full
    /// space with the identity on M.
    pub fn embed_without_m(&self, op: &ComplexMatrix) -> ComplexMatrix {
        let nf = self.fock_cutoff;
        assert_eq!(op.rows(), 2 * nf, "operator is not on C ⊗ NVE");
        ComplexMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            let (ci, mi, ni) = self.decompose(i);
            let (cj, mj, nj) = self.decompose(j);
            if mi == mj {
                op[(ci * nf + ni, cj * nf + nj)]
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// Ladder operators on C ⊗ NVE alone: (σ⁻_C, b).
    pub fn reduced_ladders(&self) -> (ComplexMatrix, ComplexMatrix) {
        let sm = kron(&pauli::sigma_minus(), &self.fock_identity());
        let b = kron(&ComplexMatrix::identity(2), &self.mode_annihilation());
        (sm, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_excitation_indices() {
        for nf in 2..6 {
            let b = Basis::new(nf);
            assert_eq!(b.single_excitation(), [2 * nf, nf, 1]);
        }
    }

    #[test]
    fn decompose_inverts_index() {
        let b = Basis::new(3);
        for i in 0..b.dim() {
            let (c, m, n) = b.decompose(i);
            assert_eq!(b.index(c, m, n), i);
        }
    }

    #[test]
    fn ladder_operators_agree_with_number_operators() {
        let b = Basis::new(3);
        let sm = b.sigma_minus_c();
        assert_eq!(&sm.dagger() * &sm, b.number_c());
        let a = b.annihilation();
        assert!((&a.dagger() * &a).max_abs_diff(&b.number_nve()) < 1e-14);
        let mm = b.sigma_minus_m();
        assert_eq!(&mm.dagger() * &mm, b.number_m());
    }

    #[test]
    fn embed_identity() {
        let b = Basis::new(2);
        assert_eq!(b.embed_without_m(&ComplexMatrix::identity(4)), b.identity());
        let (sm, _) = b.reduced_ladders();
        assert_eq!(b.embed_without_m(&sm), b.sigma_minus_c());
    }
}
