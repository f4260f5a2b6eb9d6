//! Quantum-storage simulator for a hybrid circuit made of a computing flux
//! qubit C, a coupler flux qubit M and an NV-centre ensemble memory.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: dense complex matrices, Kronecker products, Hermitian
//!   eigendecomposition and propagators.
//! - [`model`]: parameters, drive and dispersive formulas, Hamiltonian and
//!   jump-operator builders on the fixed C ⊗ M ⊗ NVE ordering.
//! - [`dynamics`]: Schrödinger and Lindblad propagation on a time grid.
//! - [`analytic`]: closed-form amplitudes used as oracles.
//! - [`experiments`]: storage protocols, fidelity and the sweep engine.
//! - [`cli`]: config documents, scenario dispatch and CSV/JSON output.
//!
//! See `examples/` for one runnable program per capability.

pub mod analytic;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod model;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, ComplexVector, C64};

/// Crate version, stamped into every output file.
pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));
