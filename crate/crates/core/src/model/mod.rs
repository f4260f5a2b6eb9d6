//! Physical parameters, scalar formulas and operator builders.

pub mod basis;
pub mod formulas;
pub mod hamiltonian;
pub mod params;
pub mod schedule;
pub mod units;

pub use basis::Basis;
pub use formulas::{
    effective_lambda, field_at_distance, nv_transition_frequency, rabi_frequency_nve, rabi_frequency_qubit,
    DEFAULT_G_FACTOR,
};
pub use hamiltonian::{
    build_drive_terms, build_drive_terms_for, build_h_dispersive, build_h_frame, build_h_lab,
    build_h_resonant, build_h_rwa, build_h_single, collapse_operators, dispersive_detunings,
    dispersive_hamiltonian, drive_operator,
};
pub use params::{DriveParams, FluxQubitParams, NveParams, SystemConfig};
pub use schedule::{CouplingSegment, DriveWindow, OmegaRamp, RampShape, Schedule};
pub use units::{UnitMode, UnitSystem};
