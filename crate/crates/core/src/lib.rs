//! Preparation and assessment of spin cat states in the twist-and-turn model
//! `H = χ Jz² + Ω(t) Jx` for `N` two-level atoms in the symmetric (Dicke)
//! subspace.
//!
//! Two preparation routes are provided: an adiabatic sweep of `Ω` at a fixed
//! adiabaticity parameter ([`adiabatic`]), and optimization of a
//! piecewise-constant `Ω(t)` ([`control`]). [`metrology`] evaluates the
//! resulting states for phase estimation.

pub mod adiabatic;
pub mod control;
pub mod error;
pub mod io;
pub mod metrology;
pub mod parity;
pub mod propagation;
pub mod spin;
pub mod stats;

pub use adiabatic::{
    gap_data, generate_trajectory, run_adiabatic, sweep_rate, AdiabaticRun, GapData, SweepConfig, SweepTrajectory,
};
pub use control::{gradient, minimal_time_scan, objective, optimize, ControlSchedule, OptimizationOutcome};
pub use error::{Error, Result};
pub use metrology::{fidelity, qcrb, qfi_phase_encoding, scaling_scan, MetrologyReport};
pub use parity::Parity;
pub use propagation::{
    build_hamiltonian, evolve_piecewise, evolve_swept, propagate_const, Hamiltonian, PropagationResult,
};
pub use spin::{
    cat_state, collective_operators, ghz_state, parity_expectation, spin_coherent_state, theta_critical, CatSpec,
    StateVector, C64,
};
