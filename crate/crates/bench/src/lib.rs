//! Shared workloads for the criterion benchmarks.

use spincat_core::control::Landscape;
use spincat_core::{ghz_state, spin_coherent_state, ControlSchedule, StateVector};

/// Atom numbers the kernels are timed at.
pub const SIZES: [usize; 3] = [40, 100, 200];

pub fn coherent_x(atom_count: usize) -> StateVector {
    spin_coherent_state(atom_count, std::f64::consts::FRAC_PI_2, 0.0).expect("valid coherent state")
}

/// Five-segment descending ramp at `χT = 0.15`.
pub fn ramp_schedule(atom_count: usize) -> ControlSchedule {
    ControlSchedule::new(atom_count, 0.15, vec![2.0, 1.6, 1.25, 0.9, 0.5]).expect("valid schedule")
}

pub fn ghz_landscape(atom_count: usize, segments: usize) -> Landscape {
    let target = ghz_state(atom_count).expect("valid GHZ state");
    Landscape::new(atom_count, 1.0, 0.15, segments, &target).expect("valid landscape")
}
