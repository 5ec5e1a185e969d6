//! Adiabatic-parameter-fixed sweeping for `χ < 0`.
//!
//! The Rabi frequency is lowered from a large value through the critical
//! point `Ω_c = N|χ|` towards zero at the instantaneous rate
//!
//! ```text
//! υ = ε (E₁ - E₃)² / |⟨φ₁|Jx|φ₃⟩|
//! ```
//!
//! where `φ₁`, `φ₃` are the two lowest even-parity eigenstates. Parity
//! protects the passage through the region where the ground state becomes
//! degenerate with the lowest odd state.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::parity::{self, Parity, ParitySector};
use crate::propagation::{evolve_swept, Hamiltonian, Workspace};
use crate::spin::{self, cat_state, CatSpec, StateVector, C64};

/// Sampled Rabi-frequency sweep `Ω(t)`.
///
/// `Ω` is stored as a non-negative magnitude; the drive applied during
/// evolution is `drive_sign · Ω(t) Jx`.
#[derive(Debug, Clone)]
pub struct SweepTrajectory {
    epsilon: f64,
    samples: Vec<(f64, f64)>,
    drive_sign: f64,
}

impl SweepTrajectory {
    pub fn new(epsilon: f64, samples: Vec<(f64, f64)>, drive_sign: f64) -> Result<Self> {
        let trajectory = Self {
            epsilon,
            samples,
            drive_sign,
        };
        trajectory.validate()?;
        Ok(trajectory)
    }

    /// Constant drive `Ω₀` held for `duration`.
    pub fn constant(omega: f64, duration: f64) -> Result<Self> {
        Self::new(0.0, vec![(0.0, omega), (duration, omega)], 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        let first = self
            .samples
            .first()
            .ok_or_else(|| Error::InvalidArgument("trajectory has no samples".into()))?;
        if self.samples.len() < 2 || first.0 != 0.0 {
            return Err(Error::InvalidArgument(
                "trajectory needs at least two samples starting at t = 0".into(),
            ));
        }
        if self.samples.iter().any(|(t, w)| !t.is_finite() || !w.is_finite()) {
            return Err(Error::InvalidArgument("trajectory contains non-finite samples".into()));
        }
        if let Some(index) = self.samples.windows(2).position(|w| w[1].0 <= w[0].0) {
            return Err(Error::NonMonotonicTime { index: index + 1 });
        }
        if self.drive_sign != 1.0 && self.drive_sign != -1.0 {
            return Err(Error::InvalidArgument("drive sign must be +1 or -1".into()));
        }
        Ok(())
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn drive_sign(&self) -> f64 {
        self.drive_sign
    }

    pub fn total_time(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.0)
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.0).collect()
    }

    /// Linear interpolation between samples, clamped at both ends.
    pub fn omega_at(&self, t: f64) -> f64 {
        let s = &self.samples;
        if t <= s[0].0 {
            return s[0].1;
        }
        let upper = s.partition_point(|p| p.0 < t);
        if upper >= s.len() {
            return s[s.len() - 1].1;
        }
        let (t0, w0) = s[upper - 1];
        let (t1, w1) = s[upper];
        w0 + (w1 - w0) * (t - t0) / (t1 - t0)
    }
}

/// Lowest two even-parity levels and their `Jx` coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapData {
    pub omega: f64,
    pub e1: f64,
    pub e3: f64,
    pub coupling: f64,
}

impl GapData {
    pub fn gap(&self) -> f64 {
        self.e3 - self.e1
    }
}

fn sector_block(hamiltonian: &Hamiltonian, parity: Parity) -> Result<DMatrix<f64>> {
    let deviation = parity::parity_deviation(&hamiltonian.matrix);
    if deviation > 1e-12 {
        return Err(Error::NotParitySymmetric(deviation));
    }
    Ok(ParitySector::new(hamiltonian.atom_count, parity).reduce_matrix(&hamiltonian.matrix))
}

/// Restriction of `H` to the even-parity sector.
pub fn even_parity_block(hamiltonian: &Hamiltonian) -> Result<DMatrix<f64>> {
    sector_block(hamiltonian, Parity::Even)
}

pub fn odd_parity_block(hamiltonian: &Hamiltonian) -> Result<DMatrix<f64>> {
    sector_block(hamiltonian, Parity::Odd)
}

/// Even-sector operators for repeated gap evaluations at fixed `N`.
#[derive(Debug, Clone)]
pub struct GapTracker {
    atom_count: usize,
    chi: f64,
    workspace: Workspace,
    sector: ParitySector,
    jx_full: DMatrix<f64>,
}

impl GapTracker {
    pub fn new(atom_count: usize, chi: f64) -> Result<Self> {
        if atom_count < 2 {
            return Err(Error::AtomCount { got: atom_count, min: 2 });
        }
        Ok(Self {
            atom_count,
            chi,
            workspace: Workspace::sector(atom_count, Parity::Even),
            sector: ParitySector::new(atom_count, Parity::Even),
            jx_full: spin::jx_matrix(atom_count),
        })
    }

    /// Even-sector eigenpairs of `χJz² + ΩJx`, ascending.
    fn eigenpairs(&self, omega: f64) -> (Vec<f64>, Vec<DVector<f64>>) {
        let eigen = SymmetricEigen::new(self.workspace.hamiltonian(self.chi, omega));
        let mut order: Vec<usize> = (0..eigen.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eigen.eigenvalues[a].total_cmp(&eigen.eigenvalues[b]));
        let values = order.iter().map(|&i| eigen.eigenvalues[i]).collect();
        let vectors = order.iter().map(|&i| eigen.eigenvectors.column(i).into_owned()).collect();
        (values, vectors)
    }

    pub fn gap_data(&self, omega: f64) -> Result<GapData> {
        let (values, vectors) = self.eigenpairs(omega);
        let (e1, e3) = (values[0], values[1]);
        if e3 - e1 <= 1e-12 * e1.abs().max(1.0) {
            return Err(Error::DegenerateGap { omega });
        }
        // Coupling evaluated in the full Dicke basis.
        let phi1 = self.sector.embed_real(&vectors[0]);
        let phi3 = self.sector.embed_real(&vectors[1]);
        let coupling = phi1.dot(&(&self.jx_full * phi3)).abs();
        Ok(GapData {
            omega,
            e1,
            e3,
            coupling,
        })
    }

    /// Even-parity ground state of `χJz² + drive_sign·Ω Jx`, canonical phase.
    pub fn ground_state(&self, omega: f64, drive_sign: f64) -> StateVector {
        let (_, vectors) = self.eigenpairs(drive_sign * omega);
        let full = self.sector.embed_real(&vectors[0]).map(|x| C64::new(x, 0.0));
        StateVector::from_raw(self.atom_count, full).with_canonical_phase()
    }
}

pub fn gap_data(atom_count: usize, chi: f64, omega: f64) -> Result<GapData> {
    GapTracker::new(atom_count, chi)?.gap_data(omega)
}

/// Coupling below which the rate law is treated as divergent.
pub const MIN_COUPLING: f64 = 1e-14;

/// Magnitude of the sweep rate `ε (E₁ - E₃)² / |⟨φ₁|Jx|φ₃⟩|`.
pub fn sweep_rate(gap: &GapData, epsilon: f64) -> Result<f64> {
    if gap.coupling < MIN_COUPLING {
        return Err(Error::RateDivergence { coupling: gap.coupling });
    }
    Ok(epsilon * gap.gap().powi(2) / gap.coupling)
}

/// Knobs of the sweep generator. Frequencies are in units of `N|χ|`.
#[derive(Debug, Clone, Copy)]
pub struct SweepConfig {
    /// `Ω(0)` as a multiple of the critical value `N|χ|`.
    pub omega_start_factor: f64,
    /// Sweep end point as a multiple of `N|χ|`.
    pub omega_end_factor: f64,
    /// Largest `ΔΩ` per integration step, as a fraction of `Ω(0)`.
    pub max_step_fraction: f64,
    /// Relative disagreement between the one- and two-panel quadratures of
    /// a step above which the step is halved.
    pub step_tolerance: f64,
    /// Multiplier applied to the rate law. The tabulated reference runs
    /// (`χT = 0.24, 0.48, 0.96` at `ε = 0.2, 0.1, 0.05`, `N = 100`) are
    /// reproduced with 2.
    pub rate_factor: f64,
    /// Upper bound on the applied rate, in units of `N|χ|²`.
    pub max_rate_factor: f64,
    pub max_time: f64,
    /// Sign of the applied drive; `-1` makes `|π/2, 0⟩` the large-drive
    /// ground state.
    pub drive_sign: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            omega_start_factor: 2.0,
            omega_end_factor: 1e-3,
            max_step_fraction: 0.01,
            step_tolerance: 1e-4,
            rate_factor: 2.0,
            max_rate_factor: 1e6,
            max_time: 1e3,
            drive_sign: -1.0,
        }
    }
}

impl SweepConfig {
    pub fn omega_start(&self, atom_count: usize, chi: f64) -> f64 {
        self.omega_start_factor * atom_count as f64 * chi.abs()
    }

    pub fn omega_end(&self, atom_count: usize, chi: f64) -> f64 {
        self.omega_end_factor * atom_count as f64 * chi.abs()
    }
}

pub fn generate_trajectory(
    atom_count: usize,
    chi: f64,
    epsilon: f64,
    omega_start: f64,
    omega_end: f64,
) -> Result<SweepTrajectory> {
    generate_trajectory_with(atom_count, chi, epsilon, omega_start, omega_end, &SweepConfig::default())
}

/// Integrates `dΩ/dt = -υ(Ω)`.
///
/// Because the rate depends on `Ω` only, the elapsed time is the quadrature
/// `t(Ω) = ∫ dΩ'/υ(Ω')`, which stays finite where `υ` blows up. Steps in `Ω`
/// are capped at `max_step_fraction · Ω(0)` and halved while a midpoint and
/// a two-panel midpoint estimate of the step duration disagree.
pub fn generate_trajectory_with(
    atom_count: usize,
    chi: f64,
    epsilon: f64,
    omega_start: f64,
    omega_end: f64,
    config: &SweepConfig,
) -> Result<SweepTrajectory> {
    if !(chi < 0.0) {
        return Err(Error::InvalidArgument(format!("cat sweep needs chi < 0, got {chi}")));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(omega_start > omega_end && omega_end >= 0.0 && omega_start.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "need omega_start > omega_end >= 0, got {omega_start} and {omega_end}"
        )));
    }
    let tracker = GapTracker::new(atom_count, chi)?;
    let max_rate = config.max_rate_factor * atom_count as f64 * chi * chi;
    let rate = |omega: f64| -> Result<f64> {
        let gap = tracker.gap_data(omega)?;
        match sweep_rate(&gap, epsilon) {
            Ok(r) => Ok((config.rate_factor * r).min(max_rate)),
            Err(Error::RateDivergence { .. }) => Ok(max_rate),
            Err(e) => Err(e),
        }
    };

    let cap = config.max_step_fraction * omega_start;
    let min_step = cap * 1e-6;
    let mut samples = vec![(0.0, omega_start)];
    let (mut t, mut omega) = (0.0, omega_start);
    let mut step = cap;
    while omega > omega_end {
        let width = step.min(omega - omega_end);
        let one_panel = width / rate(omega - width / 2.0)?;
        let two_panel = width / 2.0 / rate(omega - width / 4.0)? + width / 2.0 / rate(omega - 3.0 * width / 4.0)?;
        let error = (one_panel - two_panel).abs() / two_panel;
        if error > config.step_tolerance && width > min_step {
            step = width / 2.0;
            continue;
        }
        omega = if width == omega - omega_end { omega_end } else { omega - width };
        t += two_panel;
        samples.push((t, omega));
        if t > config.max_time {
            return Err(Error::SweepTimeout {
                target: omega_end,
                max_time: config.max_time,
            });
        }
        if error < config.step_tolerance / 8.0 {
            step = (2.0 * width).min(cap);
        }
    }
    SweepTrajectory::new(epsilon, samples, config.drive_sign)
}

/// Fidelity to one target cat along a run.
#[derive(Debug, Clone)]
pub struct FidelityTrace {
    pub theta: f64,
    pub samples: Vec<(f64, f64)>,
}

impl FidelityTrace {
    /// `(time, fidelity)` of the maximum; earliest time on ties.
    pub fn best(&self) -> (f64, f64) {
        self.samples
            .iter()
            .copied()
            .fold((0.0, f64::NEG_INFINITY), |acc, s| if s.1 > acc.1 { s } else { acc })
    }
}

#[derive(Debug, Clone)]
pub struct AdiabaticRun {
    pub trajectory: SweepTrajectory,
    pub initial_state: StateVector,
    pub final_state: StateVector,
    pub traces: Vec<FidelityTrace>,
    pub norm_drift: f64,
    /// Largest `|1 - ⟨P⟩|` over all recorded states.
    pub parity_drift: f64,
}

impl AdiabaticRun {
    pub fn total_time(&self) -> f64 {
        self.trajectory.total_time()
    }
}

pub fn run_adiabatic(atom_count: usize, chi: f64, epsilon: f64, targets: &[CatSpec]) -> Result<AdiabaticRun> {
    run_adiabatic_with(atom_count, chi, epsilon, targets, &SweepConfig::default())
}

/// Starts from the even ground state at `Ω(0)`, evolves along the generated
/// sweep and records the fidelity to every target at every sample time.
pub fn run_adiabatic_with(
    atom_count: usize,
    chi: f64,
    epsilon: f64,
    targets: &[CatSpec],
    config: &SweepConfig,
) -> Result<AdiabaticRun> {
    if let Some(t) = targets.iter().find(|t| t.atom_count != atom_count) {
        return Err(Error::InvalidArgument(format!(
            "target for N = {} in a run with N = {atom_count}",
            t.atom_count
        )));
    }
    let trajectory = generate_trajectory_with(
        atom_count,
        chi,
        epsilon,
        config.omega_start(atom_count, chi),
        config.omega_end(atom_count, chi),
        config,
    )?;
    let initial_state = GapTracker::new(atom_count, chi)?.ground_state(trajectory.samples()[0].1, config.drive_sign);
    let times = trajectory.times();
    let evolution = evolve_swept(atom_count, chi, &trajectory, &initial_state, &times)?;

    let cats = targets.iter().map(cat_state).collect::<Result<Vec<_>>>()?;
    let mut traces: Vec<FidelityTrace> = targets
        .iter()
        .map(|t| FidelityTrace {
            theta: t.theta,
            samples: Vec::with_capacity(times.len()),
        })
        .collect();
    let mut parity_drift: f64 = 0.0;
    for (t, state) in &evolution.checkpoints {
        parity_drift = parity_drift.max((1.0 - spin::parity_expectation(state)).abs());
        for (trace, cat) in traces.iter_mut().zip(&cats) {
            trace.samples.push((*t, cat.inner(state)?.norm_sqr()));
        }
    }
    Ok(AdiabaticRun {
        trajectory,
        initial_state,
        final_state: evolution.final_state,
        traces,
        norm_drift: evolution.norm_drift,
        parity_drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagation::build_hamiltonian;
    use crate::spin::spin_coherent_state;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn even_block_for_two_atoms() {
        let h = build_hamiltonian(2, 1.0, 0.0).unwrap();
        let block = even_parity_block(&h).unwrap();
        assert_eq!(block.nrows(), 2);
        let mut values: Vec<f64> = block.symmetric_eigenvalues().iter().copied().collect();
        values.sort_by(f64::total_cmp);
        assert!((values[0] - 0.0).abs() < 1e-14 && (values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn blocks_reproduce_full_spectrum() {
        for (n, omega) in [(7, 3.3), (10, 0.0), (10, 17.0)] {
            let h = build_hamiltonian(n, -1.0, omega).unwrap();
            let mut union: Vec<f64> = even_parity_block(&h)
                .unwrap()
                .symmetric_eigenvalues()
                .iter()
                .chain(odd_parity_block(&h).unwrap().symmetric_eigenvalues().iter())
                .copied()
                .collect();
            union.sort_by(f64::total_cmp);
            for (a, b) in union.iter().zip(h.spectrum()) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn rejects_parity_breaking_matrix() {
        let mut h = build_hamiltonian(4, 1.0, 1.0).unwrap();
        h.matrix[(0, 0)] += 0.1;
        assert!(matches!(even_parity_block(&h), Err(Error::NotParitySymmetric(_))));
    }

    #[test]
    fn gap_at_zero_drive() {
        let gap = gap_data(100, -1.0, 0.0).unwrap();
        assert!((gap.e1 + 2500.0).abs() < 1e-9);
        assert!((gap.gap() - 99.0).abs() < 1e-9);
        // |⟨J,J|Jx|J,J-1⟩| = sqrt(2J)/2
        assert!((gap.coupling - 5.0).abs() < 1e-10);
    }

    #[test]
    fn gap_in_rabi_regime() {
        let n = 100;
        let omega = 20.0 * n as f64;
        let gap = gap_data(n, -1.0, omega).unwrap();
        let ratio = gap.gap() / omega;
        assert!((1.5..=2.5).contains(&ratio), "{ratio}");
    }

    #[test]
    fn rate_scaling() {
        let gap = GapData {
            omega: 1.0,
            e1: 0.0,
            e3: 4.0,
            coupling: 2.0,
        };
        let r = sweep_rate(&gap, 0.1).unwrap();
        assert_eq!(sweep_rate(&gap, 0.2).unwrap(), 2.0 * r);
        let halved = GapData { e3: 2.0, ..gap };
        assert_eq!(sweep_rate(&halved, 0.1).unwrap(), r / 4.0);
        let flat = GapData { coupling: 0.0, ..gap };
        assert!(matches!(sweep_rate(&flat, 0.1), Err(Error::RateDivergence { .. })));
    }

    #[test]
    fn trajectory_is_monotone() {
        let traj = generate_trajectory(20, -1.0, 0.1, 40.0, 0.02).unwrap();
        let s = traj.samples();
        assert_eq!(s[0], (0.0, 40.0));
        assert!(s.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 < w[0].1));
        assert_eq!(s.last().unwrap().1, 0.02);
    }

    #[test]
    fn trajectory_argument_checks() {
        assert!(generate_trajectory(20, 1.0, 0.1, 40.0, 0.0).is_err());
        assert!(generate_trajectory(20, -1.0, 0.0, 40.0, 0.0).is_err());
        assert!(generate_trajectory(20, -1.0, 0.1, 1.0, 2.0).is_err());
        let config = SweepConfig {
            max_time: 1e-3,
            ..SweepConfig::default()
        };
        assert!(matches!(
            generate_trajectory_with(20, -1.0, 0.1, 40.0, 0.0, &config),
            Err(Error::SweepTimeout { .. })
        ));
    }

    #[test]
    fn interpolation_and_validation() {
        let traj = SweepTrajectory::new(0.1, vec![(0.0, 4.0), (1.0, 2.0), (3.0, 0.0)], -1.0).unwrap();
        assert_eq!(traj.omega_at(0.5), 3.0);
        assert_eq!(traj.omega_at(2.0), 1.0);
        assert_eq!(traj.omega_at(5.0), 0.0);
        assert!(matches!(
            SweepTrajectory::new(0.1, vec![(0.0, 4.0), (1.0, 2.0), (1.0, 0.0)], -1.0),
            Err(Error::NonMonotonicTime { index: 2 })
        ));
    }

    #[test]
    fn initial_ground_state_overlap_with_coherent_state() {
        let n = 100;
        let config = SweepConfig::default();
        let ground = GapTracker::new(n, -1.0)
            .unwrap()
            .ground_state(config.omega_start(n, -1.0), config.drive_sign);
        let scs = spin_coherent_state(n, FRAC_PI_2, 0.0).unwrap();
        // Dense diagonalization reference at Ω = 2N|χ|.
        let overlap = scs.inner(&ground).unwrap().norm_sqr();
        assert!((overlap - 0.985_615_089_927_73).abs() < 1e-9, "{overlap}");
    }
}
