//! Time evolution under `H(t) = χ Jz² + Ω(t) Jx`.
//!
//! Constant segments are propagated exactly through the spectral
//! decomposition of the (real symmetric) Hamiltonian. Continuous sweeps are
//! approximated by midpoint-frozen steps with automatic step halving.
//! All times are in units of `1/|χ|`.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::adiabatic::SweepTrajectory;
use crate::control::ControlSchedule;
use crate::error::{Error, Result};
use crate::parity::{self, Parity, ParitySector};
use crate::spin::{self, parity_expectation, StateVector, C64};

/// `χ Jz² + Ω Jx` in the full Dicke basis.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    pub atom_count: usize,
    pub chi: f64,
    pub omega: f64,
    pub matrix: DMatrix<f64>,
}

impl Hamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Eigenvalues in ascending order.
    pub fn spectrum(&self) -> Vec<f64> {
        sorted_eigenvalues(&self.matrix)
    }
}

pub fn build_hamiltonian(atom_count: usize, chi: f64, omega: f64) -> Result<Hamiltonian> {
    if atom_count < 1 {
        return Err(Error::AtomCount { got: 0, min: 1 });
    }
    if !chi.is_finite() || !omega.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "non-finite Hamiltonian parameters chi = {chi}, omega = {omega}"
        )));
    }
    let jz = spin::jz_diagonal(atom_count);
    let mut matrix = spin::jx_matrix(atom_count) * omega;
    for (i, m) in jz.iter().enumerate() {
        matrix[(i, i)] += chi * m * m;
    }
    Ok(Hamiltonian {
        atom_count,
        chi,
        omega,
        matrix,
    })
}

pub(crate) fn sorted_eigenvalues(matrix: &DMatrix<f64>) -> Vec<f64> {
    let mut values: Vec<f64> = SymmetricEigen::new(matrix.clone()).eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Spectral form of a real symmetric generator, `e^{-iHt} = V e^{-iΛt} Vᵀ`.
#[derive(Debug, Clone)]
pub struct Propagator {
    pub(crate) values: DVector<f64>,
    pub(crate) vectors: DMatrix<f64>,
}

impl Propagator {
    pub fn new(matrix: &DMatrix<f64>) -> Self {
        let eigen = SymmetricEigen::new(matrix.clone());
        Self {
            values: eigen.eigenvalues,
            vectors: eigen.eigenvectors,
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Coordinates `Vᵀ ψ` in the eigenbasis.
    pub(crate) fn to_eigenbasis(&self, psi: &DVector<C64>) -> DVector<C64> {
        let (re, im) = split(psi);
        let re = self.vectors.tr_mul(&re);
        let im = self.vectors.tr_mul(&im);
        join(&re, &im)
    }

    pub(crate) fn from_eigenbasis(&self, coords: &DVector<C64>) -> DVector<C64> {
        let (re, im) = split(coords);
        join(&(&self.vectors * re), &(&self.vectors * im))
    }

    pub fn apply(&self, psi: &DVector<C64>, dt: f64) -> DVector<C64> {
        if dt == 0.0 {
            return psi.clone();
        }
        let mut coords = self.to_eigenbasis(psi);
        for (c, &lambda) in coords.iter_mut().zip(self.values.iter()) {
            *c *= C64::from_polar(1.0, -lambda * dt);
        }
        self.from_eigenbasis(&coords)
    }
}

fn split(v: &DVector<C64>) -> (DVector<f64>, DVector<f64>) {
    (v.map(|c| c.re), v.map(|c| c.im))
}

fn join(re: &DVector<f64>, im: &DVector<f64>) -> DVector<C64> {
    DVector::from_fn(re.len(), |i, _| C64::new(re[i], im[i]))
}

/// Twist and turn operators restricted to the subspace an evolution lives in.
///
/// When the initial state has definite parity the dynamics never leaves its
/// sector, so everything is carried out in the reduced basis.
#[derive(Debug, Clone)]
pub(crate) struct Workspace {
    atom_count: usize,
    sector: Option<ParitySector>,
    jz2: DVector<f64>,
    jx: DMatrix<f64>,
}

impl Workspace {
    pub(crate) fn full(atom_count: usize) -> Self {
        let jz = spin::jz_diagonal(atom_count);
        Self {
            atom_count,
            sector: None,
            jz2: jz.map(|m| m * m),
            jx: spin::jx_matrix(atom_count),
        }
    }

    pub(crate) fn sector(atom_count: usize, parity: Parity) -> Self {
        let sector = ParitySector::new(atom_count, parity);
        let jz = spin::jz_diagonal(atom_count);
        let jz2 = sector.reduce_matrix(&DMatrix::from_diagonal(&jz.map(|m| m * m)));
        let jx = sector.reduce_matrix(&spin::jx_matrix(atom_count));
        Self {
            atom_count,
            jz2: jz2.diagonal(),
            jx,
            sector: Some(sector),
        }
    }

    /// Smallest workspace containing every given state.
    pub(crate) fn covering(atom_count: usize, states: &[&StateVector]) -> Self {
        const SHARP: f64 = 1e-12;
        let parities: Vec<f64> = states.iter().map(|s| parity_expectation(s)).collect();
        if parities.iter().all(|p| (p - 1.0).abs() < SHARP) {
            Self::sector(atom_count, Parity::Even)
        } else if parities.iter().all(|p| (p + 1.0).abs() < SHARP) {
            Self::sector(atom_count, Parity::Odd)
        } else {
            Self::full(atom_count)
        }
    }

    #[cfg(test)]
    pub(crate) fn dim(&self) -> usize {
        self.jz2.len()
    }

    pub(crate) fn jx(&self) -> &DMatrix<f64> {
        &self.jx
    }

    pub(crate) fn hamiltonian(&self, chi: f64, omega: f64) -> DMatrix<f64> {
        let mut h = &self.jx * omega;
        for (i, m2) in self.jz2.iter().enumerate() {
            h[(i, i)] += chi * m2;
        }
        h
    }

    pub(crate) fn reduce(&self, full: &DVector<C64>) -> DVector<C64> {
        match &self.sector {
            Some(sector) => sector.project(full),
            None => full.clone(),
        }
    }

    pub(crate) fn expand(&self, reduced: &DVector<C64>) -> StateVector {
        let full = match &self.sector {
            Some(sector) => sector.embed(reduced),
            None => reduced.clone(),
        };
        StateVector::from_raw(self.atom_count, full)
    }
}

/// Outcome of an evolution run.
#[derive(Debug, Clone)]
pub struct PropagationResult {
    pub final_state: StateVector,
    /// States at the requested times, in ascending time order.
    pub checkpoints: Vec<(f64, StateVector)>,
    /// Largest `|1 - ‖ψ‖²|` seen after any step.
    pub norm_drift: f64,
}

pub fn propagate_const(hamiltonian: &Hamiltonian, psi: &StateVector, dt: f64) -> Result<StateVector> {
    if psi.dim() != hamiltonian.dim() {
        return Err(Error::DimensionMismatch {
            expected: hamiltonian.dim(),
            got: psi.dim(),
        });
    }
    if !(dt >= 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("time step must be finite and non-negative, got {dt}")));
    }
    if dt == 0.0 {
        return Ok(psi.clone());
    }
    let propagator = Propagator::new(&hamiltonian.matrix);
    Ok(StateVector::from_raw(psi.atom_count(), propagator.apply(psi.amplitudes(), dt)))
}

/// Validates and sorts checkpoint times; values past `T` by rounding only
/// (relative `1e-12`) are pulled back to `T`.
fn sorted_checkpoints(times: &[f64], total: f64) -> Result<Vec<f64>> {
    let slack = total * (1.0 + 1e-12);
    if let Some(bad) = times.iter().find(|t| !(**t >= 0.0 && **t <= slack)) {
        return Err(Error::InvalidArgument(format!("checkpoint time {bad} outside [0, {total}]")));
    }
    let mut sorted: Vec<f64> = times.iter().map(|t| t.min(total)).collect();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted)
}

fn check_state(atom_count: usize, psi: &StateVector) -> Result<()> {
    if psi.atom_count() != atom_count {
        return Err(Error::DimensionMismatch {
            expected: atom_count + 1,
            got: psi.dim(),
        });
    }
    Ok(())
}

struct Tracker<'a> {
    workspace: &'a Workspace,
    checkpoints: Vec<(f64, StateVector)>,
    norm_drift: f64,
}

impl Tracker<'_> {
    fn observe(&mut self, state: &DVector<C64>) {
        self.norm_drift = self.norm_drift.max((1.0 - state.norm_squared()).abs());
    }

    fn record(&mut self, t: f64, state: &DVector<C64>) {
        self.checkpoints.push((t, self.workspace.expand(state)));
    }
}

/// Evolves `psi0` under a piecewise-constant Rabi drive.
///
/// Segment `k` (0-based) is active on `[kT/n, (k+1)T/n)` with
/// `Ω = Λ_k N χ / 2`. A checkpoint falling inside a segment splits it.
pub fn evolve_piecewise(
    atom_count: usize,
    chi: f64,
    schedule: &ControlSchedule,
    psi0: &StateVector,
    checkpoint_times: &[f64],
) -> Result<PropagationResult> {
    schedule.validate()?;
    check_state(atom_count, psi0)?;
    if schedule.atom_count() != atom_count {
        return Err(Error::InvalidSchedule(format!(
            "schedule is for N = {}, evolution for N = {atom_count}",
            schedule.atom_count()
        )));
    }
    let total = schedule.total_time();
    let pending = sorted_checkpoints(checkpoint_times, total)?;
    let workspace = Workspace::covering(atom_count, &[psi0]);
    let mut tracker = Tracker {
        workspace: &workspace,
        checkpoints: Vec::with_capacity(pending.len()),
        norm_drift: 0.0,
    };

    let mut cache: HashMap<u64, Propagator> = HashMap::new();
    let mut state = workspace.reduce(psi0.amplitudes());
    let mut now = 0.0;
    let mut next = pending.iter().copied().peekable();
    let n = schedule.segments();
    for (k, &lambda) in schedule.lambdas().iter().enumerate() {
        let end = if k + 1 == n { total } else { schedule.segment_start(k + 1) };
        let propagator = cache
            .entry(lambda.to_bits())
            .or_insert_with(|| Propagator::new(&workspace.hamiltonian(chi, schedule.omega(k, chi))));
        while let Some(&t) = next.peek() {
            if t < end || (k + 1 == n && t <= end) {
                state = propagator.apply(&state, t - now);
                now = t;
                tracker.observe(&state);
                tracker.record(t, &state);
                next.next();
            } else {
                break;
            }
        }
        state = propagator.apply(&state, end - now);
        now = end;
        tracker.observe(&state);
    }

    Ok(PropagationResult {
        final_state: workspace.expand(&state),
        checkpoints: tracker.checkpoints,
        norm_drift: tracker.norm_drift,
    })
}

/// Step control for [`evolve_swept_with`].
#[derive(Debug, Clone, Copy)]
pub struct SweptOptions {
    /// First trial maximum step; defaults to the widest sample interval.
    pub initial_step: Option<f64>,
    /// Required `1 - |⟨ψ_h|ψ_{h/2}⟩|²` between successive refinements.
    pub tolerance: f64,
    pub max_halvings: u32,
}

impl Default for SweptOptions {
    fn default() -> Self {
        Self {
            initial_step: None,
            tolerance: 1e-6,
            max_halvings: 14,
        }
    }
}

pub fn evolve_swept(
    atom_count: usize,
    chi: f64,
    trajectory: &SweepTrajectory,
    psi0: &StateVector,
    checkpoint_times: &[f64],
) -> Result<PropagationResult> {
    evolve_swept_with(atom_count, chi, trajectory, psi0, checkpoint_times, SweptOptions::default())
}

/// Evolves along a sampled sweep `Ω(t)` (linearly interpolated), freezing the
/// Hamiltonian at the midpoint of every step. The maximum step is halved
/// until the final state moves by less than `options.tolerance` in fidelity.
pub fn evolve_swept_with(
    atom_count: usize,
    chi: f64,
    trajectory: &SweepTrajectory,
    psi0: &StateVector,
    checkpoint_times: &[f64],
    options: SweptOptions,
) -> Result<PropagationResult> {
    trajectory.validate()?;
    check_state(atom_count, psi0)?;
    let total = trajectory.total_time();
    let pending = sorted_checkpoints(checkpoint_times, total)?;
    let workspace = Workspace::covering(atom_count, &[psi0]);

    // Breakpoints: every sample and every checkpoint.
    let mut breaks: Vec<f64> = trajectory.samples().iter().map(|s| s.0).collect();
    breaks.extend(pending.iter().copied());
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let widest = breaks.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let mut step = options.initial_step.unwrap_or(widest).max(f64::MIN_POSITIVE);
    let mut previous = sweep_pass(&workspace, chi, trajectory, psi0, &breaks, &pending, step);
    for _ in 0..options.max_halvings {
        step /= 2.0;
        let refined = sweep_pass(&workspace, chi, trajectory, psi0, &breaks, &pending, step);
        let overlap = previous.final_state.inner(&refined.final_state)?;
        let change = 1.0 - overlap.norm_sqr();
        log::debug!("swept evolution: step {step:.3e}, fidelity change {change:.3e}");
        if change.abs() < options.tolerance {
            return Ok(refined);
        }
        previous = refined;
    }
    let last = sweep_pass(&workspace, chi, trajectory, psi0, &breaks, &pending, step / 2.0);
    let change = 1.0 - previous.final_state.inner(&last.final_state)?.norm_sqr();
    Err(Error::NotConverged { change })
}

fn sweep_pass(
    workspace: &Workspace,
    chi: f64,
    trajectory: &SweepTrajectory,
    psi0: &StateVector,
    breaks: &[f64],
    pending: &[f64],
    max_step: f64,
) -> PropagationResult {
    let mut tracker = Tracker {
        workspace,
        checkpoints: Vec::with_capacity(pending.len()),
        norm_drift: 0.0,
    };
    let mut state = workspace.reduce(psi0.amplitudes());
    let mut next = pending.iter().copied().peekable();
    let drive = trajectory.drive_sign();
    let mut flush = |t: f64, state: &DVector<C64>, tracker: &mut Tracker| {
        while next.peek().is_some_and(|&c| c <= t) {
            tracker.record(t, state);
            next.next();
        }
    };
    flush(breaks[0], &state, &mut tracker);
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let substeps = ((b - a) / max_step).ceil().max(1.0) as usize;
        let h = (b - a) / substeps as f64;
        for s in 0..substeps {
            let mid = a + (s as f64 + 0.5) * h;
            let omega = drive * trajectory.omega_at(mid);
            state = Propagator::new(&workspace.hamiltonian(chi, omega)).apply(&state, h);
            tracker.observe(&state);
        }
        flush(b, &state, &mut tracker);
    }
    PropagationResult {
        final_state: workspace.expand(&state),
        checkpoints: tracker.checkpoints,
        norm_drift: tracker.norm_drift,
    }
}

/// Largest deviation of `P H P` from `H` for a full-basis Hamiltonian.
pub fn hamiltonian_parity_deviation(hamiltonian: &Hamiltonian) -> f64 {
    parity::parity_deviation(&hamiltonian.matrix)
}
