use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};

use crate::control::ControlSchedule;
use crate::error::{Error, Result};
use crate::parity::Parity;
use crate::propagation::{Propagator, Workspace};
use crate::spin::{spin_coherent_state, StateVector, C64};

/// Fidelity landscape `Λ ↦ |⟨ψ_d|ψ(T)⟩|²` for a fixed `N`, `χ`, `T`, `n` and
/// target, starting from `|π/2, 0⟩`.
///
/// The initial state has even parity, so only the even component of the
/// target contributes and all work happens in the even sector.
#[derive(Debug, Clone)]
pub struct Landscape {
    atom_count: usize,
    chi: f64,
    total_time: f64,
    segments: usize,
    workspace: Workspace,
    initial: DVector<C64>,
    target: DVector<C64>,
    /// `dH/dΛ = Nχ/2 · Jx` in the sector basis.
    drive: DMatrix<f64>,
}

impl Landscape {
    pub fn new(atom_count: usize, chi: f64, total_time: f64, segments: usize, target: &StateVector) -> Result<Self> {
        if atom_count < 2 {
            return Err(Error::AtomCount { got: atom_count, min: 2 });
        }
        if target.atom_count() != atom_count {
            return Err(Error::DimensionMismatch {
                expected: atom_count + 1,
                got: target.dim(),
            });
        }
        if segments == 0 || !(total_time > 0.0 && total_time.is_finite()) {
            return Err(Error::InvalidSchedule(format!(
                "need n >= 1 and T > 0, got n = {segments}, T = {total_time}"
            )));
        }
        if !(chi.is_finite() && chi != 0.0) {
            return Err(Error::InvalidArgument(format!("chi must be finite and nonzero, got {chi}")));
        }
        let workspace = Workspace::sector(atom_count, Parity::Even);
        let initial = workspace.reduce(initial_state(atom_count)?.amplitudes());
        let target = workspace.reduce(target.amplitudes());
        let drive = workspace.jx() * (atom_count as f64 * chi / 2.0);
        Ok(Self {
            atom_count,
            chi,
            total_time,
            segments,
            workspace,
            initial,
            target,
            drive,
        })
    }

    pub fn for_schedule(schedule: &ControlSchedule, chi: f64, target: &StateVector) -> Result<Self> {
        schedule.validate()?;
        Self::new(schedule.atom_count(), chi, schedule.total_time(), schedule.segments(), target)
    }

    pub fn atom_count(&self) -> usize {
        self.atom_count
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn segments(&self) -> usize {
        self.segments
    }

    fn check(&self, lambdas: &[f64]) -> Result<()> {
        if lambdas.len() != self.segments {
            return Err(Error::DimensionMismatch {
                expected: self.segments,
                got: lambdas.len(),
            });
        }
        if lambdas.iter().any(|l| !l.is_finite()) {
            return Err(Error::InvalidSchedule("non-finite amplitude".into()));
        }
        Ok(())
    }

    fn propagator(&self, lambda: f64) -> Propagator {
        let omega = lambda * self.atom_count as f64 * self.chi / 2.0;
        Propagator::new(&self.workspace.hamiltonian(self.chi, omega))
    }

    fn tau(&self) -> f64 {
        self.total_time / self.segments as f64
    }

    /// Final state for the given amplitudes.
    pub fn evolve(&self, lambdas: &[f64]) -> Result<StateVector> {
        self.check(lambdas)?;
        let tau = self.tau();
        let psi = lambdas
            .iter()
            .fold(self.initial.clone(), |psi, &l| self.propagator(l).apply(&psi, tau));
        Ok(self.workspace.expand(&psi))
    }

    pub fn fidelity(&self, lambdas: &[f64]) -> Result<f64> {
        self.check(lambdas)?;
        let tau = self.tau();
        let psi = lambdas
            .iter()
            .fold(self.initial.clone(), |psi, &l| self.propagator(l).apply(&psi, tau));
        Ok(self.target.dotc(&psi).norm_sqr())
    }

    /// `F` and `∂F/∂Λ_k` by one forward and one backward sweep.
    ///
    /// With `a = ⟨ψ_d|ψ(T)⟩` and `λ_k` the target propagated back to the end
    /// of segment `k`, `∂a/∂Λ_k = ⟨λ_k| ∂U_k |ψ_k⟩`, where the derivative of
    /// `U_k = V e^{-iWτ} Vᵀ` is `V (G ∘ VᵀḢV) Vᵀ` with the divided differences
    /// `G_ab = (e^{-iw_aτ} - e^{-iw_bτ}) / (w_a - w_b)`.
    pub fn value_and_gradient(&self, lambdas: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.check(lambdas)?;
        let tau = self.tau();
        let n = self.segments;

        // Forward: keep every segment's spectral data and the eigenbasis
        // coordinates of the state entering it.
        let mut propagators = Vec::with_capacity(n);
        let mut entering = Vec::with_capacity(n);
        let mut psi = self.initial.clone();
        for &l in lambdas {
            let p = self.propagator(l);
            let mut coords = p.to_eigenbasis(&psi);
            entering.push(coords.clone());
            for (c, &w) in coords.iter_mut().zip(p.values.iter()) {
                *c *= C64::from_polar(1.0, -w * tau);
            }
            psi = p.from_eigenbasis(&coords);
            propagators.push(p);
        }
        let overlap = self.target.dotc(&psi);

        let mut gradient = vec![0.0; n];
        let mut costate = self.target.clone();
        for k in (0..n).rev() {
            let p = &propagators[k];
            let phases: Vec<C64> = p.values.iter().map(|&w| C64::from_polar(1.0, -w * tau)).collect();
            let x = p.vectors.tr_mul(&(&self.drive * &p.vectors));
            let lt = p.to_eigenbasis(&costate);
            let pt = &entering[k];
            let d = p.dim();
            let mut total = C64::new(0.0, 0.0);
            for a in 0..d {
                let mut row = C64::new(0.0, 0.0);
                for b in 0..d {
                    let dw = p.values[a] - p.values[b];
                    let g = if dw.abs() < 1e-10 {
                        phases[a] * C64::new(0.0, -tau)
                    } else {
                        (phases[a] - phases[b]) / dw
                    };
                    row += g * x[(a, b)] * pt[b];
                }
                total += lt[a].conj() * row;
            }
            gradient[k] = 2.0 * (overlap.conj() * total).re;
            let mut back = lt;
            for (c, ph) in back.iter_mut().zip(&phases) {
                *c *= ph.conj();
            }
            costate = p.from_eigenbasis(&back);
        }
        Ok((overlap.norm_sqr(), gradient))
    }
}

/// The fixed initial state `|π/2, 0⟩`.
pub fn initial_state(atom_count: usize) -> Result<StateVector> {
    spin_coherent_state(atom_count, FRAC_PI_2, 0.0)
}

/// `-F(T)` for the schedule, with `χ = chi_sign` (unit twisting strength).
pub fn objective(schedule: &ControlSchedule, target: &StateVector) -> Result<f64> {
    let landscape = Landscape::for_schedule(schedule, schedule.chi_sign(), target)?;
    Ok(-landscape.fidelity(schedule.lambdas())?)
}

/// `∂(-F)/∂Λ_k`, with `χ = chi_sign`.
pub fn gradient(schedule: &ControlSchedule, target: &StateVector) -> Result<Vec<f64>> {
    let landscape = Landscape::for_schedule(schedule, schedule.chi_sign(), target)?;
    let (_, g) = landscape.value_and_gradient(schedule.lambdas())?;
    Ok(g.into_iter().map(|x| -x).collect())
}
