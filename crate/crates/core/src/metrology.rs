//! Phase-estimation figures of merit for `e^{-iφJz}` encoding.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::spin::{parity_expectation, StateVector};
use crate::stats::{linear_fit, LinearFit};

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}

/// Quantum Fisher information `4 Var(Jz)` of a pure state.
pub fn qfi_phase_encoding(psi: &StateVector) -> f64 {
    4.0 * psi.variance_jz()
}

/// Quantum Cramér-Rao bound `1/√F^Q`.
pub fn qcrb(qfi: f64) -> Result<f64> {
    if qfi.is_nan() || qfi < 0.0 {
        return Err(Error::InvalidArgument(format!("QFI must be non-negative, got {qfi}")));
    }
    if qfi == 0.0 {
        return Err(Error::UnboundedPrecision);
    }
    Ok(qfi.sqrt().recip())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetrologyReport {
    pub fidelity: f64,
    pub qfi: f64,
    /// `None` when the QFI vanishes.
    pub qcrb: Option<f64>,
    pub parity: f64,
    pub variance_jz: f64,
    pub mean_jz: f64,
}

impl MetrologyReport {
    pub fn assess(state: &StateVector, target: &StateVector) -> Result<Self> {
        let qfi = qfi_phase_encoding(state);
        let qcrb = match qcrb(qfi) {
            Ok(v) => Some(v),
            Err(Error::UnboundedPrecision) => None,
            Err(e) => return Err(e),
        };
        Ok(Self {
            fidelity: fidelity(state, target)?,
            qfi,
            qcrb,
            parity: parity_expectation(state),
            variance_jz: state.variance_jz(),
            mean_jz: state.mean_jz(),
        })
    }
}

/// One row of a Heisenberg-scaling comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRow {
    pub atom_count: usize,
    pub qcrb: f64,
    /// `1/(N cos θ)`.
    pub analytic: f64,
    pub relative_deviation: f64,
}

#[derive(Debug, Clone)]
pub struct ScalingTable {
    pub theta: f64,
    pub rows: Vec<ScalingRow>,
    /// Least-squares fit of `ln Δφ_Q` against `ln N`; needs two or more rows.
    pub fit: Option<LinearFit>,
}

pub fn scaling_scan(states: &BTreeMap<usize, StateVector>, theta: f64) -> Result<ScalingTable> {
    let mut rows = Vec::with_capacity(states.len());
    for (&n, state) in states {
        if state.atom_count() != n {
            return Err(Error::DimensionMismatch {
                expected: n + 1,
                got: state.dim(),
            });
        }
        let bound = qcrb(qfi_phase_encoding(state))?;
        let analytic = 1.0 / (n as f64 * theta.cos());
        rows.push(ScalingRow {
            atom_count: n,
            qcrb: bound,
            analytic,
            relative_deviation: (bound - analytic) / analytic,
        });
    }
    let fit = (rows.len() >= 2).then(|| {
        let x: Vec<f64> = rows.iter().map(|r| (r.atom_count as f64).ln()).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.qcrb.ln()).collect();
        linear_fit(&x, &y)
    });
    Ok(ScalingTable {
        theta,
        rows,
        fit: fit.transpose()?,
    })
}
