//! Mode-exchange parity sectors of the Dicke basis.
//!
//! The even sector is spanned by `(|J, m⟩ + |J, -m⟩)/√2` for `m > 0` plus
//! `|J, 0⟩` when `N` is even; the odd sector by `(|J, m⟩ - |J, -m⟩)/√2`.
//! Sector basis vectors are ordered by `|m|` ascending.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, DVector};

use crate::spin::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

/// One parity sector together with its embedding into the full basis.
#[derive(Debug, Clone)]
pub struct ParitySector {
    atom_count: usize,
    parity: Parity,
    /// Full-basis index pairs `(upper, lower)` with `upper >= lower`; equal
    /// for the self-mirrored `m = 0` slot.
    pairs: Vec<(usize, usize)>,
}

impl ParitySector {
    pub fn new(atom_count: usize, parity: Parity) -> Self {
        let d = atom_count + 1;
        let pairs = (d / 2..d)
            .map(|upper| (upper, d - 1 - upper))
            .filter(|&(upper, lower)| upper != lower || parity == Parity::Even)
            .collect();
        Self {
            atom_count,
            parity,
            pairs,
        }
    }

    pub fn atom_count(&self) -> usize {
        self.atom_count
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn dim(&self) -> usize {
        self.pairs.len()
    }

    /// Full-basis matrix whose columns are the sector basis vectors.
    pub fn basis(&self) -> DMatrix<f64> {
        let mut basis = DMatrix::zeros(self.atom_count + 1, self.dim());
        let sign = self.parity.sign();
        for (k, &(upper, lower)) in self.pairs.iter().enumerate() {
            if upper == lower {
                basis[(upper, k)] = 1.0;
            } else {
                basis[(upper, k)] = FRAC_1_SQRT_2;
                basis[(lower, k)] = sign * FRAC_1_SQRT_2;
            }
        }
        basis
    }

    /// Sector coordinates of a full-basis vector (orthogonal projection).
    pub fn project(&self, full: &DVector<C64>) -> DVector<C64> {
        let sign = self.parity.sign();
        DVector::from_iterator(
            self.dim(),
            self.pairs.iter().map(|&(upper, lower)| {
                if upper == lower {
                    full[upper]
                } else {
                    (full[upper] + full[lower] * sign) * FRAC_1_SQRT_2
                }
            }),
        )
    }

    pub fn embed(&self, reduced: &DVector<C64>) -> DVector<C64> {
        let sign = self.parity.sign();
        let mut full = DVector::from_element(self.atom_count + 1, C64::new(0.0, 0.0));
        for (k, &(upper, lower)) in self.pairs.iter().enumerate() {
            if upper == lower {
                full[upper] = reduced[k];
            } else {
                full[upper] = reduced[k] * FRAC_1_SQRT_2;
                full[lower] = reduced[k] * (sign * FRAC_1_SQRT_2);
            }
        }
        full
    }

    pub fn embed_real(&self, reduced: &DVector<f64>) -> DVector<f64> {
        &self.basis() * reduced
    }

    /// `Bᵀ A B` for a full-basis real matrix `A`.
    pub fn reduce_matrix(&self, full: &DMatrix<f64>) -> DMatrix<f64> {
        let basis = self.basis();
        basis.transpose() * full * basis
    }
}

/// Largest elementwise deviation of `P A P` from `A`.
pub fn parity_deviation(matrix: &DMatrix<f64>) -> f64 {
    let d = matrix.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            worst = worst.max((matrix[(i, j)] - matrix[(d - 1 - i, d - 1 - j)]).abs());
        }
    }
    worst
}
