//! Collective spin of `N` two-level atoms in the Dicke basis.
//!
//! States live in the symmetric subspace spanned by `|J, m⟩` with `J = N/2`.
//! Basis index `i` maps to `m = i - J`, so the ordering is `m = -J, ..., +J`
//! and `Jz` is diagonal in ascending order.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Complex, DMatrix, DVector};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Amplitude vector over the Dicke basis of `N` atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<C64>,
    atom_count: usize,
}

impl StateVector {
    /// Accepted deviation of the squared norm from one for externally
    /// supplied amplitudes.
    pub const NORM_TOLERANCE: f64 = 1e-10;

    pub fn new(atom_count: usize, amplitudes: DVector<C64>) -> Result<Self> {
        check_atoms(atom_count, 1)?;
        if amplitudes.len() != atom_count + 1 {
            return Err(Error::DimensionMismatch {
                expected: atom_count + 1,
                got: amplitudes.len(),
            });
        }
        let norm = amplitudes.norm_squared();
        if !norm.is_finite() || (norm - 1.0).abs() > Self::NORM_TOLERANCE {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self {
            amplitudes,
            atom_count,
        })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(atom_count: usize, amplitudes: DVector<C64>) -> Result<Self> {
        check_atoms(atom_count, 1)?;
        if amplitudes.len() != atom_count + 1 {
            return Err(Error::DimensionMismatch {
                expected: atom_count + 1,
                got: amplitudes.len(),
            });
        }
        let norm = amplitudes.norm_squared();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotNormalized(norm));
        }
        let scale = 1.0 / norm.sqrt();
        Ok(Self {
            amplitudes: amplitudes.map(|c| c * scale),
            atom_count,
        })
    }

    pub(crate) fn from_raw(atom_count: usize, amplitudes: DVector<C64>) -> Self {
        debug_assert_eq!(amplitudes.len(), atom_count + 1);
        Self {
            amplitudes,
            atom_count,
        }
    }

    /// The Dicke state `|J, m⟩`.
    pub fn dicke(atom_count: usize, m: f64) -> Result<Self> {
        check_atoms(atom_count, 1)?;
        let index = m_to_index(atom_count, m)
            .ok_or_else(|| Error::InvalidArgument(format!("m = {m} is not in -J..=J for N = {atom_count}")))?;
        let mut amplitudes = DVector::from_element(atom_count + 1, ZERO);
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(Self::from_raw(atom_count, amplitudes))
    }

    pub fn atom_count(&self) -> usize {
        self.atom_count
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// Total spin `J = N/2`.
    pub fn spin_length(&self) -> f64 {
        self.atom_count as f64 / 2.0
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> DVector<C64> {
        self.amplitudes
    }

    /// `m` quantum number of each basis slot, ascending.
    pub fn m_values(&self) -> impl Iterator<Item = f64> + '_ {
        let j = self.spin_length();
        (0..self.dim()).map(move |i| i as f64 - j)
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// Populations `|C_m|²` in basis order.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn mean_jz(&self) -> f64 {
        self.m_values()
            .zip(self.amplitudes.iter())
            .map(|(m, c)| m * c.norm_sqr())
            .sum()
    }

    pub fn mean_jz2(&self) -> f64 {
        self.m_values()
            .zip(self.amplitudes.iter())
            .map(|(m, c)| m * m * c.norm_sqr())
            .sum()
    }

    pub fn variance_jz(&self) -> f64 {
        let mean = self.mean_jz();
        // Clamp the rounding residue of an exactly sharp distribution.
        (self.mean_jz2() - mean * mean).max(0.0)
    }

    /// Image under the mode-exchange parity, `C_m -> C_{-m}`.
    pub fn mirrored(&self) -> StateVector {
        let d = self.dim();
        let amplitudes = DVector::from_fn(d, |i, _| self.amplitudes[d - 1 - i]);
        Self::from_raw(self.atom_count, amplitudes)
    }

    /// Multiplies by a global phase so the first nonzero amplitude is real
    /// and positive.
    pub fn with_canonical_phase(mut self) -> StateVector {
        if let Some(first) = self.amplitudes.iter().find(|c| c.norm_sqr() > 0.0).copied() {
            if first.im != 0.0 || first.re < 0.0 {
                let phase = first.conj() / first.norm();
                self.amplitudes.iter_mut().for_each(|c| *c *= phase);
            }
        }
        self
    }
}

/// Index of `m` in the ascending Dicke ordering, if `m` is a valid quantum
/// number for `N` atoms.
pub fn m_to_index(atom_count: usize, m: f64) -> Option<usize> {
    let shifted = m + atom_count as f64 / 2.0;
    let index = shifted.round();
    if (shifted - index).abs() > 1e-9 || index < 0.0 || index > atom_count as f64 {
        return None;
    }
    Some(index as usize)
}

fn check_atoms(atom_count: usize, min: usize) -> Result<()> {
    if atom_count < min {
        return Err(Error::AtomCount {
            got: atom_count,
            min,
        });
    }
    Ok(())
}

/// Dense `Jx`, `Jy`, `Jz` for spin `J = N/2`.
#[derive(Debug, Clone)]
pub struct SpinOperators {
    pub atom_count: usize,
    pub jx: DMatrix<C64>,
    pub jy: DMatrix<C64>,
    pub jz: DMatrix<C64>,
}

impl SpinOperators {
    /// Largest elementwise residual of the three cyclic commutation
    /// relations `[Ja, Jb] = i Jc`.
    pub fn commutator_residual(&self) -> f64 {
        let i = C64::new(0.0, 1.0);
        let check = |a: &DMatrix<C64>, b: &DMatrix<C64>, c: &DMatrix<C64>| {
            let residual = a * b - b * a - c.map(|z| z * i);
            residual.iter().map(|z| z.norm()).fold(0.0, f64::max)
        };
        check(&self.jx, &self.jy, &self.jz)
            .max(check(&self.jy, &self.jz, &self.jx))
            .max(check(&self.jz, &self.jx, &self.jy))
    }
}

/// `⟨J, m+1|J+|J, m⟩ = sqrt(J(J+1) - m(m+1))`.
pub fn raising_element(spin_length: f64, m: f64) -> f64 {
    (spin_length * (spin_length + 1.0) - m * (m + 1.0)).max(0.0).sqrt()
}

/// Real tridiagonal `Jx` in the Dicke basis.
pub fn jx_matrix(atom_count: usize) -> DMatrix<f64> {
    let d = atom_count + 1;
    let j = atom_count as f64 / 2.0;
    let mut jx = DMatrix::zeros(d, d);
    for i in 0..d - 1 {
        let element = 0.5 * raising_element(j, i as f64 - j);
        jx[(i + 1, i)] = element;
        jx[(i, i + 1)] = element;
    }
    jx
}

/// Diagonal of `Jz`, ascending from `-J`.
pub fn jz_diagonal(atom_count: usize) -> DVector<f64> {
    let j = atom_count as f64 / 2.0;
    DVector::from_fn(atom_count + 1, |i, _| i as f64 - j)
}

pub fn collective_operators(atom_count: usize) -> Result<SpinOperators> {
    check_atoms(atom_count, 1)?;
    let d = atom_count + 1;
    let j = atom_count as f64 / 2.0;
    let mut raising = DMatrix::from_element(d, d, ZERO);
    for i in 0..d - 1 {
        raising[(i + 1, i)] = C64::new(raising_element(j, i as f64 - j), 0.0);
    }
    let lowering = raising.adjoint();
    let jx = (&raising + &lowering).map(|z| z * 0.5);
    let jy = (&raising - &lowering).map(|z| z * C64::new(0.0, -0.5));
    let jz = DMatrix::from_diagonal(&jz_diagonal(atom_count).map(|m| C64::new(m, 0.0)));
    Ok(SpinOperators {
        atom_count,
        jx,
        jy,
        jz,
    })
}

/// `ln(n!)` for `n = 0..=max`, accumulated exactly in log space.
pub(crate) fn ln_factorials(max: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(max + 1);
    let mut acc = 0.0;
    table.push(acc);
    for k in 1..=max {
        acc += (k as f64).ln();
        table.push(acc);
    }
    table
}

/// Real SCS amplitudes `c_m(θ)` for `φ = 0`, in basis order.
fn coherent_magnitudes(atom_count: usize, theta: f64) -> Vec<f64> {
    let n = atom_count;
    let ln_fact = ln_factorials(n);
    let (cos_half, sin_half) = ((theta / 2.0).cos().abs(), (theta / 2.0).sin().abs());
    // x^0 = 1 even when x = 0.
    let ln_pow = |base: f64, exp: usize| if exp == 0 { 0.0 } else { exp as f64 * base.ln() };
    (0..=n)
        .map(|upper| {
            // upper = J + m, lower = J - m
            let lower = n - upper;
            let ln_binom = ln_fact[n] - ln_fact[upper] - ln_fact[lower];
            (0.5 * ln_binom + ln_pow(cos_half, upper) + ln_pow(sin_half, lower)).exp()
        })
        .collect()
}

/// Spin coherent state `|θ, φ⟩` with the `e^{-i(J+m)φ}` phase convention.
pub fn spin_coherent_state(atom_count: usize, theta: f64, phi: f64) -> Result<StateVector> {
    check_atoms(atom_count, 1)?;
    if !(0.0..=std::f64::consts::PI).contains(&theta) || !phi.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "coherent state needs theta in [0, pi] and finite phi, got ({theta}, {phi})"
        )));
    }
    let amplitudes = coherent_magnitudes(atom_count, theta)
        .into_iter()
        .enumerate()
        .map(|(upper, mag)| C64::from_polar(mag, -(upper as f64) * phi))
        .collect::<Vec<_>>();
    let state = StateVector::normalized(atom_count, DVector::from_vec(amplitudes))?;
    Ok(state.with_canonical_phase())
}

/// Parameters of the cat `N_C (|θ, φ⟩ + |π - θ, φ⟩)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatSpec {
    pub atom_count: usize,
    pub theta: f64,
    pub phi: f64,
}

impl CatSpec {
    /// `θ ∈ [0, π/2]`, `φ = 0`. Requires `N ≥ 2` so the quasi-orthogonality
    /// threshold is defined.
    pub fn new(atom_count: usize, theta: f64) -> Result<Self> {
        check_atoms(atom_count, 2)?;
        if !(0.0..=FRAC_PI_2).contains(&theta) {
            return Err(Error::InvalidArgument(format!(
                "cat polar angle must lie in [0, pi/2], got {theta}"
            )));
        }
        Ok(Self {
            atom_count,
            theta,
            phi: 0.0,
        })
    }

    pub fn ghz(atom_count: usize) -> Result<Self> {
        Self::new(atom_count, 0.0)
    }

    pub fn is_quasi_orthogonal(&self) -> bool {
        theta_critical(self.atom_count).map_or(false, |tc| self.theta <= tc)
    }
}

/// Exactly normalized superposition of the two coherent branches.
pub fn cat_state(spec: &CatSpec) -> Result<StateVector> {
    if !spec.is_quasi_orthogonal() {
        log::warn!(
            "theta = {} exceeds the quasi-orthogonality threshold for N = {}",
            spec.theta,
            spec.atom_count
        );
    }
    let n = spec.atom_count;
    let branch = coherent_magnitudes(n, spec.theta);
    // c_m(π - θ) = c_{-m}(θ)
    let amplitudes = (0..=n)
        .map(|i| {
            let mirror = n - i;
            C64::from_polar(branch[i], -(i as f64) * spec.phi)
                + C64::from_polar(branch[mirror], -(i as f64) * spec.phi)
        })
        .collect::<Vec<_>>();
    let state = StateVector::normalized(n, DVector::from_vec(amplitudes))?;
    Ok(state.with_canonical_phase())
}

/// `(|J, -J⟩ + |J, J⟩)/√2`.
pub fn ghz_state(atom_count: usize) -> Result<StateVector> {
    check_atoms(atom_count, 1)?;
    let mut amplitudes = DVector::from_element(atom_count + 1, ZERO);
    amplitudes[0] = C64::new(1.0, 0.0);
    amplitudes[atom_count] = C64::new(1.0, 0.0);
    StateVector::normalized(atom_count, amplitudes)
}

/// Polar angle below which the two coherent branches of a cat are
/// quasi-orthogonal: `asin(2 [((J-1)!)² / (2 (2J)!)]^{1/(2J)})`.
pub fn theta_critical(atom_count: usize) -> Result<f64> {
    check_atoms(atom_count, 2)?;
    let j = atom_count as f64 / 2.0;
    // (J-1)! = Γ(J), half-integer for odd N.
    let ln_ratio = 2.0 * ln_gamma(j) - std::f64::consts::LN_2 - ln_gamma(2.0 * j + 1.0);
    let sine = 2.0 * (ln_ratio / (2.0 * j)).exp();
    Ok(sine.min(1.0).asin())
}

/// `⟨ψ|P|ψ⟩` for the mode-exchange parity `P|J, m⟩ = |J, -m⟩`.
pub fn parity_expectation(state: &StateVector) -> f64 {
    let c = state.amplitudes();
    let d = c.len();
    (0..d).map(|i| (c[i].conj() * c[d - 1 - i]).re).sum()
}
