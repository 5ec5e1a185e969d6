//! Independent reference computations shared by the integration suites.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use spincat_core::control::Landscape;
use spincat_core::{build_hamiltonian, C64};

/// Dense complex `H = χJz² + ΩJx` in the full Dicke basis.
pub fn dense_hamiltonian(n_atoms: usize, chi: f64, omega: f64) -> DMatrix<C64> {
    build_hamiltonian(n_atoms, chi, omega)
        .unwrap()
        .matrix
        .map(|x| C64::new(x, 0.0))
}

/// Classical fourth-order Runge-Kutta for `i dψ/dt = Hψ` with a fixed step.
pub fn rk4(h: &DMatrix<C64>, psi: &DVector<C64>, duration: f64, step: f64) -> DVector<C64> {
    let minus_i = C64::new(0.0, -1.0);
    let f = |v: &DVector<C64>| (h * v) * minus_i;
    let steps = (duration / step).ceil().max(1.0) as usize;
    let dt = duration / steps as f64;
    let mut y = psi.clone();
    for _ in 0..steps {
        let k1 = f(&y);
        let k2 = f(&(&y + &k1 * C64::from(dt / 2.0)));
        let k3 = f(&(&y + &k2 * C64::from(dt / 2.0)));
        let k4 = f(&(&y + &k3 * C64::from(dt)));
        y += (k1 + k2 * C64::from(2.0) + k3 * C64::from(2.0) + k4) * C64::from(dt / 6.0);
    }
    y
}

/// Piecewise-constant drive `Ω_k = Λ_k N χ / 2` integrated segment by segment.
pub fn rk4_piecewise(
    n_atoms: usize,
    chi: f64,
    total_time: f64,
    lambdas: &[f64],
    psi: &DVector<C64>,
    step: f64,
) -> DVector<C64> {
    let tau = total_time / lambdas.len() as f64;
    lambdas.iter().fold(psi.clone(), |acc, l| {
        let h = dense_hamiltonian(n_atoms, chi, l * n_atoms as f64 * chi / 2.0);
        rk4(&h, &acc, tau, step)
    })
}

/// Central finite differences of `F(Λ)`.
pub fn fd_gradient(landscape: &Landscape, lambdas: &[f64], h: f64) -> Vec<f64> {
    (0..lambdas.len())
        .map(|k| {
            let mut up = lambdas.to_vec();
            let mut down = lambdas.to_vec();
            up[k] += h;
            down[k] -= h;
            (landscape.fidelity(&up).unwrap() - landscape.fidelity(&down).unwrap()) / (2.0 * h)
        })
        .collect()
}

/// `max_k |a_k - b_k| / max_k |b_k|`.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs())) / scale
}
