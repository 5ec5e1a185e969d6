//! Box-constrained BFGS with projected Armijo backtracking.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;

#[derive(Debug, Clone, Copy)]
pub struct BfgsOptions {
    pub lower: f64,
    pub upper: f64,
    /// Stop when the projected gradient norm falls below this.
    pub gradient_tolerance: f64,
    /// Stop when `|Δf| ≤ tol · max(|f|, 1)`.
    pub relative_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            lower: -super::LAMBDA_MAX,
            upper: super::LAMBDA_MAX,
            gradient_tolerance: 1e-8,
            relative_tolerance: 1e-12,
            max_iterations: 500,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    GradientTolerance,
    RelativeChange,
    MaxIterations,
    LineSearchFailed,
}

impl Termination {
    pub fn converged(self) -> bool {
        matches!(self, Termination::GradientTolerance | Termination::RelativeChange)
    }
}

#[derive(Debug, Clone)]
pub struct BfgsResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub history: Vec<f64>,
    pub projected_gradient_norm: f64,
    pub iterations: usize,
    pub termination: Termination,
}

fn project(x: &mut DVector<f64>, lo: f64, hi: f64) {
    x.apply(|v| *v = v.clamp(lo, hi));
}

fn projected_gradient(x: &DVector<f64>, g: &DVector<f64>, lo: f64, hi: f64) -> DVector<f64> {
    let mut step = x - g;
    project(&mut step, lo, hi);
    x - step
}

/// Minimizes `f` over the box `[lower, upper]ⁿ`.
///
/// `f` returns the value and gradient. Components sitting on a bound with the
/// gradient pointing outwards are frozen for the step.
pub fn minimize<F>(mut f: F, x0: &[f64], options: &BfgsOptions) -> Result<BfgsResult>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let (lo, hi) = (options.lower, options.upper);
    let n = x0.len();
    let mut x = DVector::from_column_slice(x0);
    project(&mut x, lo, hi);
    let (mut fx, g) = f(x.as_slice())?;
    let mut g = DVector::from_vec(g);
    let mut inverse_hessian = DMatrix::<f64>::identity(n, n);
    let mut fresh = true;
    let mut history = vec![fx];
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;

    while iterations < options.max_iterations {
        if projected_gradient(&x, &g, lo, hi).norm() <= options.gradient_tolerance {
            termination = Termination::GradientTolerance;
            break;
        }
        let blocked: Vec<bool> = (0..n)
            .map(|i| (x[i] <= lo && g[i] > 0.0) || (x[i] >= hi && g[i] < 0.0))
            .collect();
        let mut direction = -(&inverse_hessian * &g);
        for i in (0..n).filter(|&i| blocked[i]) {
            direction[i] = 0.0;
        }
        if direction.dot(&g) >= 0.0 {
            inverse_hessian.fill_with_identity();
            fresh = true;
            direction = -&g;
            for i in (0..n).filter(|&i| blocked[i]) {
                direction[i] = 0.0;
            }
        }
        let mut alpha = if fresh { 1.0 / direction.norm().max(1.0) } else { 1.0 };

        let mut accepted = None;
        while alpha > 1e-20 {
            let mut trial = &x + &direction * alpha;
            project(&mut trial, lo, hi);
            let s = &trial - &x;
            let (ft, gt) = f(trial.as_slice())?;
            if ft <= fx + 1e-4 * g.dot(&s) {
                accepted = Some((trial, s, ft, DVector::from_vec(gt)));
                break;
            }
            alpha *= 0.5;
        }
        let Some((trial, s, ft, gt)) = accepted else {
            termination = Termination::LineSearchFailed;
            break;
        };
        iterations += 1;
        let y = &gt - &g;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            if fresh {
                inverse_hessian *= sy / y.dot(&y);
                fresh = false;
            }
            let rho = 1.0 / sy;
            let hy = &inverse_hessian * &y;
            let yhy = y.dot(&hy);
            inverse_hessian += (&s * s.transpose()) * (rho * rho * yhy + rho) - (&hy * s.transpose() + &s * hy.transpose()) * rho;
        }
        let change = (fx - ft).abs();
        x = trial;
        g = gt;
        fx = ft;
        history.push(fx);
        if change <= options.relative_tolerance * fx.abs().max(1.0) {
            termination = Termination::RelativeChange;
            break;
        }
    }
    Ok(BfgsResult {
        projected_gradient_norm: projected_gradient(&x, &g, lo, hi).norm(),
        x: x.as_slice().to_vec(),
        value: fx,
        history,
        iterations,
        termination,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (a, b) = (x[0], x[1]);
        let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
        let g = vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)];
        Ok((f, g))
    }

    #[test]
    fn finds_rosenbrock_minimum() {
        let result = minimize(rosenbrock, &[-1.2, 1.0], &BfgsOptions::default()).unwrap();
        assert!(result.termination.converged());
        assert!((result.x[0] - 1.0).abs() < 1e-5 && (result.x[1] - 1.0).abs() < 1e-5);
        assert!(result.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn respects_bounds() {
        let options = BfgsOptions {
            lower: -0.5,
            upper: 0.5,
            ..BfgsOptions::default()
        };
        let quadratic = |x: &[f64]| Ok(((x[0] - 2.0).powi(2) + (x[1] + 0.1).powi(2), vec![2.0 * (x[0] - 2.0), 2.0 * (x[1] + 0.1)]));
        let result = minimize(quadratic, &[0.0, 0.0], &options).unwrap();
        assert_eq!(result.x[0], 0.5);
        assert!((result.x[1] + 0.1).abs() < 1e-6);
        assert!(result.projected_gradient_norm < 1e-6);
    }
}
