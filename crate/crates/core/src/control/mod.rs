//! Optimal control of the piecewise twist-and-turn drive.

mod bfgs;
mod objective;
mod schedule;

pub use bfgs::{minimize, BfgsOptions, BfgsResult, Termination};
pub use objective::{gradient, initial_state, objective, Landscape};
pub use schedule::{ControlSchedule, LAMBDA_MAX};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spin::StateVector;

/// Deterministic starting points tried before the random ones: the resonant
/// constant drive, descending ramps `(first, last)`, then other constants.
const RAMPS: [(f64, f64); 5] = [(2.0, 0.5), (2.5, 0.5), (1.5, 0.5), (3.0, 1.0), (2.0, 1.0)];
const CONSTANTS: [f64; 3] = [0.5, 1.5, 2.0];

/// Number of deterministic starts preceding the random draws.
pub const STRUCTURED_STARTS: usize = 1 + RAMPS.len() + CONSTANTS.len();

fn ramp(first: f64, last: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![first];
    }
    (0..n).map(|k| first + (last - first) * k as f64 / (n - 1) as f64).collect()
}

/// Starting point of restart `index`.
///
/// Random restarts draw `Λ_k ~ U[-2, 2]` from a ChaCha8 stream seeded with
/// `seed` and positioned on stream `index`, so every restart is reproducible
/// on its own.
pub fn starting_point(segments: usize, index: usize, seed: u64) -> Vec<f64> {
    match index {
        0 => vec![1.0; segments],
        i if i <= RAMPS.len() => {
            let (a, b) = RAMPS[i - 1];
            ramp(a, b, segments)
        }
        i if i < STRUCTURED_STARTS => vec![CONSTANTS[i - 1 - RAMPS.len()]; segments],
        i => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            (0..segments).map(|_| rng.random_range(-2.0..=2.0)).collect()
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptimizeOptions {
    pub restarts: usize,
    pub seed: u64,
    pub bfgs: BfgsOptions,
    /// Extra starting points tried after the regular restarts.
    pub warm_starts: Vec<Vec<f64>>,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            restarts: 16,
            seed: 0,
            bfgs: BfgsOptions::default(),
            warm_starts: Vec::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RestartSummary {
    pub start: Vec<f64>,
    pub fidelity: f64,
    pub iterations: usize,
    pub termination: Termination,
}

#[derive(Debug, Clone)]
pub struct OptimizationOutcome {
    pub best_schedule: ControlSchedule,
    pub best_fidelity: f64,
    pub restarts_used: usize,
    /// `-F` after every accepted step of the winning restart.
    pub objective_history: Vec<f64>,
    pub gradient_norm_final: f64,
    /// Set when no restart met a convergence criterion.
    pub warning: bool,
    pub restarts: Vec<RestartSummary>,
}

pub fn optimize(
    atom_count: usize,
    chi: f64,
    total_time: f64,
    segments: usize,
    target: &StateVector,
    restarts: usize,
    seed: u64,
) -> Result<OptimizationOutcome> {
    let options = OptimizeOptions {
        restarts,
        seed,
        ..OptimizeOptions::default()
    };
    optimize_with(atom_count, chi, total_time, segments, target, &options)
}

/// Multi-start maximization of `F(T)` over the segment amplitudes.
///
/// Restarts run in parallel; the best one wins, ties going to the lowest
/// restart index, so the outcome depends on `seed` only.
pub fn optimize_with(
    atom_count: usize,
    chi: f64,
    total_time: f64,
    segments: usize,
    target: &StateVector,
    options: &OptimizeOptions,
) -> Result<OptimizationOutcome> {
    if options.restarts == 0 {
        return Err(Error::InvalidArgument("at least one restart is required".into()));
    }
    let landscape = Landscape::new(atom_count, chi, total_time, segments, target)?;
    let starts: Vec<Vec<f64>> = (0..options.restarts)
        .map(|i| starting_point(segments, i, options.seed))
        .chain(options.warm_starts.iter().cloned())
        .collect();
    if let Some(bad) = starts.iter().find(|s| s.len() != segments) {
        return Err(Error::DimensionMismatch {
            expected: segments,
            got: bad.len(),
        });
    }

    let runs: Vec<BfgsResult> = starts
        .par_iter()
        .map(|start| {
            minimize(
                |x| {
                    let (f, g) = landscape.value_and_gradient(x)?;
                    Ok((-f, g.into_iter().map(|v| -v).collect()))
                },
                start,
                &options.bfgs,
            )
        })
        .collect::<Result<_>>()?;

    let winner = runs
        .iter()
        .enumerate()
        .fold(0, |best, (i, r)| if r.value < runs[best].value { i } else { best });
    let best = &runs[winner];
    let warning = runs.iter().all(|r| !r.termination.converged());
    if warning {
        log::warn!("no restart converged; returning the best point found");
    }
    let best_schedule = ControlSchedule::new(atom_count, total_time, best.x.clone())?;
    Ok(OptimizationOutcome {
        best_fidelity: landscape.fidelity(&best.x)?,
        best_schedule,
        restarts_used: runs.len(),
        objective_history: best.history.clone(),
        gradient_norm_final: best.projected_gradient_norm,
        warning,
        restarts: starts
            .into_iter()
            .zip(&runs)
            .map(|(start, r)| RestartSummary {
                start,
                fidelity: -r.value,
                iterations: r.iterations,
                termination: r.termination,
            })
            .collect(),
    })
}

#[derive(Debug, Clone)]
pub struct ScanOptions {
    pub fidelity_floor: f64,
    /// Final grid spacing in `χT`.
    pub resolution: f64,
    /// Spacing of the ascending search that brackets the minimal time.
    pub coarse_step: f64,
    /// First coarse probe; `None` starts at `coarse_step`.
    pub t_start: Option<f64>,
    pub t_max: f64,
    pub optimize: OptimizeOptions,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            fidelity_floor: 0.99,
            resolution: 1e-3,
            coarse_step: 1e-2,
            t_start: None,
            t_max: 0.5,
            optimize: OptimizeOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MinimalTime {
    pub total_time: f64,
    pub outcome: OptimizationOutcome,
    /// Every probe as `(T, best F)`, in probing order.
    pub probes: Vec<(f64, f64)>,
}

pub fn minimal_time_scan(
    atom_count: usize,
    chi: f64,
    segments: usize,
    target: &StateVector,
    fidelity_floor: f64,
) -> Result<MinimalTime> {
    let options = ScanOptions {
        fidelity_floor,
        ..ScanOptions::default()
    };
    minimal_time_scan_with(atom_count, chi, segments, target, &options)
}

/// Smallest grid time whose optimized fidelity reaches the floor.
///
/// With `n` fixed the optimal fidelity is not monotone in `T` over long
/// horizons, so the search walks up from `t_start` in `coarse_step`
/// increments until the floor is met (or down, if the first probe already
/// meets it) and then bisects the last bracket on the `resolution` grid. Every probe is a full multi-start optimization,
/// additionally warm-started from the best amplitudes at the neighbouring
/// probes.
pub fn minimal_time_scan_with(
    atom_count: usize,
    chi: f64,
    segments: usize,
    target: &StateVector,
    options: &ScanOptions,
) -> Result<MinimalTime> {
    if !(options.resolution > 0.0 && options.coarse_step >= options.resolution && options.t_max >= options.coarse_step) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < resolution <= coarse step <= t_max, got {}, {}, {}",
            options.resolution, options.coarse_step, options.t_max
        )));
    }
    if !(options.fidelity_floor > 0.0 && options.fidelity_floor <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "fidelity floor must lie in (0, 1], got {}",
            options.fidelity_floor
        )));
    }
    let mut probes = Vec::new();
    let mut probe = |k: usize, warm: Vec<Vec<f64>>| -> Result<OptimizationOutcome> {
        let t = k as f64 * options.resolution;
        let mut opts = options.optimize.clone();
        opts.warm_starts.extend(warm);
        let outcome = optimize_with(atom_count, chi, t, segments, target, &opts)?;
        log::info!("scan N = {atom_count}: T = {t:.4}, F = {:.6}", outcome.best_fidelity);
        probes.push((t, outcome.best_fidelity));
        Ok(outcome)
    };
    let passes = |o: &OptimizationOutcome| o.best_fidelity >= options.fidelity_floor;

    let stride = (options.coarse_step / options.resolution).round() as usize;
    let k_max = (options.t_max / options.resolution).round() as usize;
    let k_start = options
        .t_start
        .map_or(stride, |t| (t / options.resolution).round() as usize)
        .clamp(1, k_max);
    let unreachable = |best: f64| Error::FloorUnreachable {
        floor: options.fidelity_floor,
        t_max: options.t_max,
        best,
    };

    let first = probe(k_start, Vec::new())?;
    let mut best_seen = first.best_fidelity;
    let (mut lo, mut lo_lambdas, mut hi, mut hi_outcome);
    if passes(&first) {
        // Walk down until a probe fails or the origin is reached.
        (hi, hi_outcome) = (k_start, first);
        loop {
            if hi <= stride {
                (lo, lo_lambdas) = (0, None);
                break;
            }
            let k = hi - stride;
            let outcome = probe(k, vec![hi_outcome.best_schedule.lambdas().to_vec()])?;
            if passes(&outcome) {
                (hi, hi_outcome) = (k, outcome);
            } else {
                (lo, lo_lambdas) = (k, Some(outcome.best_schedule.lambdas().to_vec()));
                break;
            }
        }
    } else {
        (lo, lo_lambdas) = (k_start, Some(first.best_schedule.lambdas().to_vec()));
        loop {
            let k = lo + stride;
            if k > k_max {
                return Err(unreachable(best_seen));
            }
            let outcome = probe(k, lo_lambdas.iter().cloned().collect())?;
            best_seen = best_seen.max(outcome.best_fidelity);
            if passes(&outcome) {
                (hi, hi_outcome) = (k, outcome);
                break;
            }
            (lo, lo_lambdas) = (k, Some(outcome.best_schedule.lambdas().to_vec()));
        }
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        let mut warm = vec![hi_outcome.best_schedule.lambdas().to_vec()];
        warm.extend(lo_lambdas.clone());
        let outcome = probe(mid, warm)?;
        if passes(&outcome) {
            hi = mid;
            hi_outcome = outcome;
        } else {
            lo = mid;
            lo_lambdas = Some(outcome.best_schedule.lambdas().to_vec());
        }
    }
    Ok(MinimalTime {
        total_time: hi as f64 * options.resolution,
        outcome: hi_outcome,
        probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::ghz_state;

    #[test]
    fn starting_points_are_reproducible() {
        assert_eq!(starting_point(3, 0, 1), vec![1.0; 3]);
        assert_eq!(starting_point(3, 1, 1), vec![2.0, 1.25, 0.5]);
        assert_eq!(starting_point(4, 12, 9), starting_point(4, 12, 9));
        assert_ne!(starting_point(4, 12, 9), starting_point(4, 13, 9));
        assert_ne!(starting_point(4, 12, 9), starting_point(4, 12, 10));
        assert!(starting_point(50, 20, 3).iter().all(|l| l.abs() <= 2.0));
    }

    #[test]
    fn optimized_fidelity_replays() {
        let target = ghz_state(10).unwrap();
        let outcome = optimize(10, 1.0, 0.4, 3, &target, 3, 5).unwrap();
        let replay = -objective(&outcome.best_schedule, &target).unwrap();
        assert!((replay - outcome.best_fidelity).abs() < 1e-10);
        assert!(outcome.best_fidelity >= outcome.restarts.iter().map(|r| r.fidelity).fold(0.0, f64::max) - 1e-12);
        assert!(outcome.best_schedule.max_amplitude() <= LAMBDA_MAX);
    }

    #[test]
    fn zero_restarts_rejected() {
        let target = ghz_state(10).unwrap();
        assert!(optimize(10, 1.0, 0.4, 3, &target, 0, 5).is_err());
    }
}
