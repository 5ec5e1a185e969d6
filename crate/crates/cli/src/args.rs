use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "spincat", version, about = "Spin cat state preparation and phase-sensitivity analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build an analytic cat state and report its metrology figures.
    Cat(CatArgs),
    /// Prepare cats by an adiabatic Rabi sweep (chi < 0).
    Adiabatic(AdiabaticArgs),
    /// Optimize a piecewise-constant Rabi drive toward a cat.
    Optimize(OptimizeArgs),
    /// Minimal preparation times and QCRB scaling over N and theta.
    Scan(ScanArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Directory receiving the CSV outputs (created if missing).
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Print the metrology report rows to stdout.
    #[arg(long)]
    pub summary: bool,
}

#[derive(Debug, Args)]
pub struct CatArgs {
    #[arg(long)]
    pub n_atoms: usize,
    /// Polar angle in radians, within [0, pi/2].
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct AdiabaticArgs {
    #[arg(long, default_value_t = 100)]
    pub n_atoms: usize,
    /// Adiabaticity parameter; must be positive.
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: f64,
    /// Target polar angles (radians), comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_values_t = default_thetas())]
    pub theta: Vec<f64>,
    /// Initial Rabi frequency in units of N|chi|.
    #[arg(long, default_value_t = 2.0)]
    pub omega_start: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long, default_value_t = 100)]
    pub n_atoms: usize,
    /// Total evolution time chi*T.
    #[arg(long, allow_negative_numbers = true)]
    pub chi_t: f64,
    #[arg(long, default_value_t = 5)]
    pub segments: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta: f64,
    #[arg(long, default_value_t = 16)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Samples of the fidelity trace along the optimized drive.
    #[arg(long, default_value_t = 200)]
    pub trace_points: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Atom numbers, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n_atoms: Vec<usize>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_values_t = [0.0])]
    pub theta: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    pub segments: usize,
    #[arg(long, default_value_t = 16)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.99)]
    pub floor: f64,
    /// First probed chi*T of the ascending search.
    #[arg(long, default_value_t = 0.05)]
    pub t_start: f64,
    #[arg(long, default_value_t = 0.5)]
    pub t_max: f64,
    #[command(flatten)]
    pub common: Common,
}

fn default_thetas() -> Vec<f64> {
    vec![0.0, FRAC_PI_6, FRAC_PI_4, FRAC_PI_3]
}

/// Argument problems detected before any computation starts.
#[derive(Debug)]
pub struct Invalid(pub String);

fn ensure(ok: bool, message: impl FnOnce() -> String) -> Result<(), Invalid> {
    if ok {
        Ok(())
    } else {
        Err(Invalid(message()))
    }
}

fn check_theta(theta: f64) -> Result<(), Invalid> {
    ensure((0.0..=FRAC_PI_2).contains(&theta), || format!("theta must lie in [0, pi/2], got {theta}"))
}

fn check_atoms(n: usize) -> Result<(), Invalid> {
    ensure(n >= 2, || format!("--n-atoms must be at least 2, got {n}"))
}

impl Command {
    pub fn validate(&self) -> Result<(), Invalid> {
        match self {
            Command::Cat(a) => {
                check_atoms(a.n_atoms)?;
                check_theta(a.theta)
            }
            Command::Adiabatic(a) => {
                check_atoms(a.n_atoms)?;
                ensure(a.epsilon > 0.0 && a.epsilon.is_finite(), || {
                    format!("--epsilon must be positive, got {}", a.epsilon)
                })?;
                ensure(a.omega_start > 0.0 && a.omega_start.is_finite(), || {
                    format!("--omega-start must be positive, got {}", a.omega_start)
                })?;
                a.theta.iter().try_for_each(|&t| check_theta(t))
            }
            Command::Optimize(a) => {
                check_atoms(a.n_atoms)?;
                check_theta(a.theta)?;
                ensure(a.chi_t > 0.0 && a.chi_t.is_finite(), || format!("--chi-t must be positive, got {}", a.chi_t))?;
                ensure(a.segments >= 1, || "--segments must be at least 1".into())?;
                ensure(a.restarts >= 1, || "--restarts must be at least 1".into())?;
                ensure(a.trace_points >= 2, || "--trace-points must be at least 2".into())
            }
            Command::Scan(a) => {
                ensure(!a.n_atoms.is_empty(), || "--n-atoms list is empty".into())?;
                ensure(!a.theta.is_empty(), || "--theta list is empty".into())?;
                a.n_atoms.iter().try_for_each(|&n| check_atoms(n))?;
                a.theta.iter().try_for_each(|&t| check_theta(t))?;
                ensure(a.segments >= 1, || "--segments must be at least 1".into())?;
                ensure(a.restarts >= 1, || "--restarts must be at least 1".into())?;
                ensure(a.floor > 0.0 && a.floor <= 1.0, || format!("--floor must lie in (0, 1], got {}", a.floor))?;
                ensure(a.t_start > 0.0 && a.t_start <= a.t_max, || {
                    format!("need 0 < --t-start <= --t-max, got {} and {}", a.t_start, a.t_max)
                })
            }
        }
    }
}
