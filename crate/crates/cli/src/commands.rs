use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use spincat_core::adiabatic::{run_adiabatic_with, FidelityTrace, SweepConfig};
use spincat_core::control::{initial_state, minimal_time_scan_with, optimize_with, OptimizeOptions, ScanOptions};
use spincat_core::io::{self, LedgerRecord};
use spincat_core::{cat_state, evolve_piecewise, scaling_scan, CatSpec, MetrologyReport, StateVector};

use crate::args::{AdiabaticArgs, CatArgs, Common, OptimizeArgs, ScanArgs};

/// Name of the append-only results ledger inside the output directory.
pub const LEDGER_FILE: &str = "results.csv";

/// How a command that produced its outputs finished.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Completion {
    Clean,
    /// Outputs were written but a convergence warning was raised.
    Degraded,
}

fn tag(n_atoms: usize, theta: f64) -> String {
    format!("N{n_atoms}_theta{theta:.4}")
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let file = File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
    log::info!("writing {}", path.display());
    Ok(BufWriter::new(file))
}

fn prepare(common: &Common) -> Result<PathBuf> {
    fs::create_dir_all(&common.out_dir)
        .with_context(|| format!("cannot create output directory {}", common.out_dir.display()))?;
    Ok(common.out_dir.clone())
}

fn print_reports(rows: &[(usize, f64, MetrologyReport)]) -> Result<()> {
    io::write_reports(std::io::stdout().lock(), rows)?;
    Ok(())
}

pub fn cat(args: &CatArgs) -> Result<Completion> {
    let dir = prepare(&args.common)?;
    let spec = CatSpec::new(args.n_atoms, args.theta)?;
    let state = cat_state(&spec)?;
    let report = MetrologyReport::assess(&state, &state)?;
    let name = tag(args.n_atoms, args.theta);
    io::write_state(create(&dir, &format!("cat_{name}.csv"))?, &state)?;
    let rows = [(args.n_atoms, args.theta, report)];
    io::write_reports(create(&dir, &format!("report_cat_{name}.csv"))?, &rows)?;
    if args.common.summary {
        print_reports(&rows)?;
    }
    Ok(Completion::Clean)
}

pub fn adiabatic(args: &AdiabaticArgs) -> Result<Completion> {
    let dir = prepare(&args.common)?;
    let chi = -1.0;
    let targets = args
        .theta
        .iter()
        .map(|&t| CatSpec::new(args.n_atoms, t))
        .collect::<Result<Vec<_>, _>>()?;
    let config = SweepConfig {
        omega_start_factor: args.omega_start,
        ..SweepConfig::default()
    };
    let run = run_adiabatic_with(args.n_atoms, chi, args.epsilon, &targets, &config)?;
    let name = format!("N{}_eps{}", args.n_atoms, args.epsilon);
    io::write_trajectory(create(&dir, &format!("trajectory_{name}.csv"))?, &run.trajectory)?;
    io::write_fidelity_traces(create(&dir, &format!("fidelity_{name}.csv"))?, &run.traces)?;

    let mut summary = Vec::new();
    let mut rows = Vec::new();
    for (trace, spec) in run.traces.iter().zip(&targets) {
        let (t_best, f_best) = trace.best();
        summary.push(vec![
            args.n_atoms.to_string(),
            args.epsilon.to_string(),
            run.total_time().to_string(),
            trace.theta.to_string(),
            f_best.to_string(),
            t_best.to_string(),
        ]);
        rows.push((args.n_atoms, trace.theta, MetrologyReport::assess(&run.final_state, &cat_state(spec)?)?));
    }
    io::write_table(
        create(&dir, &format!("summary_{name}.csv"))?,
        &["N", "epsilon", "total_time", "theta", "best_fidelity", "best_time"],
        &summary,
    )?;
    io::write_reports(create(&dir, &format!("report_{name}.csv"))?, &rows)?;
    if args.common.summary {
        print_reports(&rows)?;
    }
    Ok(Completion::Clean)
}

fn trace_along(
    n_atoms: usize,
    schedule: &spincat_core::ControlSchedule,
    target: &StateVector,
    theta: f64,
    points: usize,
) -> Result<FidelityTrace> {
    let total = schedule.total_time();
    let times: Vec<f64> = (0..points).map(|k| total * k as f64 / (points - 1) as f64).collect();
    let run = evolve_piecewise(n_atoms, 1.0, schedule, &initial_state(n_atoms)?, &times)?;
    let samples = run
        .checkpoints
        .iter()
        .map(|(t, s)| Ok((*t, target.inner(s)?.norm_sqr())))
        .collect::<Result<_, spincat_core::Error>>()?;
    Ok(FidelityTrace { theta, samples })
}

pub fn optimize(args: &OptimizeArgs) -> Result<Completion> {
    let dir = prepare(&args.common)?;
    let target = cat_state(&CatSpec::new(args.n_atoms, args.theta)?)?;
    let options = OptimizeOptions {
        restarts: args.restarts,
        seed: args.seed,
        ..OptimizeOptions::default()
    };
    let outcome = optimize_with(args.n_atoms, 1.0, args.chi_t, args.segments, &target, &options)?;
    let name = format!("{}_n{}_chiT{}", tag(args.n_atoms, args.theta), args.segments, args.chi_t);
    io::write_schedule(create(&dir, &format!("schedule_{name}.csv"))?, &outcome.best_schedule)?;
    let trace = trace_along(args.n_atoms, &outcome.best_schedule, &target, args.theta, args.trace_points)?;
    io::write_fidelity_traces(create(&dir, &format!("fidelity_{name}.csv"))?, &[trace])?;
    let state = evolve_piecewise(args.n_atoms, 1.0, &outcome.best_schedule, &initial_state(args.n_atoms)?, &[])?
        .final_state;
    io::write_state(create(&dir, &format!("state_{name}.csv"))?, &state)?;
    io::append_ledger(
        &dir.join(LEDGER_FILE),
        &LedgerRecord {
            atom_count: args.n_atoms,
            segments: args.segments,
            chi_t: args.chi_t,
            theta: args.theta,
            fidelity: outcome.best_fidelity,
            restarts: outcome.restarts_used,
            seed: args.seed,
        },
    )?;
    let rows = [(args.n_atoms, args.theta, MetrologyReport::assess(&state, &target)?)];
    io::write_reports(create(&dir, &format!("report_{name}.csv"))?, &rows)?;
    if args.common.summary {
        print_reports(&rows)?;
    }
    if outcome.warning {
        log::warn!("no restart converged; best fidelity {}", outcome.best_fidelity);
        return Ok(Completion::Degraded);
    }
    Ok(Completion::Clean)
}

struct Cell {
    n_atoms: usize,
    theta: f64,
    result: Result<(f64, f64, StateVector), String>,
}

pub fn scan(args: &ScanArgs) -> Result<Completion> {
    let dir = prepare(&args.common)?;
    let options = ScanOptions {
        fidelity_floor: args.floor,
        t_start: Some(args.t_start),
        t_max: args.t_max,
        optimize: OptimizeOptions {
            restarts: args.restarts,
            seed: args.seed,
            ..OptimizeOptions::default()
        },
        ..ScanOptions::default()
    };
    let mut cells = Vec::new();
    for &theta in &args.theta {
        for &n_atoms in &args.n_atoms {
            let result = CatSpec::new(n_atoms, theta)
                .and_then(|spec| cat_state(&spec))
                .and_then(|target| {
                    let found = minimal_time_scan_with(n_atoms, 1.0, args.segments, &target, &options)?;
                    let state = evolve_piecewise(
                        n_atoms,
                        1.0,
                        &found.outcome.best_schedule,
                        &initial_state(n_atoms)?,
                        &[],
                    )?
                    .final_state;
                    Ok((found.total_time, found.outcome.best_fidelity, state))
                })
                .map_err(|e| e.to_string());
            match &result {
                Ok((t, f, _)) => log::info!("N = {n_atoms}, theta = {theta}: T_opt = {t}, F = {f}"),
                Err(e) => log::warn!("N = {n_atoms}, theta = {theta}: {e}"),
            }
            cells.push(Cell { n_atoms, theta, result });
        }
    }

    let mut times = Vec::new();
    for cell in &cells {
        let (t, f, status) = match &cell.result {
            Ok((t, f, _)) => (t.to_string(), f.to_string(), "ok".to_string()),
            Err(e) => (String::new(), String::new(), e.clone()),
        };
        times.push(vec![cell.n_atoms.to_string(), cell.theta.to_string(), t, f, status]);
        if let Ok((t, f, _)) = &cell.result {
            io::append_ledger(
                &dir.join(LEDGER_FILE),
                &LedgerRecord {
                    atom_count: cell.n_atoms,
                    segments: args.segments,
                    chi_t: *t,
                    theta: cell.theta,
                    fidelity: *f,
                    restarts: args.restarts,
                    seed: args.seed,
                },
            )?;
        }
    }
    io::write_table(
        create(&dir, "minimal_times.csv")?,
        &["N", "theta", "T_opt", "fidelity", "status"],
        &times,
    )?;

    let mut precision = Vec::new();
    let mut fits = Vec::new();
    for &theta in &args.theta {
        let states: BTreeMap<usize, StateVector> = cells
            .iter()
            .filter(|c| c.theta == theta)
            .filter_map(|c| c.result.as_ref().ok().map(|(_, _, s)| (c.n_atoms, s.clone())))
            .collect();
        let table = scaling_scan(&states, theta)?;
        for row in &table.rows {
            precision.push(vec![
                row.atom_count.to_string(),
                theta.to_string(),
                row.qcrb.to_string(),
                row.analytic.to_string(),
                row.relative_deviation.to_string(),
            ]);
        }
        if let Some(fit) = table.fit {
            fits.push(vec![theta.to_string(), fit.slope.to_string(), fit.r_squared.to_string()]);
        }
    }
    io::write_table(
        create(&dir, "qcrb_scaling.csv")?,
        &["N", "theta", "qcrb", "heisenberg_bound", "relative_deviation"],
        &precision,
    )?;
    io::write_table(create(&dir, "qcrb_fit.csv")?, &["theta", "loglog_slope", "r_squared"], &fits)?;
    if args.common.summary {
        let mut out = std::io::stdout().lock();
        writeln!(out, "N,theta,T_opt,fidelity,status")?;
        for row in &times {
            writeln!(out, "{}", row.join(","))?;
        }
    }
    if cells.iter().all(|c| c.result.is_err()) {
        anyhow::bail!("every scan cell failed");
    }
    Ok(Completion::Clean)
}
