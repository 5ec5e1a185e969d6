//! CSV artifacts: states, sweeps, schedules, reports and the results ledger.
//!
//! Amplitudes are written in `{:.16e}` form, which round-trips `f64`
//! exactly; every other float uses Rust's shortest round-trip formatting.

use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use nalgebra::DVector;

use crate::adiabatic::{FidelityTrace, SweepTrajectory};
use crate::control::ControlSchedule;
use crate::error::{Error, Result};
use crate::metrology::MetrologyReport;
use crate::spin::{StateVector, C64};

fn amp(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse<T: std::str::FromStr>(field: Option<&str>, what: &str) -> Result<T> {
    let field = field.ok_or_else(|| Error::Format(format!("missing column {what}")))?;
    field
        .trim()
        .parse()
        .map_err(|_| Error::Format(format!("cannot parse {what} from {field:?}")))
}

pub fn write_state<W: Write>(writer: W, state: &StateVector) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(["m", "re", "im"])?;
    for (m, c) in state.m_values().zip(state.amplitudes().iter()) {
        csv.write_record([m.to_string(), amp(c.re), amp(c.im)])?;
    }
    csv.flush()?;
    Ok(())
}

/// Reads a `m,re,im` table; rows must cover `m = -J..=J` in ascending order.
pub fn read_state<R: Read>(reader: R) -> Result<StateVector> {
    let mut csv = csv::Reader::from_reader(reader);
    let mut ms = Vec::new();
    let mut amplitudes = Vec::new();
    for record in csv.records() {
        let record = record?;
        ms.push(parse::<f64>(record.get(0), "m")?);
        amplitudes.push(C64::new(parse(record.get(1), "re")?, parse(record.get(2), "im")?));
    }
    if amplitudes.len() < 2 {
        return Err(Error::Format("a state needs at least two rows".into()));
    }
    let atom_count = amplitudes.len() - 1;
    let j = atom_count as f64 / 2.0;
    if ms.iter().enumerate().any(|(i, &m)| m != i as f64 - j) {
        return Err(Error::Format("m column must run from -J to J in unit steps".into()));
    }
    StateVector::new(atom_count, DVector::from_vec(amplitudes))
}

pub fn write_checkpoints<W: Write>(writer: W, checkpoints: &[(f64, StateVector)]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(["t", "m", "re", "im"])?;
    for (t, state) in checkpoints {
        for (m, c) in state.m_values().zip(state.amplitudes().iter()) {
            csv.write_record([t.to_string(), m.to_string(), amp(c.re), amp(c.im)])?;
        }
    }
    csv.flush()?;
    Ok(())
}

pub fn write_trajectory<W: Write>(writer: W, trajectory: &SweepTrajectory) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(["t", "omega"])?;
    for (t, omega) in trajectory.samples() {
        csv.write_record([t.to_string(), omega.to_string()])?;
    }
    csv.flush()?;
    Ok(())
}

pub fn write_fidelity_traces<W: Write>(writer: W, traces: &[FidelityTrace]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(["t", "theta", "fidelity"])?;
    for trace in traces {
        for (t, f) in &trace.samples {
            csv.write_record([t.to_string(), trace.theta.to_string(), f.to_string()])?;
        }
    }
    csv.flush()?;
    Ok(())
}

/// `# N=<N> chiT=<T> n=<n>` followed by a `k,lambda` table (1-based `k`).
pub fn write_schedule<W: Write>(mut writer: W, schedule: &ControlSchedule) -> Result<()> {
    writeln!(
        writer,
        "# N={} chiT={} n={}",
        schedule.atom_count(),
        schedule.total_time(),
        schedule.segments()
    )?;
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(["k", "lambda"])?;
    for (k, lambda) in schedule.lambdas().iter().enumerate() {
        csv.write_record([(k + 1).to_string(), lambda.to_string()])?;
    }
    csv.flush()?;
    Ok(())
}

pub fn read_schedule<R: Read>(reader: R) -> Result<ControlSchedule> {
    let mut reader = BufReader::new(reader);
    let mut header = String::new();
    reader.read_line(&mut header)?;
    let fields = header
        .trim()
        .strip_prefix('#')
        .ok_or_else(|| Error::Format("schedule header line must start with '#'".into()))?;
    let (mut n_atoms, mut chi_t, mut segments) = (None, None, None);
    for pair in fields.split_whitespace() {
        match pair.split_once('=') {
            Some(("N", v)) => n_atoms = Some(parse::<usize>(Some(v), "N")?),
            Some(("chiT", v)) => chi_t = Some(parse::<f64>(Some(v), "chiT")?),
            Some(("n", v)) => segments = Some(parse::<usize>(Some(v), "n")?),
            _ => return Err(Error::Format(format!("unexpected header field {pair:?}"))),
        }
    }
    let missing = |what: &str| Error::Format(format!("schedule header lacks {what}"));
    let n_atoms = n_atoms.ok_or_else(|| missing("N"))?;
    let chi_t = chi_t.ok_or_else(|| missing("chiT"))?;
    let segments = segments.ok_or_else(|| missing("n"))?;

    let mut csv = csv::Reader::from_reader(reader);
    let mut lambdas = Vec::with_capacity(segments);
    for record in csv.records() {
        let record = record?;
        let k: usize = parse(record.get(0), "k")?;
        if k != lambdas.len() + 1 {
            return Err(Error::Format(format!("segment index {k} out of order")));
        }
        lambdas.push(parse(record.get(1), "lambda")?);
    }
    if lambdas.len() != segments {
        return Err(Error::Format(format!(
            "header announces {segments} segments, table has {}",
            lambdas.len()
        )));
    }
    ControlSchedule::new(n_atoms, chi_t, lambdas)
}

pub const REPORT_HEADER: [&str; 7] = ["N", "theta", "fidelity", "qfi", "qcrb", "parity", "variance_jz"];

/// One `N,theta,fidelity,qfi,qcrb,parity,variance_jz` row; an unbounded
/// QCRB is written as `inf`.
pub fn report_record(atom_count: usize, theta: f64, report: &MetrologyReport) -> Vec<String> {
    vec![
        atom_count.to_string(),
        theta.to_string(),
        report.fidelity.to_string(),
        report.qfi.to_string(),
        report.qcrb.unwrap_or(f64::INFINITY).to_string(),
        report.parity.to_string(),
        report.variance_jz.to_string(),
    ]
}

pub fn write_reports<W: Write>(writer: W, rows: &[(usize, f64, MetrologyReport)]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(REPORT_HEADER)?;
    for (n, theta, report) in rows {
        csv.write_record(report_record(*n, *theta, report))?;
    }
    csv.flush()?;
    Ok(())
}

/// Generic table writer for scan outputs.
pub fn write_table<W: Write>(writer: W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(header)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::DimensionMismatch {
                expected: header.len(),
                got: row.len(),
            });
        }
        csv.write_record(row)?;
    }
    csv.flush()?;
    Ok(())
}

pub const LEDGER_SCHEMA: &str = "# spincat-results schema=1";
pub const LEDGER_HEADER: [&str; 7] = ["N", "n", "chiT", "theta", "fidelity", "restarts", "seed"];

#[derive(Debug, Clone, PartialEq)]
pub struct LedgerRecord {
    pub atom_count: usize,
    pub segments: usize,
    pub chi_t: f64,
    pub theta: f64,
    pub fidelity: f64,
    pub restarts: usize,
    pub seed: u64,
}

/// Appends one record, writing the schema line and header if the file is new
/// or empty.
pub fn append_ledger(path: &Path, record: &LedgerRecord) -> Result<()> {
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    let fresh = file.metadata()?.len() == 0;
    let mut text = String::new();
    if fresh {
        text.push_str(LEDGER_SCHEMA);
        text.push('\n');
        text.push_str(&LEDGER_HEADER.join(","));
        text.push('\n');
    }
    text.push_str(&format!(
        "{},{},{},{},{},{},{}\n",
        record.atom_count, record.segments, record.chi_t, record.theta, record.fidelity, record.restarts, record.seed
    ));
    // One write call per record keeps concurrent appenders line-atomic.
    file.write_all(text.as_bytes())?;
    Ok(())
}

pub fn read_ledger(path: &Path) -> Result<Vec<LedgerRecord>> {
    let mut reader = BufReader::new(std::fs::File::open(path)?);
    let mut schema = String::new();
    reader.read_line(&mut schema)?;
    if schema.trim() != LEDGER_SCHEMA {
        return Err(Error::Format(format!("unknown ledger schema line {:?}", schema.trim())));
    }
    let mut csv = csv::Reader::from_reader(reader);
    csv.records()
        .map(|record| {
            let r = record?;
            Ok(LedgerRecord {
                atom_count: parse(r.get(0), "N")?,
                segments: parse(r.get(1), "n")?,
                chi_t: parse(r.get(2), "chiT")?,
                theta: parse(r.get(3), "theta")?,
                fidelity: parse(r.get(4), "fidelity")?,
                restarts: parse(r.get(5), "restarts")?,
                seed: parse(r.get(6), "seed")?,
            })
        })
        .collect()
}
