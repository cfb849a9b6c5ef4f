//! `mean`, `nodice`, `slln`, `flow` and `generate`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use karcher_core::random::random_measure_with;
use karcher_core::rng::seeded;
use karcher_core::schemes::{nodice_sequence, stochastic_sequence, truncated_sequence};
use karcher_core::solver::{euler_flow, karcher_iterate, karcher_mean, semigroup_with, FlowMode, SolverConfig};
use karcher_core::trace::IterationTrace;
use karcher_core::{thompson_distance, Error as CoreError, FiniteMeasure, SpdMatrix};

use crate::error::{CliError, CliResult};
use crate::problem::{read_matrix, ProblemFile};

/// Tolerance of the reference mean that scheme errors are measured against.
pub const REFERENCE_TOL: f64 = 1e-12;

/// Writes to `out`, or to stdout when no path is given.
pub fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(input: &Path) -> CliResult<FiniteMeasure> {
    ProblemFile::read(input)?.to_measure()
}

fn reference_mean(mu: &FiniteMeasure) -> CliResult<SpdMatrix> {
    Ok(karcher_mean(mu, &SolverConfig::with_tol(REFERENCE_TOL))?.mean)
}

#[derive(Debug, Clone)]
pub struct MeanOptions {
    pub input: PathBuf,
    pub tol: f64,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MeanOutput {
    pub mean: Vec<Vec<f64>>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub tol: f64,
}

/// Writes the mean even when the solver stops short, then reports the failure.
pub fn cmd_mean(opts: &MeanOptions) -> CliResult<MeanOutput> {
    let mu = load(&opts.input)?;
    let res = karcher_iterate(&mu, &SolverConfig::with_tol(opts.tol))?;
    let out = MeanOutput {
        mean: res.mean.to_rows(),
        residual_norm: res.residual_norm,
        iterations: res.iterations,
        converged: res.converged,
        tol: opts.tol,
    };
    emit(opts.out.as_deref(), &crate::json::to_string(&out))?;
    if !res.converged {
        return Err(CliError::Numerical(CoreError::NotConverged {
            iterations: res.iterations,
            residual: res.residual_norm,
        }));
    }
    Ok(out)
}

/// `n,d_inf_error,wall_ns` with one row per recorded step; `wall_ns` is 0 unless `timing`.
pub fn trace_csv(trace: &IterationTrace, timing: bool) -> String {
    let mut s = String::from("n,d_inf_error,wall_ns\n");
    for ((n, e), ns) in trace.indices.iter().zip(&trace.errors).zip(&trace.wall_ns) {
        let ns = if timing { *ns } else { 0 };
        writeln!(s, "{n},{e:.16e},{ns}").expect("writing to a String cannot fail");
    }
    s
}

#[derive(Debug, Clone)]
pub struct NodiceOptions {
    pub input: PathBuf,
    pub cycles: usize,
    pub out: Option<PathBuf>,
    pub timing: bool,
}

pub fn cmd_nodice(opts: &NodiceOptions) -> CliResult<IterationTrace> {
    let mu = load(&opts.input)?;
    let lam = reference_mean(&mu)?;
    let trace = nodice_sequence(&mu, opts.cycles, &lam)?;
    emit(opts.out.as_deref(), &trace_csv(&trace, opts.timing))?;
    Ok(trace)
}

#[derive(Debug, Clone)]
pub struct SllnOptions {
    pub input: PathBuf,
    pub steps: usize,
    pub seed: u64,
    /// Truncate draws at this distance from the mean.
    pub radius: Option<f64>,
    pub out: Option<PathBuf>,
    pub timing: bool,
}

pub fn cmd_slln(opts: &SllnOptions) -> CliResult<IterationTrace> {
    let mu = load(&opts.input)?;
    let lam = reference_mean(&mu)?;
    let trace = match opts.radius {
        Some(r) => truncated_sequence(&mu, opts.steps, opts.seed, r, &lam, &lam)?,
        None => stochastic_sequence(&mu, opts.steps, opts.seed, &lam)?,
    };
    emit(opts.out.as_deref(), &trace_csv(&trace, opts.timing))?;
    Ok(trace)
}

#[derive(Debug, Clone)]
pub struct FlowOptions {
    pub input: PathBuf,
    /// Starting point; the identity when absent.
    pub x0: Option<PathBuf>,
    pub t: f64,
    pub flow_tol: f64,
    pub euler_steps: usize,
    pub tol: f64,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowOutput {
    pub t: f64,
    pub flow_tol: f64,
    pub x0: Vec<Vec<f64>>,
    pub semigroup: Vec<Vec<f64>>,
    pub euler: Vec<Vec<f64>>,
    pub euler_steps: usize,
    /// `d_∞` between the semigroup point and the Euler point.
    pub gap: f64,
    pub resolvent_steps: u64,
    pub resolvent_calls: u64,
    pub error_estimate: f64,
}

pub fn cmd_flow(opts: &FlowOptions) -> CliResult<FlowOutput> {
    let mu = load(&opts.input)?;
    let x0 = match &opts.x0 {
        Some(p) => read_matrix(p, mu.dim())?,
        None => SpdMatrix::identity(mu.dim()),
    };
    let cfg = SolverConfig::with_tol(opts.tol);
    let flow = semigroup_with(opts.t, &mu, &x0, opts.flow_tol, FlowMode::Extrapolated, &cfg)?;
    let euler = if opts.t == 0.0 {
        x0.clone()
    } else {
        euler_flow(opts.t, opts.euler_steps, &mu, &x0)?
    };
    let out = FlowOutput {
        t: opts.t,
        flow_tol: opts.flow_tol,
        x0: x0.to_rows(),
        semigroup: flow.point.to_rows(),
        euler: euler.to_rows(),
        euler_steps: opts.euler_steps,
        gap: thompson_distance(&flow.point, &euler)?,
        resolvent_steps: flow.steps,
        resolvent_calls: flow.resolvent_calls,
        error_estimate: flow.error_estimate,
    };
    emit(opts.out.as_deref(), &crate::json::to_string(&out))?;
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct GenerateOptions {
    pub dim: usize,
    pub atoms: usize,
    pub seed: u64,
    pub scale: f64,
    pub uniform: bool,
    pub out: Option<PathBuf>,
}

/// A random problem file: atoms `exp(scale·W)`, small-integer rational weights unless `uniform`.
pub fn cmd_generate(opts: &GenerateOptions) -> CliResult<ProblemFile> {
    if opts.dim == 0 || opts.atoms == 0 {
        return Err(CliError::Input("dim and atom count must be positive".into()));
    }
    let mu = random_measure_with(&mut seeded(opts.seed), opts.dim, opts.atoms, opts.scale, opts.uniform)?;
    let file = ProblemFile::from_measure(&mu);
    emit(opts.out.as_deref(), &file.to_json())?;
    Ok(file)
}
