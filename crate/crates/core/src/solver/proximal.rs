//! The proximal-point iteration `X_j = J_{1/(j+d)}(X_{j-1})`.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::measure::FiniteMeasure;
use crate::spd::{thompson_distance, SpdMatrix};
use crate::trace::{log_spaced, IterationTrace, TraceMeta};

use super::config::SolverConfig;
use super::karcher::karcher_mean;
use super::resolvent::resolvent;

/// Runs `n_steps` proximal steps from `x0`; errors are measured against `Λ(μ)`
/// (solved once at residual tolerance `1e-12`).
///
/// Step `j` uses `λ = 1/(j + d)`. A failing inner solve stops the run and
/// marks the trace as truncated.
pub fn proximal_sequence(
    mu: &FiniteMeasure,
    x0: &SpdMatrix,
    d_offset: usize,
    n_steps: usize,
    cfg: &SolverConfig,
) -> Result<IterationTrace> {
    if n_steps == 0 {
        return Err(Error::InvalidArgument("n_steps must be positive".into()));
    }
    let reference = karcher_mean(mu, &SolverConfig::with_tol(1e-12))?.mean;
    let step_cfg = cfg.for_chain(n_steps);
    let mut trace = IterationTrace::new(TraceMeta {
        scheme: "proximal".into(),
        seed: None,
        measure_digest: mu.digest(),
    });
    let start = Instant::now();
    let mut x = x0.clone();
    trace.push(0, thompson_distance(&x, &reference)?, 0);
    trace.retain(0, x.clone());
    for j in 1..=n_steps {
        let lambda = 1.0 / (j + d_offset) as f64;
        match resolvent(lambda, mu, &x, &step_cfg) {
            Ok(next) => x = next,
            Err(e) => {
                trace.truncated = Some(format!("step {j}: {e}"));
                break;
            }
        }
        trace.push(j as u64, thompson_distance(&x, &reference)?, start.elapsed().as_nanos() as u64);
        if log_spaced(j as u64) || j == n_steps {
            trace.retain(j as u64, x.clone());
        }
    }
    Ok(trace)
}

/// `t_n = Σ_{i=d+1}^{n} 1/i`.
pub fn harmonic_time(n: usize, d: usize) -> f64 {
    ((d + 1)..=n).map(|i| 1.0 / i as f64).sum()
}

/// The explicit `O(1/log n)` bound on `d_∞(X_n, Λ(μ))`:
///
/// `(1 + t_n/n)^{-⌊n/t_n⌋+d} (⌊n/t_n⌋ − d)/(n+1) √(π²/6 + t_n²/n) C
///  + t_n/√n C + e^{-t_n} d_∞(X_0, Λ(μ))`,
///
/// defined once `⌊n/t_n⌋ ≥ d`. `c` is `C(X_0)` and `d0` the initial error.
pub fn proximal_envelope(n: usize, d: usize, c: f64, d0: f64) -> Option<f64> {
    let t = harmonic_time(n, d);
    if t <= 0.0 {
        return None;
    }
    let nf = n as f64;
    let q = (nf / t).floor();
    if q < d as f64 {
        return None;
    }
    let first = (1.0 + t / nf).powf(-q + d as f64) * (q - d as f64) / (nf + 1.0)
        * (std::f64::consts::PI.powi(2) / 6.0 + t * t / nf).sqrt()
        * c;
    Some(first + t / nf.sqrt() * c + (-t).exp() * d0)
}
