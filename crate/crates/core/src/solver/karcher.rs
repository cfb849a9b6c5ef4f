//! The Karcher equation and its damped fixed-point solver.

use crate::error::{check_dim, Error, Result};
use crate::measure::FiniteMeasure;
use crate::spd::{log_point, SpdMatrix, SymMatrix};

use super::config::{KarcherResult, SolverConfig};

/// `Σ w_i log_X A_i`.
pub fn karcher_residual(x: &SpdMatrix, mu: &FiniteMeasure) -> Result<SymMatrix> {
    check_dim(mu.dim(), x.dim())?;
    let mut v = SymMatrix::zeros(x.dim());
    for (a, w) in mu.iter() {
        v = &v + &(&log_point(x, a)? * w);
    }
    Ok(v)
}

/// `X^{-1/2} (Σ w_i log_X A_i) X^{-1/2} = Σ w_i log(X^{-1/2} A_i X^{-1/2})`.
pub fn normalized_residual(x: &SpdMatrix, mu: &FiniteMeasure) -> Result<SymMatrix> {
    check_dim(mu.dim(), x.dim())?;
    let xi = x.inv_sqrt();
    let mut v = SymMatrix::zeros(x.dim());
    for (a, w) in mu.iter() {
        v = &v + &(&a.whitened_by(&xi)?.log() * w);
    }
    Ok(v)
}

/// `exp(Σ w_i log A_i)`; exact for commuting atoms.
pub fn log_euclidean_mean(mu: &FiniteMeasure) -> Result<SpdMatrix> {
    let mut v = SymMatrix::zeros(mu.dim());
    for (a, w) in mu.iter() {
        v = &v + &(&a.log() * w);
    }
    v.exp()
}

/// Successive first-try acceptances before the step is allowed to grow again.
const GROW_AFTER: usize = 3;

/// Runs the solver to completion or `max_iters`, without failing on non-convergence.
///
/// Each step moves `X ← X^{1/2} exp(α R) X^{1/2}` with `R` the normalized
/// residual, i.e. a Riemannian gradient step on `½ Σ w_i d_R(X, A_i)²`. That
/// cost has Hessian at least the identity, so a step that is not too long
/// shrinks `‖R‖_F` by a factor `1 − α` or better near the mean. A trial is
/// accepted when `‖R‖_F` shrinks by `1 − α/2`; otherwise `α` halves, down to
/// `cfg.min_damping`, where the step is taken regardless. The step size
/// persists across iterations and doubles back toward `cfg.damping` after a
/// run of first-try acceptances.
pub fn karcher_iterate(mu: &FiniteMeasure, cfg: &SolverConfig) -> Result<KarcherResult> {
    cfg.validate()?;
    if mu.len() == 1 {
        return Ok(KarcherResult {
            mean: mu.atoms()[0].clone(),
            residual_norm: 0.0,
            iterations: 0,
            converged: true,
        });
    }
    let mut x = log_euclidean_mean(mu)?;
    let mut r = normalized_residual(&x, mu)?;
    let mut rn = r.norm();
    let mut iterations = 0;
    let mut alpha = cfg.damping;
    let mut streak = 0;
    while rn > cfg.residual_tol && iterations < cfg.max_iters {
        iterations += 1;
        let root = x.sqrt();
        let rf = r.frobenius_norm();
        let mut first_try = true;
        loop {
            let trial = (&r * alpha).exp()?.congruence(root.as_matrix())?;
            let r_trial = normalized_residual(&trial, mu)?;
            let accept = r_trial.frobenius_norm() <= (1.0 - 0.5 * alpha) * rf;
            if accept || alpha * 0.5 < cfg.min_damping {
                x = trial;
                rn = r_trial.norm();
                r = r_trial;
                break;
            }
            alpha *= 0.5;
            first_try = false;
            streak = 0;
        }
        if first_try {
            streak += 1;
            if streak >= GROW_AFTER && alpha < cfg.damping {
                alpha = (2.0 * alpha).min(cfg.damping);
                streak = 0;
            }
        }
    }
    Ok(KarcherResult {
        mean: x,
        residual_norm: rn,
        iterations,
        converged: rn <= cfg.residual_tol,
    })
}

/// The Karcher mean `Λ(μ)`, the unique solution of `Σ w_i log_X A_i = 0`.
pub fn karcher_mean(mu: &FiniteMeasure, cfg: &SolverConfig) -> Result<KarcherResult> {
    let res = karcher_iterate(mu, cfg)?;
    if res.converged {
        Ok(res)
    } else {
        Err(Error::NotConverged {
            iterations: res.iterations,
            residual: res.residual_norm,
        })
    }
}
