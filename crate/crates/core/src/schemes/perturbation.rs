//! Explicit forms of the perturbation estimates that tie inductive means to
//! resolvent chains: the entropy Lipschitz bound, the perturbed resolvent
//! point, chains driven by varying measures, and the scalar recursion envelopes.

use crate::error::{check_dim, Error, Result};
use crate::measure::FiniteMeasure;
use crate::solver::{resolvent, SolverConfig};
use crate::spd::{exp_point, log_point, thompson_distance, SpdMatrix, SymMatrix};
use crate::transport::w1_distance;

pub const ENTROPY_SLACK: f64 = 1e-10;
pub const PERTURBED_SLACK: f64 = 1e-9;
pub const CHAIN_SLACK: f64 = 1e-6;
pub const CONVRATE_SLACK: f64 = 1e-9;
/// Upper limit on `d_∞(X, Y)` and the normalized norms of `E` in [`perturbed_resolvent_solve`].
pub const PERTURBATION_LIMIT: f64 = 0.3;

/// `(‖log_X A − log_Y A‖, d(X,A) e^{2d(I,X)}(e^{d(X,Y)} − 1) + e^{d(I,Y)+d(I,A)} d(X,Y))`.
pub fn entropy_lipschitz_check(a: &SpdMatrix, x: &SpdMatrix, y: &SpdMatrix) -> Result<(f64, f64)> {
    check_dim(a.dim(), x.dim())?;
    check_dim(a.dim(), y.dim())?;
    let lhs = (&log_point(x, a)? - &log_point(y, a)?).norm();
    let dxy = thompson_distance(x, y)?;
    let rhs = thompson_distance(x, a)? * (2.0 * x.log_norm()).exp() * dxy.exp_m1()
        + (y.log_norm() + a.log_norm()).exp() * dxy;
    Ok((lhs, rhs))
}

/// Result of [`perturbed_resolvent_solve`].
#[derive(Debug, Clone)]
pub struct PerturbedResolvent {
    /// `X̂` with `log_Y X̂ = X − Y + E`.
    pub x_hat: SpdMatrix,
    /// `d_∞(X̂, X)`.
    pub dist: f64,
    pub bound: f64,
}

impl PerturbedResolvent {
    pub fn holds(&self) -> bool {
        self.dist <= self.bound + PERTURBED_SLACK
    }
}

/// Solves `log_Y X̂ = X − Y + E` and bounds `d_∞(X̂, X)`.
///
/// With `a = d_∞(X,Y)`, `e_X = ‖X^{-1/2}EX^{-1/2}‖`, `e_Y = ‖Y^{-1/2}EY^{-1/2}‖`:
/// `z = e^a − 1 + e_Y`, `w = e_X + e^a z² e^z / 2` and the bound is
/// `w + w²/(2(1 − w))`. All of `a, e_X, e_Y` must be below [`PERTURBATION_LIMIT`].
pub fn perturbed_resolvent_solve(x: &SpdMatrix, y: &SpdMatrix, e: &SymMatrix) -> Result<PerturbedResolvent> {
    check_dim(x.dim(), y.dim())?;
    check_dim(x.dim(), e.dim())?;
    let a = thompson_distance(x, y)?;
    let e_x = e.congruence(x.inv_sqrt().as_matrix())?.norm();
    let e_y = e.congruence(y.inv_sqrt().as_matrix())?.norm();
    if a >= PERTURBATION_LIMIT || e_x >= PERTURBATION_LIMIT || e_y >= PERTURBATION_LIMIT {
        return Err(Error::InvalidArgument(format!(
            "perturbation too large: d(X,Y) = {a}, |E|_X = {e_x}, |E|_Y = {e_y} (limit {PERTURBATION_LIMIT})"
        )));
    }
    let v = &(x.as_sym() - y.as_sym()) + e;
    let x_hat = exp_point(y, &v)?;
    let dist = thompson_distance(&x_hat, x)?;
    let z = a.exp_m1() + e_y;
    let w = e_x + a.exp() * z * z * z.exp() / 2.0;
    let bound = w + w * w / (2.0 * (1.0 - w));
    Ok(PerturbedResolvent { x_hat, dist, bound })
}

/// Runs `X_{k+1} = J^μ_{1/(l+k+1)}(X_k)` and `Y_{k+1} = J^{ν_{k+1}}_{1/(l+k+1)}(Y_k)` for
/// `K = nus.len()` steps and returns `(d_∞(X_K, Y_K), bound)` with
/// `bound = (l+1)/(l+K+1)·d_∞(X_0, Y_0) + Σ_i W₁(μ, ν_i)/(l+K+1)`.
pub fn varying_measure_chain_gap(
    mu: &FiniteMeasure,
    nus: &[FiniteMeasure],
    l_offset: usize,
    x0: &SpdMatrix,
    y0: &SpdMatrix,
    cfg: &SolverConfig,
) -> Result<(f64, f64)> {
    if nus.is_empty() {
        return Err(Error::InvalidArgument("need at least one measure nu".into()));
    }
    check_dim(mu.dim(), x0.dim())?;
    check_dim(mu.dim(), y0.dim())?;
    let step_cfg = cfg.for_chain(nus.len());
    let (mut x, mut y) = (x0.clone(), y0.clone());
    let mut w_sum = 0.0;
    for (k, nu) in nus.iter().enumerate() {
        let lambda = 1.0 / (l_offset + k + 1) as f64;
        x = resolvent(lambda, mu, &x, &step_cfg)?;
        y = resolvent(lambda, nu, &y, &step_cfg)?;
        w_sum += w1_distance(mu, nu)?.0;
    }
    let big_k = nus.len() as f64;
    let l = l_offset as f64;
    let rhs = (l + 1.0) / (l + big_k + 1.0) * thompson_distance(x0, y0)? + w_sum / (l + big_k + 1.0);
    Ok((thompson_distance(&x, &y)?, rhs))
}

/// Closed-form envelope for `a_{k+1} ≤ (1 − α/(k+1)) a_k + β/(k+1)²`.
pub fn convrate_envelope(alpha: f64, beta: f64, a0: f64, k: u64) -> f64 {
    let k = k as f64;
    if alpha < 1.0 {
        (a0 + 2f64.powf(alpha) * beta * (2.0 - alpha) / (1.0 - alpha)) / (k + 2.0).powf(alpha)
    } else if alpha == 1.0 {
        beta * (1.0 + (k + 1.0).ln()) / (k + 1.0)
    } else {
        (beta + ((alpha - 1.0) * a0 - beta) / (k + 2.0).powf(alpha - 1.0)) / ((alpha - 1.0) * (k + 2.0))
    }
}

/// Comparison of the equality recursion with its envelope over `1 ≤ k ≤ k_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvrateCheck {
    pub alpha: f64,
    pub beta: f64,
    pub a0: f64,
    /// `max_k (a_k − envelope(k))`.
    pub worst_excess: f64,
    pub first_violation: Option<u64>,
}

impl ConvrateCheck {
    pub fn holds(&self) -> bool {
        self.first_violation.is_none()
    }
}

/// Iterates `a_{k+1} = (1 − α/(k+1)) a_k + β/(k+1)²` from `a0` and compares with
/// [`convrate_envelope`] at every `k ≥ 1`.
pub fn convrate_check(alpha: f64, beta: f64, a0: f64, k_max: u64) -> Result<ConvrateCheck> {
    if !(alpha > 0.0 && beta > 0.0 && a0 >= 0.0) {
        return Err(Error::InvalidArgument("need alpha > 0, beta > 0, a0 >= 0".into()));
    }
    let mut a = a0;
    let mut chk = ConvrateCheck {
        alpha,
        beta,
        a0,
        worst_excess: f64::NEG_INFINITY,
        first_violation: None,
    };
    for k in 0..k_max {
        let kp = (k + 1) as f64;
        a = (1.0 - alpha / kp) * a + beta / (kp * kp);
        let excess = a - convrate_envelope(alpha, beta, a0, k + 1);
        chk.worst_excess = chk.worst_excess.max(excess);
        if excess > CONVRATE_SLACK && chk.first_violation.is_none() {
            chk.first_violation = Some(k + 1);
        }
    }
    Ok(chk)
}
