//! The resolvent `J_λ^μ(X) = Λ(λ/(λ+1)·μ + 1/(λ+1)·δ_X)` and the checks built on it.

use crate::error::{check_dim, Error, Result};
use crate::measure::{convex_combine, FiniteMeasure};
use crate::spd::{geodesic, thompson_distance, SpdMatrix, SymMatrix};

use super::config::SolverConfig;
use super::karcher::karcher_mean;

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("resolvent parameter {lambda} must be positive and finite")))
    }
}

/// `λ/(λ+1)·μ + 1/(λ+1)·δ_X`.
pub fn augmented_measure(lambda: f64, mu: &FiniteMeasure, x: &SpdMatrix) -> Result<FiniteMeasure> {
    check_lambda(lambda)?;
    convex_combine(1.0 / (lambda + 1.0), mu, &FiniteMeasure::dirac(x.clone()))
}

pub fn resolvent(lambda: f64, mu: &FiniteMeasure, x: &SpdMatrix, cfg: &SolverConfig) -> Result<SpdMatrix> {
    check_dim(mu.dim(), x.dim())?;
    Ok(karcher_mean(&augmented_measure(lambda, mu, x)?, cfg)?.mean)
}

/// Iterates `X_i = J_{λ_i}(X_{i-1})`, returning `X_0, …, X_n`.
///
/// Each step is solved to `cfg.for_chain(n)` so that the accumulated solver
/// error stays at the level of `cfg.residual_tol`.
pub fn resolvent_path(lambdas: &[f64], mu: &FiniteMeasure, x: &SpdMatrix, cfg: &SolverConfig) -> Result<Vec<SpdMatrix>> {
    let step_cfg = cfg.for_chain(lambdas.len());
    let mut path = Vec::with_capacity(lambdas.len() + 1);
    path.push(x.clone());
    for &l in lambdas {
        let next = resolvent(l, mu, path.last().unwrap(), &step_cfg)?;
        path.push(next);
    }
    Ok(path)
}

/// Last point of [`resolvent_path`], without keeping the intermediate iterates.
pub fn resolvent_chain(lambdas: &[f64], mu: &FiniteMeasure, x: &SpdMatrix, cfg: &SolverConfig) -> Result<SpdMatrix> {
    let step_cfg = cfg.for_chain(lambdas.len());
    let mut y = x.clone();
    for &l in lambdas {
        y = resolvent(l, mu, &y, &step_cfg)?;
    }
    Ok(y)
}

/// `(J_{t/n})^n(X)`.
pub fn resolvent_power(t: f64, n: usize, mu: &FiniteMeasure, x: &SpdMatrix, cfg: &SolverConfig) -> Result<SpdMatrix> {
    resolvent_chain(&vec![t / n as f64; n], mu, x, cfg)
}

/// `d_∞(J_τ(X), J_λ(J_τ(X) #_{λ/τ} X))` for `τ > λ > 0`.
pub fn resolvent_identity_gap(tau: f64, lambda: f64, mu: &FiniteMeasure, x: &SpdMatrix, cfg: &SolverConfig) -> Result<f64> {
    check_lambda(lambda)?;
    if !(tau > lambda) {
        return Err(Error::InvalidArgument(format!("resolvent identity needs tau ({tau}) > lambda ({lambda})")));
    }
    let lhs = resolvent(tau, mu, x, cfg)?;
    let mid = geodesic(&lhs, x, lambda / tau)?;
    let rhs = resolvent(lambda, mu, &mid, cfg)?;
    thompson_distance(&lhs, &rhs)
}

/// Both sides of the single-step and chained resolvent displacement bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventBounds {
    /// `d_∞(J_{λ_1}(X), X)` against `λ_1/(1+λ_1)·C(X)`.
    pub single: (f64, f64),
    /// `d_∞(J_{λ_1}∘…∘J_{λ_n}(X), X)` against `Σ λ_i/(1+λ_i)·C(X)`.
    pub chain: (f64, f64),
}

impl ResolventBounds {
    pub const SLACK: f64 = 1e-8;

    pub fn holds(&self) -> bool {
        self.single.0 <= self.single.1 + Self::SLACK && self.chain.0 <= self.chain.1 + Self::SLACK
    }
}

pub fn resolvent_bound_check(lambdas: &[f64], mu: &FiniteMeasure, x: &SpdMatrix, cfg: &SolverConfig) -> Result<ResolventBounds> {
    if lambdas.is_empty() {
        return Err(Error::InvalidArgument("empty resolvent parameter sequence".into()));
    }
    let c = mu.first_moment(x)?;
    let ratio = |l: f64| l / (1.0 + l);
    let j1 = resolvent(lambdas[0], mu, x, cfg)?;
    // J_{λ_1} ∘ … ∘ J_{λ_n}: J_{λ_n} acts first
    let rev: Vec<f64> = lambdas.iter().rev().copied().collect();
    let jn = resolvent_chain(&rev, mu, x, cfg)?;
    Ok(ResolventBounds {
        single: (thompson_distance(&j1, x)?, ratio(lambdas[0]) * c),
        chain: (thompson_distance(&jn, x)?, lambdas.iter().map(|&l| ratio(l)).sum::<f64>() * c),
    })
}

/// Second-order behaviour of the resolvent at small `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticsCheck {
    /// `‖J^{-1/2}(log_J X − (X − J))J^{-1/2}‖`.
    pub lhs: f64,
    /// `K·(Cλ)²` with the explicit constant `K`.
    pub rhs: f64,
}

impl AsymptoticsCheck {
    pub const SLACK: f64 = 1e-9;

    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + Self::SLACK
    }
}

/// `K = e^{λC}/(2(2 − e^{λC})) · ((e^{λC} − 1)/(λC))²`, continuous at `λC = 0`.
pub fn asymptotics_constant(lambda_c: f64) -> f64 {
    let e = lambda_c.exp();
    let q = if lambda_c == 0.0 { 1.0 } else { lambda_c.exp_m1() / lambda_c };
    e / (2.0 * (2.0 - e)) * q * q
}

/// Checks the explicit `O((Cλ)²)` remainder of `log_{J_λ X} X ≈ X − J_λ X`; needs `λ < log 2 / C`.
pub fn resolvent_asymptotics_check(lambda: f64, mu: &FiniteMeasure, x: &SpdMatrix, cfg: &SolverConfig) -> Result<AsymptoticsCheck> {
    check_lambda(lambda)?;
    let c = mu.first_moment(x)?;
    if lambda * c >= std::f64::consts::LN_2 {
        return Err(Error::InvalidArgument(format!(
            "asymptotics need lambda·C < log 2, got {lambda}·{c}"
        )));
    }
    let j = resolvent(lambda, mu, x, cfg)?;
    // J^{-1/2} log_J X J^{-1/2} = log M and J^{-1/2}(X − J)J^{-1/2} = M − I
    let m = x.whitened_by(&j.inv_sqrt())?;
    let lhs = (&m.log() - &(m.as_sym() - &SymMatrix::identity(x.dim()))).norm();
    let lc = lambda * c;
    Ok(AsymptoticsCheck {
        lhs,
        rhs: asymptotics_constant(lc) * lc * lc,
    })
}
