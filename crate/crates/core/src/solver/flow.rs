//! Resolvent chains on time grids, the exponential-formula semigroup
//! `S(t)X = lim (J_{t/n})^n X`, and an explicit Euler scheme for the flow
//! `Ẋ = Σ w_i log_X A_i`.

use crate::error::{check_dim, Error, Result};
use crate::measure::FiniteMeasure;
use crate::spd::{exp_point, geodesic_extended, thompson_distance, SpdMatrix, SymMatrix};

use super::config::SolverConfig;
use super::karcher::{karcher_residual, normalized_residual};
use super::resolvent::{resolvent_chain, resolvent_power};

/// Hard cap on resolvent evaluations for a single semigroup evaluation.
pub const MAX_RESOLVENT_CALLS: u64 = 10_000_000;

/// Strictly increasing times `t_1 < t_2 < …`, with `t_0 = 0` implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidArgument("time grid is empty".into()));
        }
        let mut prev = 0.0;
        for &t in &times {
            if !(t > prev) || !t.is_finite() {
                return Err(Error::InvalidArgument(format!("time grid not strictly increasing at {t}")));
            }
            prev = t;
        }
        Ok(TimeGrid { times })
    }

    pub fn from_steps(steps: &[f64]) -> Result<Self> {
        let times = steps
            .iter()
            .scan(0.0, |acc, s| {
                *acc += s;
                Some(*acc)
            })
            .collect();
        Self::new(times)
    }

    /// `n` equal steps up to `horizon`.
    pub fn uniform(horizon: f64, n: usize) -> Result<Self> {
        Self::from_steps(&vec![horizon / n as f64; n])
    }

    /// Steps `τ_j = 1/(j + d)`, `j = 1..=n`.
    pub fn harmonic(n: usize, d: usize) -> Result<Self> {
        let steps: Vec<f64> = (1..=n).map(|j| 1.0 / (j + d) as f64).collect();
        Self::from_steps(&steps)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn steps(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.times
            .iter()
            .map(|&t| {
                let s = t - prev;
                prev = t;
                s
            })
            .collect()
    }

    /// `σ = Σ τ_i²`.
    pub fn sigma(&self) -> f64 {
        self.steps().iter().map(|s| s * s).sum()
    }
}

/// Right-hand side of the two-grid estimate for the full grids.
pub fn kobayashi_bound(g1: &TimeGrid, g2: &TimeGrid, c: f64) -> f64 {
    let (s1, s2) = (g1.steps(), g2.steps());
    let prod: f64 = s1
        .iter()
        .zip(&s2)
        .map(|(a, b)| 1.0 / (1.0 + a.min(*b)))
        .product();
    let dt = g1.horizon() - g2.horizon();
    prod * (dt * dt + g1.sigma() + g2.sigma()).sqrt() * c
}

/// `(d_∞(X_m, X̂_n), bound)` for the resolvent chains on the two grids.
pub fn kobayashi_gap(g1: &TimeGrid, g2: &TimeGrid, mu: &FiniteMeasure, x: &SpdMatrix, cfg: &SolverConfig) -> Result<(f64, f64)> {
    let chain_cfg = cfg.for_chain(g1.len().max(g2.len()));
    let xm = resolvent_chain(&g1.steps(), mu, x, &chain_cfg)?;
    let xn = resolvent_chain(&g2.steps(), mu, x, &chain_cfg)?;
    let c = mu.first_moment(x)?;
    Ok((thompson_distance(&xm, &xn)?, kobayashi_bound(g1, g2, c)))
}

/// `(d_∞((J_{t/n})^n X, (J_{t/m})^m X), t(1/m + 1/n)^{1/2} C(X))`.
pub fn two_scale_gap(t: f64, m: usize, n: usize, mu: &FiniteMeasure, x: &SpdMatrix, cfg: &SolverConfig) -> Result<(f64, f64)> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument("step counts must be positive".into()));
    }
    let chain_cfg = cfg.for_chain(m.max(n));
    let ym = resolvent_power(t, m, mu, x, &chain_cfg)?;
    let yn = resolvent_power(t, n, mu, x, &chain_cfg)?;
    let c = mu.first_moment(x)?;
    Ok((
        thompson_distance(&ym, &yn)?,
        t * (1.0 / m as f64 + 1.0 / n as f64).sqrt() * c,
    ))
}

/// How the number of resolvent steps of [`semigroup_with`] is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FlowMode {
    /// Double `n` and extrapolate `(J_{t/n})^n X` along geodesics until
    /// successive extrapolants agree to `flow_tol / 2`.
    #[default]
    Extrapolated,
    /// `n = ⌈2(tC/flow_tol)²⌉` from the two-scale bound; no extrapolation.
    Certified,
}

#[derive(Debug, Clone)]
pub struct FlowOutcome {
    pub point: SpdMatrix,
    /// Largest `n` used.
    pub steps: u64,
    pub resolvent_calls: u64,
    /// A priori bound (certified) or the last extrapolant difference.
    pub error_estimate: f64,
}

/// Steps needed by [`FlowMode::Certified`].
pub fn certified_steps(t: f64, c: f64, flow_tol: f64) -> u64 {
    let r = t * c / flow_tol;
    (2.0 * r * r).ceil().max(1.0) as u64
}

/// `S(t)X` to within `flow_tol` (extrapolated mode).
pub fn semigroup(t: f64, mu: &FiniteMeasure, x: &SpdMatrix, flow_tol: f64, cfg: &SolverConfig) -> Result<SpdMatrix> {
    Ok(semigroup_with(t, mu, x, flow_tol, FlowMode::Extrapolated, cfg)?.point)
}

pub fn semigroup_with(
    t: f64,
    mu: &FiniteMeasure,
    x: &SpdMatrix,
    flow_tol: f64,
    mode: FlowMode,
    cfg: &SolverConfig,
) -> Result<FlowOutcome> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("flow time {t} must be finite and nonnegative")));
    }
    if !(flow_tol > 0.0) {
        return Err(Error::InvalidArgument(format!("flow_tol {flow_tol} must be positive")));
    }
    check_dim(mu.dim(), x.dim())?;
    let c = mu.first_moment(x)?;
    if t == 0.0 || c == 0.0 {
        return Ok(FlowOutcome {
            point: x.clone(),
            steps: 0,
            resolvent_calls: 0,
            error_estimate: 0.0,
        });
    }
    match mode {
        FlowMode::Certified => {
            let n = certified_steps(t, c, flow_tol);
            if n > MAX_RESOLVENT_CALLS {
                return Err(Error::ResolventBudget {
                    required: n,
                    cap: MAX_RESOLVENT_CALLS,
                    achievable_tol: t * c * (2.0 / MAX_RESOLVENT_CALLS as f64).sqrt(),
                });
            }
            let point = resolvent_power(t, n as usize, mu, x, cfg)?;
            Ok(FlowOutcome {
                point,
                steps: n,
                resolvent_calls: n,
                error_estimate: t * c / (n as f64).sqrt(),
            })
        }
        FlowMode::Extrapolated => {
            let mut n = ((4.0 * t * c).ceil() as u64).max(4);
            let mut calls = 3 * n;
            if calls > MAX_RESOLVENT_CALLS {
                return Err(Error::ResolventBudget {
                    required: calls,
                    cap: MAX_RESOLVENT_CALLS,
                    achievable_tol: f64::INFINITY,
                });
            }
            let mut coarse = resolvent_power(t, n as usize, mu, x, cfg)?;
            let mut fine = resolvent_power(t, 2 * n as usize, mu, x, cfg)?;
            let mut extrap = geodesic_extended(&coarse, &fine, 2.0)?;
            let mut estimate = f64::INFINITY;
            loop {
                n *= 2;
                if calls + 2 * n > MAX_RESOLVENT_CALLS {
                    return Err(Error::ResolventBudget {
                        required: calls + 2 * n,
                        cap: MAX_RESOLVENT_CALLS,
                        achievable_tol: estimate,
                    });
                }
                coarse = fine;
                fine = resolvent_power(t, 2 * n as usize, mu, x, cfg)?;
                calls += 2 * n;
                let next = geodesic_extended(&coarse, &fine, 2.0)?;
                estimate = thompson_distance(&next, &extrap)?;
                extrap = next;
                if estimate <= 0.5 * flow_tol {
                    return Ok(FlowOutcome {
                        point: extrap,
                        steps: 2 * n,
                        resolvent_calls: calls,
                        error_estimate: estimate,
                    });
                }
            }
        }
    }
}

/// Explicit Euler in exponential coordinates: `X ← exp_X(h Σ w_i log_X A_i)`.
pub fn euler_flow(t_end: f64, n_steps: usize, mu: &FiniteMeasure, x0: &SpdMatrix) -> Result<SpdMatrix> {
    if !(t_end > 0.0) || n_steps == 0 {
        return Err(Error::InvalidArgument("euler_flow needs t_end > 0 and n_steps >= 1".into()));
    }
    let h = t_end / n_steps as f64;
    let mut x = x0.clone();
    for _ in 0..n_steps {
        let v = karcher_residual(&x, mu)?;
        x = exp_point(&x, &(&v * h))?;
    }
    Ok(x)
}

/// Central difference of the flow against the vector field, in the frame of the base point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeCheck {
    /// `‖Y^{-1/2}((W − Z)/(2h) − Σ w_i log_Y A_i) Y^{-1/2}‖` with `Z, Y = S(h)Z, W = S(h)Y`.
    pub gap: f64,
    /// `max(1e-4, 10·flow_tol/h)`.
    pub tol: f64,
}

impl OdeCheck {
    pub fn holds(&self) -> bool {
        self.gap <= self.tol
    }
}

/// Differentiates `s ↦ S(s)X` at `s = t` and compares with the Karcher vector field there.
pub fn ode_consistency(t: f64, h: f64, mu: &FiniteMeasure, x: &SpdMatrix, flow_tol: f64, cfg: &SolverConfig) -> Result<OdeCheck> {
    if !(h > 0.0 && h < t) {
        return Err(Error::InvalidArgument(format!("need 0 < h ({h}) < t ({t})")));
    }
    let z = semigroup(t - h, mu, x, flow_tol, cfg)?;
    let y = semigroup(h, mu, &z, flow_tol, cfg)?;
    let w = semigroup(h, mu, &y, flow_tol, cfg)?;
    let diff = SymMatrix::from_symmetric((w.as_matrix() - z.as_matrix()) / (2.0 * h));
    let frame = y.inv_sqrt();
    let d = diff.congruence(frame.as_matrix())?;
    let field = normalized_residual(&y, mu)?;
    Ok(OdeCheck {
        gap: (&d - &field).norm(),
        tol: (10.0 * flow_tol / h).max(1e-4),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_measure_with, random_spd_with};
    use crate::rng::seeded;
    use crate::solver::karcher::karcher_mean;
    use approx::assert_abs_diff_eq;

    fn scalar(x: f64) -> SpdMatrix {
        SpdMatrix::from_diagonal(&[x]).unwrap()
    }

    #[test]
    fn grids() {
        let g = TimeGrid::uniform(2.0, 4).unwrap();
        assert_eq!(g.steps(), vec![0.5; 4]);
        assert_abs_diff_eq!(g.sigma(), 1.0, epsilon = 1e-15);
        let h = TimeGrid::harmonic(3, 0).unwrap();
        assert_abs_diff_eq!(h.horizon(), 1.0 + 0.5 + 1.0 / 3.0, epsilon = 1e-15);
        assert!(TimeGrid::new(vec![1.0, 1.0]).is_err());
        assert!(TimeGrid::new(vec![]).is_err());
    }

    #[test]
    fn kobayashi_identical_and_harmonic_grids() {
        let mut rng = seeded(1);
        let mu = random_measure_with(&mut rng, 3, 3, 0.6, false).unwrap();
        let x = random_spd_with(&mut rng, 3, 0.6);
        let cfg = SolverConfig::default();
        let g = TimeGrid::uniform(1.0, 5).unwrap();
        let (lhs, rhs) = kobayashi_gap(&g, &g, &mu, &x, &cfg).unwrap();
        assert_eq!(lhs, 0.0);
        assert!(rhs > 0.0);
        let h = TimeGrid::harmonic(20, 0).unwrap();
        let u = TimeGrid::uniform(h.horizon(), 20).unwrap();
        let (lhs, rhs) = kobayashi_gap(&h, &u, &mu, &x, &cfg).unwrap();
        assert!(lhs <= rhs + 1e-7, "{lhs} {rhs}");
    }

    #[test]
    fn two_scale_bound_holds() {
        let mut rng = seeded(2);
        let mu = random_measure_with(&mut rng, 3, 3, 0.6, false).unwrap();
        let x = random_spd_with(&mut rng, 3, 0.8);
        let cfg = SolverConfig::default();
        for (m, n) in [(2, 4), (4, 16)] {
            let (lhs, rhs) = two_scale_gap(0.5, m, n, &mu, &x, &cfg).unwrap();
            assert!(lhs <= rhs + 1e-7);
        }
    }

    #[test]
    fn semigroup_trivial_cases() {
        let mut rng = seeded(3);
        let mu = random_measure_with(&mut rng, 2, 3, 0.6, false).unwrap();
        let x = random_spd_with(&mut rng, 2, 0.6);
        let cfg = SolverConfig::default();
        assert_eq!(semigroup(0.0, &mu, &x, 1e-4, &cfg).unwrap(), x);
        let l = karcher_mean(&mu, &SolverConfig::with_tol(1e-12)).unwrap().mean;
        let s = semigroup(1.0, &mu, &l, 1e-4, &cfg).unwrap();
        assert!(thompson_distance(&s, &l).unwrap() <= 1e-4 + 10.0 * cfg.residual_tol);
        assert!(semigroup(-1.0, &mu, &x, 1e-4, &cfg).is_err());
    }

    #[test]
    fn certified_mode_budget() {
        let mut rng = seeded(4);
        let mu = random_measure_with(&mut rng, 2, 3, 0.6, false).unwrap();
        let x = random_spd_with(&mut rng, 2, 0.6);
        let cfg = SolverConfig::default();
        match semigroup_with(1.0, &mu, &x, 1e-6, FlowMode::Certified, &cfg) {
            Err(Error::ResolventBudget { required, cap, achievable_tol }) => {
                assert!(required > cap);
                assert!(achievable_tol > 1e-6);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
        let out = semigroup_with(0.2, &mu, &x, 0.05, FlowMode::Certified, &cfg).unwrap();
        let c = mu.first_moment(&x).unwrap();
        assert_eq!(out.steps, certified_steps(0.2, c, 0.05));
        let fine = semigroup(0.2, &mu, &x, 1e-7, &cfg).unwrap();
        assert!(thompson_distance(&out.point, &fine).unwrap() <= 0.05);
    }

    #[test]
    fn scalar_flow_closed_form() {
        // ẋ = x log(a/x): log x(t) = log a + e^{-t}(log x0 − log a)
        let (a, x0) = (3.0f64, 0.5f64);
        let mu = FiniteMeasure::dirac(scalar(a));
        let exact = (a.ln() + (-1.0f64).exp() * (x0.ln() - a.ln())).exp();
        let s = semigroup(1.0, &mu, &scalar(x0), 1e-8, &SolverConfig::default()).unwrap();
        assert_abs_diff_eq!(s.as_sym().get(0, 0).ln(), exact.ln(), epsilon = 1e-8);
        let e1 = (euler_flow(1.0, 64, &mu, &scalar(x0)).unwrap().as_sym().get(0, 0).ln() - exact.ln()).abs();
        let e2 = (euler_flow(1.0, 128, &mu, &scalar(x0)).unwrap().as_sym().get(0, 0).ln() - exact.ln()).abs();
        assert!((e1 / e2 - 2.0).abs() < 0.6, "{}", e1 / e2);
    }

    #[test]
    fn euler_at_the_mean_stays_put() {
        let mu = random_measure_with(&mut seeded(5), 3, 3, 0.6, false).unwrap();
        let l = karcher_mean(&mu, &SolverConfig::with_tol(1e-12)).unwrap().mean;
        let e = euler_flow(1.0, 50, &mu, &l).unwrap();
        assert!(thompson_distance(&e, &l).unwrap() <= 1e-9);
    }

    #[test]
    fn ode_consistency_holds() {
        let mut rng = seeded(6);
        let mu = random_measure_with(&mut rng, 3, 3, 0.6, false).unwrap();
        let x = random_spd_with(&mut rng, 3, 0.6);
        let chk = ode_consistency(1.0, 1e-3, &mu, &x, 1e-8, &SolverConfig::default()).unwrap();
        assert!(chk.holds(), "{chk:?}");
    }
}
