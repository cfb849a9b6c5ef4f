use crate::error::{Error, Result};
use crate::spd::SpdMatrix;

/// Knobs of the damped fixed-point Karcher solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Stop once the base-point-normalized residual is at most this.
    pub residual_tol: f64,
    pub max_iters: usize,
    /// Initial step length of each iteration.
    pub damping: f64,
    /// Smallest step length tried when the residual fails to decrease.
    pub min_damping: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            residual_tol: 1e-10,
            max_iters: 500,
            damping: 1.0,
            min_damping: 1.0 / 64.0,
        }
    }
}

/// Per-step tolerances in long resolvent chains are never tightened beyond this.
pub const CHAIN_TOL_FLOOR: f64 = 1e-12;

impl SolverConfig {
    pub fn with_tol(residual_tol: f64) -> Self {
        SolverConfig {
            residual_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.residual_tol > 0.0) {
            return Err(Error::InvalidArgument(format!("residual_tol {} must be positive", self.residual_tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be positive".into()));
        }
        if !(self.min_damping > 0.0 && self.min_damping <= self.damping && self.damping <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < min_damping ({}) <= damping ({}) <= 1",
                self.min_damping, self.damping
            )));
        }
        Ok(())
    }

    /// Configuration for each step of a resolvent chain of length `len`.
    pub fn for_chain(&self, len: usize) -> Self {
        let tol = (self.residual_tol / len.max(1) as f64).max(CHAIN_TOL_FLOOR.min(self.residual_tol));
        SolverConfig {
            residual_tol: tol,
            ..*self
        }
    }
}

/// Output of the Karcher solver.
#[derive(Debug, Clone)]
pub struct KarcherResult {
    pub mean: SpdMatrix,
    /// `‖X^{-1/2} (Σ w_i log_X A_i) X^{-1/2}‖` at the returned point.
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}
