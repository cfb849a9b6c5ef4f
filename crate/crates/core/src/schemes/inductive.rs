//! Inductive means `S_{n+1} = S_n #_{1/(n+1)} Y_{n+1}`, driven by a cyclic
//! (nodice) or i.i.d. (stochastic) choice of the `Y_n`.

use std::time::Instant;

use crate::error::{check_dim, Error, Result};
use crate::measure::{diameter, FiniteMeasure};
use crate::rng::{categorical, cumulative, seeded};
use crate::spd::{geodesic, thompson_distance, SpdMatrix};
use crate::trace::{log_spaced, IterationTrace, TraceMeta};

/// Yields `(n, S_n)` for `S_1 = Y_1`, `S_{n+1} = S_n #_{1/(n+1)} Y_{n+1}`.
pub struct InductiveMeans<I> {
    draws: I,
    current: Option<SpdMatrix>,
    n: u64,
}

impl<I: Iterator<Item = SpdMatrix>> InductiveMeans<I> {
    pub fn new(draws: I) -> Self {
        InductiveMeans {
            draws,
            current: None,
            n: 0,
        }
    }
}

impl<I: Iterator<Item = SpdMatrix>> Iterator for InductiveMeans<I> {
    type Item = Result<(u64, SpdMatrix)>;

    fn next(&mut self) -> Option<Self::Item> {
        let y = self.draws.next()?;
        let next = match &self.current {
            None => Ok(y),
            Some(s) => geodesic(s, &y, 1.0 / (self.n + 1) as f64),
        };
        Some(next.map(|s| {
            self.n += 1;
            self.current = Some(s.clone());
            (self.n, s)
        }))
    }
}

/// Atom indices `0, 1, …, k−1, 0, 1, …` (the residue of `n` mod `k`, 1-based `k` for residue 0).
fn cyclic_draws(mu: &FiniteMeasure, n: u64) -> impl Iterator<Item = SpdMatrix> + '_ {
    let k = mu.len() as u64;
    (0..n).map(move |i| mu.atoms()[(i % k) as usize].clone())
}

/// The seed-indexed categorical draw stream shared by the stochastic and truncated schemes.
pub fn draw_indices(mu: &FiniteMeasure, n: usize, seed: u64) -> Vec<usize> {
    let cum = cumulative(mu.weights());
    let mut rng = seeded(seed);
    (0..n).map(|_| categorical(&mut rng, &cum)).collect()
}

fn meta(scheme: &str, seed: Option<u64>, mu: &FiniteMeasure) -> TraceMeta {
    TraceMeta {
        scheme: scheme.into(),
        seed,
        measure_digest: mu.digest(),
    }
}

/// Runs an inductive-mean recursion, recording `d_∞(S_n, reference)` at every step.
fn run<I, F>(draws: I, reference: &SpdMatrix, mut trace: IterationTrace, mut keep: F) -> Result<IterationTrace>
where
    I: Iterator<Item = SpdMatrix>,
    F: FnMut(u64, &SpdMatrix),
{
    let start = Instant::now();
    for step in InductiveMeans::new(draws) {
        let (n, s) = step?;
        trace.push(n, thompson_distance(&s, reference)?, start.elapsed().as_nanos() as u64);
        keep(n, &s);
    }
    Ok(trace)
}

/// Invariants of the nodice recursion observed along a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodiceInvariants {
    pub diameter: f64,
    /// `max_n d_∞(S_n, A_1) − diam`; the iterates stay in the diameter ball when `≤ 0`.
    pub radius_excess: f64,
    /// `max_n d_∞(S_n, S_{n+1}) − 2 diam/(n+1)`; `-inf` for a single step.
    pub step_excess: f64,
}

impl NodiceInvariants {
    pub const SLACK: f64 = 1e-10;

    pub fn holds(&self) -> bool {
        self.radius_excess <= Self::SLACK && self.step_excess <= Self::SLACK
    }
}

fn require_uniform(mu: &FiniteMeasure) -> Result<()> {
    if mu.is_uniform(1e-12) {
        Ok(())
    } else {
        Err(Error::Hypothesis(format!(
            "nodice needs equal weights 1/{}, got {:?}",
            mu.len(),
            mu.weights()
        )))
    }
}

/// Deterministic cyclic inductive means over `n_cycles · k` steps.
///
/// Errors are recorded at every step; full iterates at every cycle boundary.
pub fn nodice_sequence(mu: &FiniteMeasure, n_cycles: usize, reference: &SpdMatrix) -> Result<IterationTrace> {
    Ok(nodice_sequence_checked(mu, n_cycles, reference)?.0)
}

/// [`nodice_sequence`] together with the boundedness and step-size invariants.
pub fn nodice_sequence_checked(
    mu: &FiniteMeasure,
    n_cycles: usize,
    reference: &SpdMatrix,
) -> Result<(IterationTrace, NodiceInvariants)> {
    require_uniform(mu)?;
    check_dim(mu.dim(), reference.dim())?;
    if n_cycles == 0 {
        return Err(Error::InvalidArgument("n_cycles must be positive".into()));
    }
    let k = mu.len() as u64;
    let diam = diameter(mu);
    let a1 = &mu.atoms()[0];
    let mut inv = NodiceInvariants {
        diameter: diam,
        radius_excess: f64::NEG_INFINITY,
        step_excess: f64::NEG_INFINITY,
    };
    let mut iterates = Vec::new();
    let mut prev: Option<SpdMatrix> = None;
    let mut failure = None;
    let trace = run(
        cyclic_draws(mu, n_cycles as u64 * k),
        reference,
        IterationTrace::new(meta("nodice", None, mu)),
        |n, s| {
            let radius = thompson_distance(s, a1);
            match radius {
                Ok(r) => inv.radius_excess = inv.radius_excess.max(r - diam),
                Err(e) => failure = Some(e),
            }
            if let Some(p) = &prev {
                // step from S_{n-1} to S_n, bounded by 2 diam / n
                match thompson_distance(p, s) {
                    Ok(d) => inv.step_excess = inv.step_excess.max(d - 2.0 * diam / n as f64),
                    Err(e) => failure = Some(e),
                }
            }
            if n % k == 0 {
                iterates.push((n, s.clone()));
            }
            prev = Some(s.clone());
        },
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let mut trace = trace;
    trace.iterates = iterates;
    Ok((trace, inv))
}

/// i.i.d. inductive means; `Y_i` drawn from `mu` by the seeded categorical stream.
pub fn stochastic_sequence(mu: &FiniteMeasure, n_steps: usize, seed: u64, reference: &SpdMatrix) -> Result<IterationTrace> {
    check_dim(mu.dim(), reference.dim())?;
    let idx = draw_indices(mu, n_steps, seed);
    let draws = idx.into_iter().map(|i| mu.atoms()[i].clone());
    let mut kept = Vec::new();
    let mut trace = run(draws, reference, IterationTrace::new(meta("stochastic", Some(seed), mu)), |n, s| {
        if log_spaced(n) || n == n_steps as u64 {
            kept.push((n, s.clone()));
        }
    })?;
    trace.iterates = kept;
    Ok(trace)
}

/// `Y^R`: atoms at distance `≥ R` from `center` replaced by `center`, per atom of `mu`.
fn truncated_atoms(mu: &FiniteMeasure, r: f64, center: &SpdMatrix) -> Result<Vec<SpdMatrix>> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!("truncation radius {r} must be positive")));
    }
    check_dim(mu.dim(), center.dim())?;
    mu.atoms()
        .iter()
        .map(|a| Ok(if thompson_distance(center, a)? >= r { center.clone() } else { a.clone() }))
        .collect()
}

/// Stochastic inductive means on the truncated draws `Y_i^R`, coupled to
/// [`stochastic_sequence`] through the same draw stream.
pub fn truncated_sequence(
    mu: &FiniteMeasure,
    n_steps: usize,
    seed: u64,
    r: f64,
    center: &SpdMatrix,
    reference: &SpdMatrix,
) -> Result<IterationTrace> {
    check_dim(mu.dim(), reference.dim())?;
    let atoms = truncated_atoms(mu, r, center)?;
    let idx = draw_indices(mu, n_steps, seed);
    let draws = idx.into_iter().map(|i| atoms[i].clone());
    let mut kept = Vec::new();
    let mut trace = run(draws, reference, IterationTrace::new(meta("truncated_stochastic", Some(seed), mu)), |n, s| {
        if log_spaced(n) || n == n_steps as u64 {
            kept.push((n, s.clone()));
        }
    })?;
    trace.iterates = kept;
    Ok(trace)
}

/// Pathwise comparison of the untruncated and truncated sequences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingCheck {
    pub steps: usize,
    /// `max_n [d_∞(X_n, X_n^R) − (1/n) Σ_{i≤n} d_∞(Y_i, Y_i^R)]`.
    pub worst_excess: f64,
    /// Steps where the excess is above the slack.
    pub violations: usize,
}

impl CouplingCheck {
    pub const SLACK: f64 = 1e-10;

    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// Runs both coupled sequences and checks `d_∞(X_n, X_n^R) ≤ (1/n) Σ d_∞(Y_i, Y_i^R)` at every `n`.
pub fn truncation_coupling_check(
    mu: &FiniteMeasure,
    n_steps: usize,
    seed: u64,
    r: f64,
    center: &SpdMatrix,
) -> Result<CouplingCheck> {
    let atoms_r = truncated_atoms(mu, r, center)?;
    let gaps: Vec<f64> = mu
        .atoms()
        .iter()
        .zip(&atoms_r)
        .map(|(a, b)| thompson_distance(a, b))
        .collect::<Result<_>>()?;
    let idx = draw_indices(mu, n_steps, seed);
    let plain = InductiveMeans::new(idx.iter().map(|&i| mu.atoms()[i].clone()));
    let trunc = InductiveMeans::new(idx.iter().map(|&i| atoms_r[i].clone()));
    let mut sum = 0.0;
    let mut chk = CouplingCheck {
        steps: n_steps,
        worst_excess: f64::NEG_INFINITY,
        violations: 0,
    };
    for ((p, t), &i) in plain.zip(trunc).zip(&idx) {
        let ((n, x), (_, xr)) = (p?, t?);
        sum += gaps[i];
        let excess = thompson_distance(&x, &xr)? - sum / n as f64;
        chk.worst_excess = chk.worst_excess.max(excess);
        if excess > CouplingCheck::SLACK {
            chk.violations += 1;
        }
    }
    Ok(chk)
}

/// Which approximation scheme to run, with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchemeSpec {
    /// `cycles` full passes over the (equally weighted) atoms.
    Nodice { cycles: usize },
    Stochastic { n_steps: usize, seed: u64 },
    TruncatedStochastic { n_steps: usize, seed: u64, radius: f64 },
}

impl SchemeSpec {
    pub fn name(&self) -> &'static str {
        match self {
            SchemeSpec::Nodice { .. } => "nodice",
            SchemeSpec::Stochastic { .. } => "stochastic",
            SchemeSpec::TruncatedStochastic { .. } => "truncated_stochastic",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (n, r) = match *self {
            SchemeSpec::Nodice { cycles } => (cycles, None),
            SchemeSpec::Stochastic { n_steps, .. } => (n_steps, None),
            SchemeSpec::TruncatedStochastic { n_steps, radius, .. } => (n_steps, Some(radius)),
        };
        if n == 0 {
            return Err(Error::InvalidArgument("scheme needs at least one step".into()));
        }
        if let Some(r) = r {
            if !(r > 0.0) {
                return Err(Error::InvalidArgument(format!("truncation radius {r} must be positive")));
            }
        }
        Ok(())
    }

    /// Runs the scheme; `center` is the truncation center (ignored otherwise).
    pub fn run(&self, mu: &FiniteMeasure, reference: &SpdMatrix, center: &SpdMatrix) -> Result<IterationTrace> {
        self.validate()?;
        match *self {
            SchemeSpec::Nodice { cycles } => nodice_sequence(mu, cycles, reference),
            SchemeSpec::Stochastic { n_steps, seed } => stochastic_sequence(mu, n_steps, seed, reference),
            SchemeSpec::TruncatedStochastic { n_steps, seed, radius } => {
                truncated_sequence(mu, n_steps, seed, radius, center, reference)
            }
        }
    }
}
