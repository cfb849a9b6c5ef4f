//! Randomized verification of every inequality the library states.

use std::path::PathBuf;
use std::time::Instant;

use rand::Rng as _;
use rayon::prelude::*;
use serde::Serialize;

use karcher_core::random::{random_invertible_with, random_measure_with, random_spd_with, random_sym_with};
use karcher_core::rng::{substream, Rng};
use karcher_core::schemes::{
    convrate_check, entropy_lipschitz_check, perturbed_resolvent_solve, truncation_coupling_check,
    varying_measure_chain_gap, CHAIN_SLACK, CONVRATE_SLACK, ENTROPY_SLACK, PERTURBED_SLACK,
};
use karcher_core::solver::{
    karcher_mean, kobayashi_gap, ode_consistency, resolvent, resolvent_asymptotics_check, resolvent_bound_check,
    resolvent_identity_gap, semigroup, two_scale_gap, SolverConfig, TimeGrid,
};
use karcher_core::{
    convex_combine, sample_empirical, thompson_distance, w1_distance, FiniteMeasure, SpdMatrix, SymMatrix,
};

use crate::commands::emit;
use crate::error::{CliError, CliResult};

/// Every check the report must contain.
pub const CHECK_NAMES: [&str; 22] = [
    "EMI",
    "order sandwich",
    "metric axioms",
    "invariance",
    "W1 metric",
    "W1 convexity",
    "mean contraction",
    "resolvent contraction",
    "resolvent identity",
    "resolvent bounds",
    "resolvent asymptotics",
    "Kobayashi",
    "two-scale",
    "semigroup law",
    "flow contraction",
    "stationarity",
    "ODE consistency",
    "entropy Lipschitz",
    "perturbed resolvent",
    "truncation coupling",
    "varying-measure chain",
    "sequence envelopes",
];

/// The ODE check needs tight flows; it runs on every this-many-th instance.
const ODE_EVERY: usize = 5;
const ODE_FLOW_TOL: f64 = 1e-8;
const SEQUENCE_K_MAX: u64 = 100_000;

#[derive(Debug, Clone, Serialize)]
pub struct VerifyOptions {
    pub dims: Vec<usize>,
    pub instances: usize,
    pub seed: u64,
    pub flow_tol: f64,
    pub tol: f64,
    /// Replaces every check's slack (harness self-test).
    pub slack_override: Option<f64>,
    pub threads: Option<usize>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            dims: vec![2, 3, 4],
            instances: 50,
            seed: 0,
            flow_tol: 1e-4,
            tol: 1e-10,
            slack_override: None,
            threads: None,
            out: None,
        }
    }
}

/// One evaluated inequality `lhs ≤ rhs + slack`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub instance: usize,
    pub dim: usize,
    pub case: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
}

impl CheckRecord {
    pub fn excess(&self) -> f64 {
        self.lhs - self.rhs - self.slack
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSummary {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    /// The case with the largest `lhs − rhs − slack`.
    pub worst: Option<CheckRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub config: VerifyOptions,
    pub checks: Vec<CheckSummary>,
    pub failures: Vec<CheckRecord>,
    pub passed: bool,
    pub elapsed_s: f64,
}

struct Recorder {
    instance: usize,
    dim: usize,
    slack_override: Option<f64>,
    records: Vec<CheckRecord>,
}

impl Recorder {
    fn add(&mut self, name: &str, case: impl Into<String>, lhs: f64, rhs: f64, slack: f64) {
        let slack = self.slack_override.unwrap_or(slack);
        self.records.push(CheckRecord {
            name: name.to_string(),
            instance: self.instance,
            dim: self.dim,
            case: case.into(),
            lhs,
            rhs,
            slack,
            pass: lhs <= rhs + slack,
        });
    }
}

fn measure(rng: &mut Rng, dim: usize, max_atoms: usize, uniform: bool) -> CliResult<FiniteMeasure> {
    let k = rng.random_range(1..=max_atoms);
    Ok(random_measure_with(rng, dim, k, 0.6, uniform)?)
}

fn log_uniform(rng: &mut Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs[xs.len() / 2]
}

fn instance_checks(i: usize, dim: usize, opts: &VerifyOptions) -> CliResult<Vec<CheckRecord>> {
    let mut rng = substream(opts.seed, i as u64);
    let mut r = Recorder {
        instance: i,
        dim,
        slack_override: opts.slack_override,
        records: Vec::new(),
    };
    let d = |a: &SpdMatrix, b: &SpdMatrix| thompson_distance(a, b);
    let cfg = SolverConfig::with_tol(opts.tol);
    let flow_tol = opts.flow_tol;

    // pointwise geometry
    let a = random_spd_with(&mut rng, dim, 0.8);
    let b = random_spd_with(&mut rng, dim, 0.8);
    let c = random_spd_with(&mut rng, dim, 0.8);
    let dab = d(&a, &b)?;
    r.add("metric axioms", "identity", d(&a, &a)?, 0.0, 0.0);
    r.add("metric axioms", "symmetry", (dab - d(&b, &a)?).abs(), 0.0, 1e-12 * (1.0 + dab));
    r.add("metric axioms", "triangle", d(&a, &c)?, dab + d(&b, &c)?, 1e-10);
    let g = random_invertible_with(&mut rng, dim);
    let moved = d(&a.congruence(&g)?, &b.congruence(&g)?)?;
    r.add("invariance", "congruence", (moved - dab).abs(), 0.0, 1e-9 * (1.0 + dab));
    r.add("invariance", "inversion", (d(&a.inv(), &b.inv())? - dab).abs(), 0.0, 1e-9 * (1.0 + dab));
    for j in 0..10 {
        let x = random_spd_with(&mut rng, dim, 0.8);
        let y = random_spd_with(&mut rng, dim, 0.8);
        r.add("EMI", format!("pair {j}"), (&x.log() - &y.log()).norm(), d(&x, &y)?, 1e-10);
    }
    let w = b.whitened_by(&a.inv_sqrt())?;
    let slack = 1e-12 * (1.0 + dab.exp());
    r.add("order sandwich", "lower", (-dab).exp(), w.min_eigenvalue(), slack);
    r.add("order sandwich", "upper", w.max_eigenvalue(), dab.exp(), slack);

    // transport
    let mu = measure(&mut rng, dim, 5, false)?;
    let nu = measure(&mut rng, dim, 5, false)?;
    let eta = measure(&mut rng, dim, 5, false)?;
    let w1 = |p: &FiniteMeasure, q: &FiniteMeasure| -> CliResult<f64> { Ok(w1_distance(p, q)?.0) };
    let w_mn = w1(&mu, &nu)?;
    r.add("W1 metric", "self", w1(&mu, &mu)?, 0.0, 1e-12);
    r.add("W1 metric", "symmetry", (w_mn - w1(&nu, &mu)?).abs(), 0.0, 1e-10);
    r.add("W1 metric", "triangle", w1(&mu, &eta)?, w_mn + w1(&nu, &eta)?, 1e-9);
    let dirac = w1(&FiniteMeasure::dirac(a.clone()), &FiniteMeasure::dirac(b.clone()))?;
    r.add("W1 metric", "dirac", (dirac - dab).abs(), 0.0, 1e-12);
    let quad: Vec<FiniteMeasure> = (0..4).map(|_| measure(&mut rng, dim, 4, true)).collect::<CliResult<_>>()?;
    let t = rng.random_range(0..=16) as f64 / 16.0;
    let lhs = w1(&convex_combine(t, &quad[0], &quad[1])?, &convex_combine(t, &quad[2], &quad[3])?)?;
    let rhs = (1.0 - t) * w1(&quad[0], &quad[2])? + t * w1(&quad[1], &quad[3])?;
    r.add("W1 convexity", format!("t={t}"), lhs, rhs, 1e-10);

    // the mean
    let lam = karcher_mean(&mu, &SolverConfig::with_tol(1e-12))?.mean;
    let lam_nu = karcher_mean(&nu, &cfg)?.mean;
    r.add("mean contraction", "independent", d(&karcher_mean(&mu, &cfg)?.mean, &lam_nu)?, w_mn, 1e-7);
    let near = FiniteMeasure::new(
        mu.atoms()
            .iter()
            .map(|x| x.congruence(random_spd_with(&mut rng, dim, 0.15).sqrt().as_matrix()))
            .collect::<karcher_core::Result<_>>()?,
        mu.weights().to_vec(),
    )?;
    let lhs = d(&karcher_mean(&mu, &cfg)?.mean, &karcher_mean(&near, &cfg)?.mean)?;
    r.add("mean contraction", "perturbed", lhs, w1(&mu, &near)?, 1e-7);

    // resolvents
    let x = random_spd_with(&mut rng, dim, 0.8);
    let y = random_spd_with(&mut rng, dim, 0.8);
    let dxy = d(&x, &y)?;
    let lambda = log_uniform(&mut rng, 0.01, 10.0);
    let lhs = d(&resolvent(lambda, &mu, &x, &cfg)?, &resolvent(lambda, &mu, &y, &cfg)?)?;
    r.add("resolvent contraction", format!("lambda={lambda}"), lhs, dxy / (1.0 + lambda), 1e-8);
    let tau = log_uniform(&mut rng, 0.05, 5.0);
    let lam_small = tau * rng.random_range(0.05..0.999);
    let gap = resolvent_identity_gap(tau, lam_small, &mu, &x, &cfg)?;
    r.add("resolvent identity", format!("tau={tau} lambda={lam_small}"), gap, 0.0, 100.0 * opts.tol);
    let len = rng.random_range(1..=6);
    let lambdas: Vec<f64> = (0..len).map(|_| log_uniform(&mut rng, 0.01, 10.0)).collect();
    let bounds = resolvent_bound_check(&lambdas, &mu, &x, &cfg)?;
    r.add("resolvent bounds", "single", bounds.single.0, bounds.single.1, 1e-8);
    r.add("resolvent bounds", format!("chain of {len}"), bounds.chain.0, bounds.chain.1, 1e-8);
    let cx = mu.first_moment(&x)?;
    if cx > 0.0 {
        let lam_a = rng.random_range(0.01..0.95) * std::f64::consts::LN_2 / cx;
        let chk = resolvent_asymptotics_check(lam_a, &mu, &x, &SolverConfig::with_tol(1e-13))?;
        r.add("resolvent asymptotics", format!("lambda*C={}", lam_a * cx), chk.lhs, chk.rhs, 1e-9);
    }

    // resolvent chains and the flow
    let (g1, g2) = match i % 3 {
        0 => {
            let n = [20, 50, 100][i / 3 % 3];
            let h = TimeGrid::harmonic(n, rng.random_range(0..=3))?;
            let m = rng.random_range(5..=n);
            let u = TimeGrid::uniform(h.horizon(), m)?;
            (h, u)
        }
        1 => (
            TimeGrid::uniform(rng.random_range(0.2..3.0), rng.random_range(1..=60))?,
            TimeGrid::uniform(rng.random_range(0.2..3.0), rng.random_range(1..=60))?,
        ),
        _ => {
            let steps = |rng: &mut Rng| -> Vec<f64> {
                let n = rng.random_range(1..=60);
                (0..n).map(|_| rng.random_range(0.01..0.1)).collect()
            };
            (TimeGrid::from_steps(&steps(&mut rng))?, TimeGrid::from_steps(&steps(&mut rng))?)
        }
    };
    let (lhs, rhs) = kobayashi_gap(&g1, &g2, &mu, &x, &cfg)?;
    r.add("Kobayashi", format!("grids of {} and {} steps", g1.len(), g2.len()), lhs, rhs, 1e-7);
    let t = [0.5, 2.0][i % 2];
    for (m, n) in [(2, 4), (4, 16), (8, 64)] {
        let (lhs, rhs) = two_scale_gap(t, m, n, &mu, &x, &cfg)?;
        r.add("two-scale", format!("t={t} m={m} n={n}"), lhs, rhs, 1e-7);
    }
    let (s, t) = (rng.random_range(0.05..2.0), rng.random_range(0.05..2.0));
    let joint = semigroup(s + t, &mu, &x, flow_tol, &cfg)?;
    let split = semigroup(t, &mu, &semigroup(s, &mu, &x, flow_tol, &cfg)?, flow_tol, &cfg)?;
    r.add("semigroup law", format!("s={s} t={t}"), d(&joint, &split)?, 3.0 * flow_tol, 0.0);
    let t = [0.5, 1.0, 2.0][i % 3];
    let sx = semigroup(t, &mu, &x, flow_tol, &cfg)?;
    let sy = semigroup(t, &mu, &y, flow_tol, &cfg)?;
    r.add("flow contraction", format!("t={t}"), d(&sx, &sy)?, (-t).exp() * dxy, 2.0 * flow_tol);
    r.add("flow contraction", format!("to the mean, t={t}"), d(&sx, &lam)?, (-t).exp() * d(&x, &lam)?, 2.0 * flow_tol);
    let sl = semigroup(t, &mu, &lam, flow_tol, &cfg)?;
    r.add("stationarity", format!("t={t}"), d(&sl, &lam)?, flow_tol + 10.0 * opts.tol, 0.0);
    if i.is_multiple_of(ODE_EVERY) {
        let chk = ode_consistency(1.0, 1e-3, &mu, &x, ODE_FLOW_TOL, &cfg)?;
        r.add("ODE consistency", "t=1 h=1e-3", chk.gap, chk.tol, 0.0);
    }

    // perturbation lemmas
    let (lhs, rhs) = entropy_lipschitz_check(&a, &x, &y)?;
    r.add("entropy Lipschitz", "random triple", lhs, rhs, ENTROPY_SLACK);
    let root = x.sqrt();
    let y_near = random_spd_with(&mut rng, dim, 0.02).congruence(root.as_matrix())?;
    let e: SymMatrix = (&random_sym_with(&mut rng, dim) * 0.02).congruence(root.as_matrix())?;
    let p = perturbed_resolvent_solve(&x, &y_near, &e)?;
    r.add("perturbed resolvent", "small perturbation", p.dist, p.bound, PERTURBED_SLACK);
    let dists: Vec<f64> = mu.atoms().iter().map(|atom| d(&lam, atom)).collect::<karcher_core::Result<_>>()?;
    let radius = median(dists).max(1e-3);
    let run_seed = rng.random::<u64>();
    let coupling = truncation_coupling_check(&mu, 1000, run_seed, radius, &lam)?;
    r.add("truncation coupling", format!("R={radius}"), coupling.worst_excess, 0.0, 1e-10);
    let nus: Vec<FiniteMeasure> = (0..rng.random_range(1..=4))
        .map(|j| {
            if j % 2 == 0 {
                Ok(sample_empirical(&mu, 5, run_seed.wrapping_add(j as u64))?)
            } else {
                measure(&mut rng, dim, 4, false)
            }
        })
        .collect::<CliResult<_>>()?;
    let l = rng.random_range(0..=5);
    let (lhs, rhs) = varying_measure_chain_gap(&mu, &nus, l, &x, &y, &cfg)?;
    r.add("varying-measure chain", format!("{} measures, l={l}", nus.len()), lhs, rhs, CHAIN_SLACK);
    for alpha in [0.5, 1.0, 2.0] {
        let (beta, a0) = (rng.random_range(0.01..2.0), rng.random_range(0.0..2.0));
        let chk = convrate_check(alpha, beta, a0, SEQUENCE_K_MAX)?;
        let case = match chk.first_violation {
            Some(k) => format!("alpha={alpha} beta={beta} a0={a0}, first violated at k={k}"),
            None => format!("alpha={alpha} beta={beta} a0={a0}"),
        };
        r.add("sequence envelopes", case, chk.worst_excess, 0.0, CONVRATE_SLACK);
    }
    Ok(r.records)
}

/// `KARCHER_THREADS`, when set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var("KARCHER_THREADS").ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Runs every instance and merges the records in instance order.
pub fn run_verify(opts: &VerifyOptions) -> CliResult<RunReport> {
    if opts.dims.is_empty() || opts.dims.contains(&0) {
        return Err(CliError::Input("dims must be a non-empty list of positive integers".into()));
    }
    if opts.instances == 0 {
        return Err(CliError::Input("need at least one instance".into()));
    }
    let start = Instant::now();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Input(format!("thread pool: {e}")))?;
    let per_instance: Vec<Vec<CheckRecord>> = pool.install(|| {
        (0..opts.instances)
            .into_par_iter()
            .map(|i| instance_checks(i, opts.dims[i % opts.dims.len()], opts))
            .collect::<CliResult<_>>()
    })?;
    let records: Vec<CheckRecord> = per_instance.into_iter().flatten().collect();

    let checks: Vec<CheckSummary> = CHECK_NAMES
        .iter()
        .map(|&name| {
            let mine: Vec<&CheckRecord> = records.iter().filter(|r| r.name == name).collect();
            CheckSummary {
                name: name.to_string(),
                cases: mine.len(),
                failures: mine.iter().filter(|r| !r.pass).count(),
                worst: mine
                    .iter()
                    .max_by(|a, b| a.excess().total_cmp(&b.excess()))
                    .map(|r| (*r).clone()),
            }
        })
        .collect();
    let failures: Vec<CheckRecord> = records.iter().filter(|r| !r.pass).cloned().collect();
    // a check that never ran counts as failed
    let passed = failures.is_empty() && checks.iter().all(|c| c.cases > 0);
    Ok(RunReport {
        command: "verify".into(),
        config: opts.clone(),
        checks,
        failures,
        passed,
        elapsed_s: start.elapsed().as_secs_f64(),
    })
}

/// Prints one line per check, writes the JSON report, and fails unless everything passed.
pub fn cmd_verify(opts: &VerifyOptions) -> CliResult<RunReport> {
    let report = run_verify(opts)?;
    for c in &report.checks {
        let status = if c.cases > 0 && c.failures == 0 { "PASS" } else { "FAIL" };
        let worst = c
            .worst
            .as_ref()
            .map(|w| format!("worst lhs-rhs {:.3e} (slack {:.1e})", w.lhs - w.rhs, w.slack))
            .unwrap_or_else(|| "no cases".into());
        println!("{status} {:<22} {:>4} cases {:>4} failed  {worst}", c.name, c.cases, c.failures);
    }
    for f in report.failures.iter().take(20) {
        eprintln!(
            "failed: {} [instance {}, dim {}, {}]: lhs {:e} > rhs {:e} + slack {:e}",
            f.name, f.instance, f.dim, f.case, f.lhs, f.rhs, f.slack
        );
    }
    if report.failures.len() > 20 {
        eprintln!("... and {} more failures", report.failures.len() - 20);
    }
    if let Some(path) = &opts.out {
        emit(Some(path), &crate::json::to_string(&report))?;
    }
    if report.passed {
        Ok(report)
    } else {
        let failed: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| c.failures > 0 || c.cases == 0)
            .map(|c| c.name.as_str())
            .collect();
        Err(CliError::Verification(failed.join(", ")))
    }
}
