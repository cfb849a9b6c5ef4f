//! Exact L¹-Wasserstein distance between finite measures.
//!
//! Weights are put over a common denominator `D` and the transport problem is
//! solved as an integer min-cost flow (successive shortest paths with
//! Dijkstra and node potentials) on `source → μ atoms → ν atoms → sink`.

use num_integer::Integer;

use crate::error::{check_dim, Error, Result};
use crate::measure::FiniteMeasure;
use crate::spd::thompson_distance;

pub const MAX_DENOMINATOR: u64 = 1_000_000;
pub const RATIONALIZATION_TOL: f64 = 1e-9;

/// A coupling of two finite measures and its cost.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    /// `flow[i][j]`: mass moved from atom `i` of μ to atom `j` of ν.
    pub flow: Vec<Vec<f64>>,
    pub cost: f64,
}

impl TransportPlan {
    /// Largest marginal violation against `(mu, nu)`.
    pub fn marginal_error(&self, mu: &FiniteMeasure, nu: &FiniteMeasure) -> f64 {
        let mut err: f64 = 0.0;
        for (row, w) in self.flow.iter().zip(mu.weights()) {
            err = err.max((row.iter().sum::<f64>() - w).abs());
        }
        for (j, w) in nu.weights().iter().enumerate() {
            let col: f64 = self.flow.iter().map(|r| r[j]).sum();
            err = err.max((col - w).abs());
        }
        err
    }
}

/// Pairwise Thompson distances between the atoms of `mu` (rows) and `nu` (columns).
pub fn distance_matrix(mu: &FiniteMeasure, nu: &FiniteMeasure) -> Result<Vec<Vec<f64>>> {
    check_dim(mu.dim(), nu.dim())?;
    mu.atoms()
        .iter()
        .map(|a| nu.atoms().iter().map(|b| thompson_distance(a, b)).collect())
        .collect()
}

pub fn plan_cost(flow: &[Vec<f64>], dist: &[Vec<f64>]) -> f64 {
    flow.iter()
        .zip(dist)
        .map(|(f, d)| f.iter().zip(d).map(|(x, y)| x * y).sum::<f64>())
        .sum()
}

/// Best rational approximation `p/q` of `x` with `|x − p/q| < tol`, `q ≤ max_q`.
fn rationalize(x: f64, tol: f64, max_q: u64) -> Option<(u64, u64)> {
    // continued-fraction convergents
    let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a > 1e12 {
            break;
        }
        let a = a as u64;
        let (p2, q2) = (a * p1 + p0, a * q1 + q0);
        if q2 > max_q {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        if (x - p1 as f64 / q1 as f64).abs() < tol {
            return Some((p1, q1));
        }
        let frac = r - a as f64;
        if frac == 0.0 {
            break;
        }
        r = 1.0 / frac;
    }
    None
}

/// Integer masses `P_i` with `Σ P_i = D` for both weight vectors over one denominator.
fn common_denominator(a: &[f64], b: &[f64]) -> Result<(Vec<u64>, Vec<u64>, u64)> {
    let mut den = 1u64;
    for &w in a.iter().chain(b) {
        let fail = Error::Rationalization {
            weight: w,
            max_denominator: MAX_DENOMINATOR,
        };
        let (_, q) = rationalize(w, RATIONALIZATION_TOL, MAX_DENOMINATOR).ok_or(fail.clone())?;
        den = den.lcm(&q);
        if den > MAX_DENOMINATOR {
            return Err(fail);
        }
    }
    let to_units = |ws: &[f64]| -> Result<Vec<u64>> {
        let units: Vec<u64> = ws.iter().map(|w| (w * den as f64).round() as u64).collect();
        if units.iter().sum::<u64>() != den {
            return Err(Error::Rationalization {
                weight: ws.iter().sum(),
                max_denominator: MAX_DENOMINATOR,
            });
        }
        Ok(units)
    };
    Ok((to_units(a)?, to_units(b)?, den))
}

struct Edge {
    to: usize,
    cap: u64,
    cost: f64,
}

/// Min-cost flow by successive shortest paths; returns the flow on each edge.
struct FlowGraph {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl FlowGraph {
    fn new(n: usize) -> Self {
        FlowGraph {
            edges: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: u64, cost: f64) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to, cap, cost });
        self.adj[from].push(id);
        self.edges.push(Edge {
            to: from,
            cap: 0,
            cost: -cost,
        });
        self.adj[to].push(id + 1);
        id
    }

    fn run(&mut self, s: usize, t: usize, demand: u64) -> u64 {
        let n = self.adj.len();
        let mut pot = vec![0.0; n];
        let mut sent = 0;
        while sent < demand {
            // dense Dijkstra on reduced costs
            let mut dist = vec![f64::INFINITY; n];
            let mut prev_edge = vec![usize::MAX; n];
            let mut done = vec![false; n];
            dist[s] = 0.0;
            loop {
                let mut u = usize::MAX;
                for v in 0..n {
                    if !done[v] && dist[v].is_finite() && (u == usize::MAX || dist[v] < dist[u]) {
                        u = v;
                    }
                }
                if u == usize::MAX {
                    break;
                }
                done[u] = true;
                for &e in &self.adj[u] {
                    let edge = &self.edges[e];
                    if edge.cap == 0 || done[edge.to] {
                        continue;
                    }
                    let reduced = (edge.cost + pot[u] - pot[edge.to]).max(0.0);
                    let nd = dist[u] + reduced;
                    if nd < dist[edge.to] {
                        dist[edge.to] = nd;
                        prev_edge[edge.to] = e;
                    }
                }
            }
            if !dist[t].is_finite() {
                break;
            }
            for v in 0..n {
                if dist[v].is_finite() {
                    pot[v] += dist[v];
                }
            }
            let mut push = demand - sent;
            let mut v = t;
            while v != s {
                let e = prev_edge[v];
                push = push.min(self.edges[e].cap);
                v = self.edges[e ^ 1].to;
            }
            let mut v = t;
            while v != s {
                let e = prev_edge[v];
                self.edges[e].cap -= push;
                self.edges[e ^ 1].cap += push;
                v = self.edges[e ^ 1].to;
            }
            sent += push;
        }
        sent
    }
}

/// Exact `W₁(μ, ν)` under the Thompson ground metric, with an optimal plan.
pub fn w1_distance(mu: &FiniteMeasure, nu: &FiniteMeasure) -> Result<(f64, TransportPlan)> {
    let dist = distance_matrix(mu, nu)?;
    w1_with_costs(mu, nu, &dist)
}

/// Same as [`w1_distance`] with a precomputed ground-cost matrix.
pub fn w1_with_costs(mu: &FiniteMeasure, nu: &FiniteMeasure, dist: &[Vec<f64>]) -> Result<(f64, TransportPlan)> {
    let (m, n) = (mu.len(), nu.len());
    let (p, q, den) = common_denominator(mu.weights(), nu.weights())?;
    let (s, t) = (m + n, m + n + 1);
    let mut g = FlowGraph::new(m + n + 2);
    for (i, &pi) in p.iter().enumerate() {
        g.add_edge(s, i, pi, 0.0);
    }
    for (j, &qj) in q.iter().enumerate() {
        g.add_edge(m + j, t, qj, 0.0);
    }
    let mut ids = vec![vec![0usize; n]; m];
    for i in 0..m {
        for j in 0..n {
            ids[i][j] = g.add_edge(i, m + j, den, dist[i][j]);
        }
    }
    let sent = g.run(s, t, den);
    debug_assert_eq!(sent, den);
    let flow: Vec<Vec<f64>> = ids
        .iter()
        .map(|row| {
            row.iter()
                .map(|&e| g.edges[e ^ 1].cap as f64 / den as f64)
                .collect()
        })
        .collect();
    let cost = plan_cost(&flow, dist);
    Ok((cost, TransportPlan { flow, cost }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::sample_empirical;
    use crate::random::{random_measure_with, random_spd_with};
    use crate::rng::{seeded, Rng};
    use crate::spd::SpdMatrix;
    use approx::assert_abs_diff_eq;
    use rand::seq::SliceRandom;

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    /// Northwest-corner vertex of the transport polytope under random row/column orders.
    fn random_feasible_plan(rng: &mut Rng, a: &[f64], b: &[f64]) -> Vec<Vec<f64>> {
        let mut rows: Vec<usize> = (0..a.len()).collect();
        let mut cols: Vec<usize> = (0..b.len()).collect();
        rows.shuffle(rng);
        cols.shuffle(rng);
        let (mut ra, mut rb) = (a.to_vec(), b.to_vec());
        let mut flow = vec![vec![0.0; b.len()]; a.len()];
        let (mut i, mut j) = (0, 0);
        while i < rows.len() && j < cols.len() {
            let (r, c) = (rows[i], cols[j]);
            let x = ra[r].min(rb[c]);
            flow[r][c] = x;
            ra[r] -= x;
            rb[c] -= x;
            if ra[r] <= rb[c] {
                i += 1;
            } else {
                j += 1;
            }
        }
        flow
    }

    #[test]
    fn rationalize_simple_fractions() {
        assert_eq!(rationalize(0.25, 1e-9, 1000), Some((1, 4)));
        assert_eq!(rationalize(1.0 / 3.0, 1e-9, 1000), Some((1, 3)));
        assert_eq!(rationalize(1.0, 1e-9, 1000), Some((1, 1)));
        assert_eq!(rationalize(std::f64::consts::PI - 3.0, 1e-9, 1000), None);
    }

    #[test]
    fn irrational_weights_fail_loudly() {
        let a = SpdMatrix::identity(2);
        let atoms = vec![a.clone(), SpdMatrix::scalar(2, 2.0).unwrap(), SpdMatrix::scalar(2, 3.0).unwrap()];
        let w = vec![1.0 / std::f64::consts::PI, 1.0 / std::f64::consts::E, std::f64::consts::FRAC_1_SQRT_2];
        let mu = FiniteMeasure::new(atoms, w).unwrap();
        assert!(matches!(w1_distance(&mu, &mu), Err(Error::Rationalization { .. })));
    }

    #[test]
    fn dirac_pair_and_self_distance() {
        let mut rng = seeded(1);
        let a = random_spd_with(&mut rng, 3, 0.5);
        let b = random_spd_with(&mut rng, 3, 0.5);
        let (w, plan) = w1_distance(&FiniteMeasure::dirac(a.clone()), &FiniteMeasure::dirac(b.clone())).unwrap();
        assert_abs_diff_eq!(w, thompson_distance(&a, &b).unwrap(), epsilon = 1e-15);
        assert_eq!(plan.flow, vec![vec![1.0]]);
        let mu = random_measure_with(&mut rng, 3, 5, 0.5, false).unwrap();
        assert_abs_diff_eq!(w1_distance(&mu, &mu).unwrap().0, 0.0, epsilon = 1e-13);
    }

    #[test]
    fn uniform_equal_size_matches_assignment_brute_force() {
        let mut rng = seeded(2);
        for n in 1..=7 {
            let mu = random_measure_with(&mut rng, 2, n, 0.6, true).unwrap();
            let nu = random_measure_with(&mut rng, 2, n, 0.6, true).unwrap();
            let d = distance_matrix(&mu, &nu).unwrap();
            let brute = permutations(n)
                .iter()
                .map(|p| p.iter().enumerate().map(|(i, &j)| d[i][j]).sum::<f64>() / n as f64)
                .fold(f64::INFINITY, f64::min);
            let (w, plan) = w1_distance(&mu, &nu).unwrap();
            assert_abs_diff_eq!(w, brute, epsilon = 1e-12);
            assert!(plan.marginal_error(&mu, &nu) < 1e-12);
        }
    }

    #[test]
    fn optimal_against_random_feasible_plans() {
        let mut rng = seeded(3);
        for _ in 0..5 {
            let mu = random_measure_with(&mut rng, 3, 5, 0.6, false).unwrap();
            let nu = random_measure_with(&mut rng, 3, 4, 0.6, false).unwrap();
            let d = distance_matrix(&mu, &nu).unwrap();
            let (w, plan) = w1_distance(&mu, &nu).unwrap();
            assert!(plan.marginal_error(&mu, &nu) <= 1e-10);
            assert_abs_diff_eq!(plan.cost, plan_cost(&plan.flow, &d), epsilon = 1e-10);
            for _ in 0..200 {
                let f = random_feasible_plan(&mut rng, mu.weights(), nu.weights());
                assert!(w <= plan_cost(&f, &d) + 1e-12);
            }
        }
    }

    #[test]
    fn empirical_measures_with_repeated_atoms() {
        let mut rng = seeded(4);
        let mu = random_measure_with(&mut rng, 2, 4, 0.5, false).unwrap();
        let e = sample_empirical(&mu, 60, 5).unwrap();
        let (w, plan) = w1_distance(&mu, &e).unwrap();
        assert!(w >= 0.0);
        assert!(plan.marginal_error(&mu, &e) < 1e-10);
    }
}
