//! Random SPD matrices and measures for tests and the verification harness.

use nalgebra::DMatrix;
use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::measure::FiniteMeasure;
use crate::rng::{seeded, Rng};
use crate::spd::{SpdMatrix, SymMatrix};

/// Symmetric matrix with i.i.d. standard normal upper triangle.
pub fn random_sym_with(rng: &mut Rng, dim: usize) -> SymMatrix {
    let mut m = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let x: f64 = rng.sample(StandardNormal);
            m[(i, j)] = x;
            m[(j, i)] = x;
        }
    }
    SymMatrix::from_symmetric(m)
}

/// `exp(scale·W)` for a random symmetric `W`.
pub fn random_spd_with(rng: &mut Rng, dim: usize, scale: f64) -> SpdMatrix {
    let w = random_sym_with(rng, dim);
    if scale == 0.0 {
        return SpdMatrix::identity(dim);
    }
    (&w * scale)
        .exp()
        .expect("exponential of a finite symmetric matrix is SPD")
}

pub fn random_spd(dim: usize, scale: f64, seed: u64) -> SpdMatrix {
    random_spd_with(&mut seeded(seed), dim, scale)
}

/// Random invertible matrix (Gaussian entries, shifted towards the identity).
pub fn random_invertible_with(rng: &mut Rng, dim: usize) -> DMatrix<f64> {
    loop {
        let g = DMatrix::from_fn(dim, dim, |i, j| {
            let x: f64 = rng.sample(StandardNormal);
            x + if i == j { 1.5 } else { 0.0 }
        });
        let sv = g.clone().singular_values();
        if sv.min() > 0.1 * sv.max() {
            return g;
        }
    }
}

/// Weights `p_i / Σp` with integer `p_i ∈ [1, 9]`; rational with small denominators.
pub fn random_rational_weights(rng: &mut Rng, k: usize) -> Vec<f64> {
    let p: Vec<u32> = (0..k).map(|_| rng.random_range(1..=9)).collect();
    let s: u32 = p.iter().sum();
    p.iter().map(|&x| x as f64 / s as f64).collect()
}

/// `k` atoms of `random_spd_with(scale)`; uniform or random rational weights.
pub fn random_measure_with(
    rng: &mut Rng,
    dim: usize,
    k: usize,
    scale: f64,
    uniform: bool,
) -> Result<FiniteMeasure> {
    let atoms: Vec<SpdMatrix> = (0..k).map(|_| random_spd_with(rng, dim, scale)).collect();
    if uniform {
        FiniteMeasure::uniform(atoms)
    } else {
        let w = random_rational_weights(rng, k);
        FiniteMeasure::new(atoms, w)
    }
}
