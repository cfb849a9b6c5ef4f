//! Finitely supported probability measures on the SPD cone.

use sha2::{Digest, Sha256};

use crate::error::{check_dim, Error, Result};
use crate::rng::{categorical, cumulative, seeded};
use crate::spd::{thompson_distance, SpdMatrix};

/// Atoms in the cone with positive weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMeasure {
    atoms: Vec<SpdMatrix>,
    weights: Vec<f64>,
}

impl FiniteMeasure {
    /// Drops zero-weight atoms and renormalizes the rest.
    pub fn new(atoms: Vec<SpdMatrix>, weights: Vec<f64>) -> Result<Self> {
        if atoms.len() != weights.len() {
            return Err(Error::InvalidArgument(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidArgument(format!("weight {w} is negative or not finite")));
        }
        let (atoms, weights): (Vec<_>, Vec<_>) = atoms
            .into_iter()
            .zip(weights)
            .filter(|(_, w)| *w > 0.0)
            .unzip();
        if atoms.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        let dim = atoms[0].dim();
        for a in &atoms {
            check_dim(dim, a.dim())?;
        }
        let total: f64 = weights.iter().sum();
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(FiniteMeasure { atoms, weights })
    }

    pub fn uniform(atoms: Vec<SpdMatrix>) -> Result<Self> {
        let k = atoms.len();
        Self::new(atoms, vec![1.0 / k as f64; k])
    }

    pub fn dirac(a: SpdMatrix) -> Self {
        FiniteMeasure {
            atoms: vec![a],
            weights: vec![1.0],
        }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].dim()
    }

    pub fn atoms(&self) -> &[SpdMatrix] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SpdMatrix, f64)> {
        self.atoms.iter().zip(self.weights.iter().copied())
    }

    /// True when every weight equals `1/k` within `tol`.
    pub fn is_uniform(&self, tol: f64) -> bool {
        let k = self.len() as f64;
        self.weights.iter().all(|w| (w - 1.0 / k).abs() <= tol)
    }

    /// `C(X) = Σ w_i d_∞(X, A_i)`, the first moment about `X`.
    pub fn first_moment(&self, x: &SpdMatrix) -> Result<f64> {
        let mut c = 0.0;
        for (a, w) in self.iter() {
            c += w * thompson_distance(x, a)?;
        }
        Ok(c)
    }

    /// SHA-256 over the dimension, weights and atom entries (bit patterns), hex encoded.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.dim() as u64).to_le_bytes());
        for (a, w) in self.iter() {
            h.update(w.to_bits().to_le_bytes());
            for x in a.as_matrix().iter() {
                h.update(x.to_bits().to_le_bytes());
            }
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn bitwise_eq(a: &SpdMatrix, b: &SpdMatrix) -> bool {
    a.dim() == b.dim()
        && a
            .as_matrix()
            .iter()
            .zip(b.as_matrix().iter())
            .all(|(x, y)| x.to_bits() == y.to_bits())
}

/// Appends `(a, w)`, merging into an existing bitwise-identical atom.
fn push_merged(atoms: &mut Vec<SpdMatrix>, weights: &mut Vec<f64>, a: &SpdMatrix, w: f64) {
    match atoms.iter().position(|b| bitwise_eq(a, b)) {
        Some(i) => weights[i] += w,
        None => {
            atoms.push(a.clone());
            weights.push(w);
        }
    }
}

/// `(1 − t)μ₁ + tμ₂`, merging atoms that are bitwise equal.
pub fn convex_combine(t: f64, mu1: &FiniteMeasure, mu2: &FiniteMeasure) -> Result<FiniteMeasure> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!("mixing weight {t} outside [0, 1]")));
    }
    check_dim(mu1.dim(), mu2.dim())?;
    let mut atoms = Vec::with_capacity(mu1.len() + mu2.len());
    let mut weights = Vec::with_capacity(mu1.len() + mu2.len());
    for (a, w) in mu1.iter() {
        push_merged(&mut atoms, &mut weights, a, (1.0 - t) * w);
    }
    for (a, w) in mu2.iter() {
        push_merged(&mut atoms, &mut weights, a, t * w);
    }
    FiniteMeasure::new(atoms, weights)
}

/// Replaces every atom at distance `≥ R` from `center` by `center`.
pub fn truncate(mu: &FiniteMeasure, center: &SpdMatrix, r: f64) -> Result<FiniteMeasure> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!("truncation radius {r} must be positive")));
    }
    check_dim(mu.dim(), center.dim())?;
    let mut atoms = Vec::with_capacity(mu.len());
    let mut weights = Vec::with_capacity(mu.len());
    for (a, w) in mu.iter() {
        let kept = if thompson_distance(center, a)? >= r { center } else { a };
        push_merged(&mut atoms, &mut weights, kept, w);
    }
    FiniteMeasure::new(atoms, weights)
}

/// Uniform measure on `n` i.i.d. draws from `mu` (atoms not merged).
pub fn sample_empirical(mu: &FiniteMeasure, n: usize, seed: u64) -> Result<FiniteMeasure> {
    if n == 0 {
        return Err(Error::InvalidArgument("empirical sample size must be positive".into()));
    }
    let cum = cumulative(mu.weights());
    let mut rng = seeded(seed);
    let atoms = (0..n)
        .map(|_| mu.atoms()[categorical(&mut rng, &cum)].clone())
        .collect();
    Ok(FiniteMeasure {
        atoms,
        weights: vec![1.0 / n as f64; n],
    })
}

/// Largest pairwise Thompson distance between atoms.
pub fn diameter(mu: &FiniteMeasure) -> f64 {
    let a = mu.atoms();
    let mut d: f64 = 0.0;
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            d = d.max(thompson_distance(&a[i], &a[j]).expect("atoms share a dimension"));
        }
    }
    d
}
