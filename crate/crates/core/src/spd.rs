//! Symmetric and symmetric positive-definite matrices, and the pointwise
//! geometry of the SPD cone under the Thompson metric.
//!
//! Every matrix function goes through [`EigenDecomposition`]; results are
//! re-symmetrized so that `SymMatrix` stays exactly symmetric.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{jacobi_eigen, symmetrize, EigenDecomposition};

/// Relative eigenvalue floor below which a matrix is not accepted as SPD.
pub const SPD_TOL: f64 = 1e-13;

/// A real symmetric matrix.
#[derive(Clone, PartialEq)]
pub struct SymMatrix {
    m: DMatrix<f64>,
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymMatrix").field("rows", &self.to_rows()).finish()
    }
}

impl SymMatrix {
    /// Wraps a square matrix, replacing it by its symmetric part.
    pub fn new(mut m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() == 0 || m.nrows() != m.ncols() {
            return Err(Error::Malformed(format!(
                "expected a non-empty square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::Malformed("non-finite entry".into()));
        }
        symmetrize(&mut m);
        Ok(SymMatrix { m })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::Malformed(format!(
                "row of length {} in a {n}-row matrix",
                bad.len()
            )));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn from_row_major(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::Malformed(format!(
                "{} entries for a {dim}x{dim} matrix",
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn zeros(dim: usize) -> Self {
        SymMatrix {
            m: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        SymMatrix {
            m: DMatrix::identity(dim, dim),
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        Self::new(DMatrix::from_fn(n, n, |i, j| if i == j { diag[i] } else { 0.0 }))
    }

    /// Trusted constructor for matrices that are symmetric by construction.
    pub(crate) fn from_symmetric(mut m: DMatrix<f64>) -> Self {
        symmetrize(&mut m);
        SymMatrix { m }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.m[(i, j)]).collect())
            .collect()
    }

    pub fn eigen(&self) -> Result<EigenDecomposition> {
        jacobi_eigen(&self.m)
    }

    /// Operator (spectral) norm.
    pub fn norm(&self) -> f64 {
        if self.m.iter().all(|x| *x == 0.0) {
            return 0.0;
        }
        self.eigen()
            .expect("Jacobi eigensolver failed on a finite symmetric matrix")
            .spectral_radius()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.norm()
    }

    /// `G M Gᵀ`.
    pub fn congruence(&self, g: &DMatrix<f64>) -> Result<SymMatrix> {
        check_dim(self.dim(), g.ncols())?;
        Ok(SymMatrix::from_symmetric(g * &self.m * g.transpose()))
    }

    pub fn exp(&self) -> Result<SpdMatrix> {
        let e = self.eigen()?;
        let vals = e.map_values(f64::exp)?;
        SpdMatrix::from_eigen(e.mapped(vals))
    }

    /// Largest absolute deviation from an exactly symmetric layout (always zero).
    pub fn asymmetry(&self) -> f64 {
        (&self.m - self.m.transpose()).abs().max()
    }
}

impl Add for &SymMatrix {
    type Output = SymMatrix;
    fn add(self, rhs: &SymMatrix) -> SymMatrix {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in SymMatrix + SymMatrix");
        SymMatrix::from_symmetric(&self.m + &rhs.m)
    }
}

impl Sub for &SymMatrix {
    type Output = SymMatrix;
    fn sub(self, rhs: &SymMatrix) -> SymMatrix {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in SymMatrix - SymMatrix");
        SymMatrix::from_symmetric(&self.m - &rhs.m)
    }
}

impl Mul<f64> for &SymMatrix {
    type Output = SymMatrix;
    fn mul(self, rhs: f64) -> SymMatrix {
        SymMatrix::from_symmetric(&self.m * rhs)
    }
}

impl Neg for &SymMatrix {
    type Output = SymMatrix;
    fn neg(self) -> SymMatrix {
        SymMatrix::from_symmetric(-&self.m)
    }
}

/// A symmetric positive-definite matrix, a point of the cone.
///
/// The spectral decomposition is computed once at construction and reused by
/// every matrix function (square roots, logarithms, powers).
#[derive(Clone)]
pub struct SpdMatrix {
    sym: SymMatrix,
    eig: EigenDecomposition,
}

impl fmt::Debug for SpdMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpdMatrix").field("rows", &self.sym.to_rows()).finish()
    }
}

impl PartialEq for SpdMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.sym == other.sym
    }
}

impl AsRef<SymMatrix> for SpdMatrix {
    fn as_ref(&self) -> &SymMatrix {
        &self.sym
    }
}

impl SpdMatrix {
    pub fn new(sym: SymMatrix) -> Result<Self> {
        let eig = sym.eigen()?;
        check_spd(&eig)?;
        Ok(SpdMatrix { sym, eig })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(SymMatrix::from_rows(rows)?)
    }

    pub fn from_row_major(dim: usize, entries: &[f64]) -> Result<Self> {
        Self::new(SymMatrix::from_row_major(dim, entries)?)
    }

    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        Self::new(SymMatrix::new(m)?)
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(SymMatrix::from_diagonal(diag)?)
    }

    pub fn identity(dim: usize) -> Self {
        let eig = EigenDecomposition {
            values: vec![1.0; dim],
            vectors: DMatrix::identity(dim, dim),
        };
        SpdMatrix {
            sym: SymMatrix::identity(dim),
            eig,
        }
    }

    /// Scalar multiple `c·I`.
    pub fn scalar(dim: usize, c: f64) -> Result<Self> {
        Self::from_diagonal(&vec![c; dim])
    }

    pub(crate) fn from_eigen(eig: EigenDecomposition) -> Result<Self> {
        check_spd(&eig)?;
        let sym = SymMatrix::from_symmetric(eig.compose(&eig.values));
        Ok(SpdMatrix { sym, eig })
    }

    pub fn dim(&self) -> usize {
        self.sym.dim()
    }

    pub fn as_sym(&self) -> &SymMatrix {
        &self.sym
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        self.sym.as_matrix()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.sym.to_rows()
    }

    pub fn eigen(&self) -> &EigenDecomposition {
        &self.eig
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eig.min()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eig.max()
    }

    /// `A^p` for real `p`.
    pub fn powf(&self, p: f64) -> Result<SpdMatrix> {
        let vals = self.eig.map_values(|l| l.powf(p))?;
        SpdMatrix::from_eigen(self.eig.mapped(vals))
    }

    pub fn sqrt(&self) -> SpdMatrix {
        let vals: Vec<f64> = self.eig.values.iter().map(|l| l.sqrt()).collect();
        SpdMatrix {
            sym: SymMatrix::from_symmetric(self.eig.compose(&vals)),
            eig: self.eig.mapped(vals),
        }
    }

    pub fn inv_sqrt(&self) -> SpdMatrix {
        let vals: Vec<f64> = self.eig.values.iter().map(|l| 1.0 / l.sqrt()).collect();
        SpdMatrix {
            sym: SymMatrix::from_symmetric(self.eig.compose(&vals)),
            eig: self.eig.mapped(vals),
        }
    }

    pub fn inv(&self) -> SpdMatrix {
        let vals: Vec<f64> = self.eig.values.iter().map(|l| 1.0 / l).collect();
        SpdMatrix {
            sym: SymMatrix::from_symmetric(self.eig.compose(&vals)),
            eig: self.eig.mapped(vals),
        }
    }

    pub fn log(&self) -> SymMatrix {
        let vals: Vec<f64> = self.eig.values.iter().map(|l| l.ln()).collect();
        SymMatrix::from_symmetric(self.eig.compose(&vals))
    }

    /// `d_∞(I, A) = max |log λ(A)|`; bounds `‖A‖` and `‖A⁻¹‖` by its exponential.
    pub fn log_norm(&self) -> f64 {
        self.eig.min().ln().abs().max(self.eig.max().ln().abs())
    }

    /// `G A Gᵀ` for an invertible `G`.
    pub fn congruence(&self, g: &DMatrix<f64>) -> Result<SpdMatrix> {
        SpdMatrix::new(self.sym.congruence(g)?)
    }

    /// `X^{-1/2} A X^{-1/2}` as an SPD matrix.
    pub fn whitened_by(&self, x_inv_sqrt: &SpdMatrix) -> Result<SpdMatrix> {
        self.congruence(x_inv_sqrt.as_matrix())
    }
}

fn check_spd(eig: &EigenDecomposition) -> Result<()> {
    let (lo, hi) = (eig.min(), eig.max());
    if lo <= SPD_TOL * (1.0 + hi) {
        Err(Error::NotPositiveDefinite {
            min_eigenvalue: lo,
            max_eigenvalue: hi,
        })
    } else {
        Ok(())
    }
}

/// Symmetric eigendecomposition (cyclic Jacobi).
pub fn sym_eigen(m: &SymMatrix) -> Result<EigenDecomposition> {
    m.eigen()
}

/// Functional calculus `f(M) = Q diag(f(λ)) Qᵀ`.
pub fn matrix_fn<F: Fn(f64) -> f64>(m: &SymMatrix, f: F) -> Result<SymMatrix> {
    Ok(SymMatrix::from_symmetric(m.eigen()?.apply(f)?))
}

/// Thompson metric `‖log(A^{-1/2} B A^{-1/2})‖`.
pub fn thompson_distance(a: &SpdMatrix, b: &SpdMatrix) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    if a == b {
        return Ok(0.0);
    }
    let w = b.as_sym().congruence(a.inv_sqrt().as_matrix())?.eigen()?;
    if w.min() <= 0.0 {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: w.min(),
            max_eigenvalue: w.max(),
        });
    }
    Ok(w.min().ln().abs().max(w.max().ln().abs()))
}

/// Weighted geometric mean `A #_t B = A^{1/2}(A^{-1/2} B A^{-1/2})^t A^{1/2}`, `t ∈ [0, 1]`.
pub fn geodesic(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Result<SpdMatrix> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!("geodesic parameter {t} outside [0, 1]")));
    }
    check_dim(a.dim(), b.dim())?;
    if t == 0.0 {
        return Ok(a.clone());
    }
    if t == 1.0 || a == b {
        return Ok(b.clone());
    }
    geodesic_extended(a, b, t)
}

/// The geodesic through `A` and `B` evaluated at any real parameter.
pub(crate) fn geodesic_extended(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Result<SpdMatrix> {
    let inner = b.whitened_by(&a.inv_sqrt())?.powf(t)?;
    inner.congruence(a.sqrt().as_matrix())
}

/// Relative operator entropy `log_X A = X^{1/2} log(X^{-1/2} A X^{-1/2}) X^{1/2}`.
pub fn log_point(x: &SpdMatrix, a: &SpdMatrix) -> Result<SymMatrix> {
    check_dim(x.dim(), a.dim())?;
    a.whitened_by(&x.inv_sqrt())?
        .log()
        .congruence(x.sqrt().as_matrix())
}

/// Inverse of [`log_point`]: `X^{1/2} exp(X^{-1/2} V X^{-1/2}) X^{1/2}`.
pub fn exp_point(x: &SpdMatrix, v: &SymMatrix) -> Result<SpdMatrix> {
    check_dim(x.dim(), v.dim())?;
    if v.as_matrix().iter().all(|e| *e == 0.0) {
        return Ok(x.clone());
    }
    v.congruence(x.inv_sqrt().as_matrix())?
        .exp()?
        .congruence(x.sqrt().as_matrix())
}

/// Loewner order `A ≤ B`: `λ_min(B − A) ≥ −1e-12·(1 + ‖A‖ + ‖B‖)`.
pub fn loewner_leq(a: &SymMatrix, b: &SymMatrix) -> Result<bool> {
    check_dim(a.dim(), b.dim())?;
    let tol = 1e-12 * (1.0 + a.norm() + b.norm());
    Ok((b - a).eigen()?.min() >= -tol)
}

/// Outcome of the second-order Taylor remainder bounds for `exp` and `log`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorCheck {
    /// `‖exp(X) − X − I‖`.
    pub exp_lhs: f64,
    /// `‖X‖² e^{‖X‖} / 2`.
    pub exp_rhs: f64,
    /// `(‖log X − (X − I)‖, ‖X − I‖² / (2(1 − ‖X − I‖)))` when `‖X − I‖ < 1`.
    pub log_sides: Option<(f64, f64)>,
}

impl TaylorCheck {
    pub const SLACK: f64 = 1e-12;

    pub fn exp_holds(&self) -> bool {
        self.exp_lhs <= self.exp_rhs + Self::SLACK
    }

    /// `None` when the log bound is not applicable.
    pub fn log_holds(&self) -> Option<bool> {
        self.log_sides.map(|(l, r)| l <= r + Self::SLACK)
    }

    pub fn holds(&self) -> (bool, Option<bool>) {
        (self.exp_holds(), self.log_holds())
    }
}

/// Evaluates both sides of the exp/log second-order remainder bounds at `X`.
pub fn taylor_remainder_check(x: &SymMatrix) -> Result<TaylorCheck> {
    let n = x.dim();
    let id = SymMatrix::identity(n);
    let xn = x.norm();
    let exp_x = x.exp()?;
    let exp_lhs = (&(exp_x.as_sym() - x) - &id).norm();
    let exp_rhs = xn * xn * xn.exp() / 2.0;

    let shifted = x - &id;
    let r = shifted.norm();
    let log_sides = if r < 1.0 {
        let log_x = SpdMatrix::new(x.clone())?.log();
        let lhs = (&log_x - &shifted).norm();
        Some((lhs, r * r / (2.0 * (1.0 - r))))
    } else {
        None
    };
    Ok(TaylorCheck {
        exp_lhs,
        exp_rhs,
        log_sides,
    })
}
