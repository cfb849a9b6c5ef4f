//! Dense symmetric eigensolver (cyclic Jacobi) and the functional calculus
//! built on top of it.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Sweep cap for the cyclic Jacobi iteration.
pub const MAX_SWEEPS: usize = 100;
/// Off-diagonal Frobenius mass (relative to ‖M‖_F) at which Jacobi stops.
pub const OFF_DIAGONAL_TOL: f64 = 1e-14;

/// Spectral decomposition `M = Q diag(λ) Qᵀ` of a real symmetric matrix.
///
/// Eigenvalues are sorted ascending; the columns of `vectors` are the
/// matching orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Largest absolute eigenvalue, i.e. the spectral norm.
    pub fn spectral_radius(&self) -> f64 {
        self.min().abs().max(self.max().abs())
    }

    /// `Q diag(f(λ)) Qᵀ`, re-symmetrized. Fails if `f` is not finite on the spectrum.
    pub fn apply<F: Fn(f64) -> f64>(&self, f: F) -> Result<DMatrix<f64>> {
        let mapped = self.map_values(f)?;
        Ok(self.compose(&mapped))
    }

    pub(crate) fn map_values<F: Fn(f64) -> f64>(&self, f: F) -> Result<Vec<f64>> {
        self.values
            .iter()
            .map(|&l| {
                let v = f(l);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Domain { eigenvalue: l })
                }
            })
            .collect()
    }

    /// `Q diag(d) Qᵀ` for an arbitrary diagonal `d`.
    pub(crate) fn compose(&self, d: &[f64]) -> DMatrix<f64> {
        let q = &self.vectors;
        let mut scaled = q.clone();
        for (j, &dj) in d.iter().enumerate() {
            scaled.column_mut(j).scale_mut(dj);
        }
        let mut out = scaled * q.transpose();
        symmetrize(&mut out);
        out
    }

    /// Decomposition of `Q diag(f(λ)) Qᵀ`, re-sorted.
    pub(crate) fn mapped(&self, d: Vec<f64>) -> EigenDecomposition {
        let mut order: Vec<usize> = (0..d.len()).collect();
        order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
        let values = order.iter().map(|&i| d[i]).collect();
        let vectors = DMatrix::from_fn(self.vectors.nrows(), d.len(), |r, c| {
            self.vectors[(r, order[c])]
        });
        EigenDecomposition { values, vectors }
    }
}

/// Replace `m` by `(m + mᵀ)/2`.
pub fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Only the upper triangle is trusted; the input is symmetrized first.
pub fn jacobi_eigen(m: &DMatrix<f64>) -> Result<EigenDecomposition> {
    let n = m.nrows();
    if n == 0 || m.ncols() != n {
        return Err(Error::Malformed(format!(
            "expected a non-empty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    // row-major working copy
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = 0.5 * (m[(i, j)] + m[(j, i)]);
        }
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::Malformed("non-finite entry".into()));
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let fro = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let thresh = OFF_DIAGONAL_TOL * fro;
    let off_norm = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                s += a[p * n + q] * a[p * n + q];
            }
        }
        (2.0 * s).sqrt()
    };

    let mut converged = n == 1 || fro == 0.0;
    let mut sweep = 0;
    while !converged && sweep < MAX_SWEEPS {
        if off_norm(&a) <= thresh {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let g = 100.0 * apq.abs();
                if sweep > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    let new_kp = c * akp - s * akq;
                    let new_kq = s * akp + c * akq;
                    a[k * n + p] = new_kp;
                    a[p * n + k] = new_kp;
                    a[k * n + q] = new_kq;
                    a[q * n + k] = new_kq;
                }
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
        sweep += 1;
    }
    if !converged {
        let off = off_norm(&a);
        if off > thresh {
            return Err(Error::EigenNotConverged {
                sweeps: sweep,
                off_norm: off,
            });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[r * n + order[c]]);
    Ok(EigenDecomposition { values, vectors })
}
