//! The on-disk measure format.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use karcher_core::{FiniteMeasure, SpdMatrix};

use crate::error::{CliError, CliResult};

/// Weights must sum to one within this.
pub const WEIGHT_SUM_TOL: f64 = 1e-9;
/// Relative asymmetry tolerated in input matrices.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// A finitely supported measure: `dim`, matrices as lists of rows, weights and optional labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub dim: usize,
    pub atoms: Vec<Vec<Vec<f64>>>,
    pub weights: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl ProblemFile {
    pub fn from_measure(mu: &FiniteMeasure) -> Self {
        ProblemFile {
            dim: mu.dim(),
            atoms: mu.atoms().iter().map(SpdMatrix::to_rows).collect(),
            weights: mu.weights().to_vec(),
            labels: None,
        }
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("problem file: {e}")))
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        crate::json::to_string(self)
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        fs::write(path, self.to_json()).map_err(|e| CliError::io(path, e))
    }

    /// Validates every field and builds the measure.
    pub fn to_measure(&self) -> CliResult<FiniteMeasure> {
        if self.dim == 0 {
            return Err(CliError::Input("dim must be positive".into()));
        }
        if self.atoms.is_empty() {
            return Err(CliError::Input("no atoms".into()));
        }
        if self.atoms.len() != self.weights.len() {
            return Err(CliError::Input(format!(
                "{} atoms but {} weights",
                self.atoms.len(),
                self.weights.len()
            )));
        }
        if let Some(labels) = &self.labels {
            if labels.len() != self.atoms.len() {
                return Err(CliError::Input(format!("{} labels for {} atoms", labels.len(), self.atoms.len())));
            }
        }
        if let Some((i, w)) = self.weights.iter().enumerate().find(|(_, w)| !(**w > 0.0 && w.is_finite())) {
            return Err(CliError::Input(format!("weight {i} is {w}; weights must be positive")));
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(CliError::Input(format!("weights sum to {total}, not 1")));
        }
        let atoms = self
            .atoms
            .iter()
            .enumerate()
            .map(|(i, rows)| parse_matrix(rows, self.dim).map_err(|e| CliError::Input(format!("atom {i}: {e}"))))
            .collect::<CliResult<Vec<_>>>()?;
        Ok(FiniteMeasure::new(atoms, self.weights.clone())?)
    }
}

/// A square, symmetric, positive-definite `dim × dim` matrix given as rows.
pub fn parse_matrix(rows: &[Vec<f64>], dim: usize) -> CliResult<SpdMatrix> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(CliError::Input(format!("expected a {dim}x{dim} matrix")));
    }
    let scale = rows.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    for (i, row) in rows.iter().enumerate() {
        for (j, x) in row.iter().enumerate().skip(i + 1) {
            if (x - rows[j][i]).abs() > SYMMETRY_TOL * (1.0 + scale) {
                return Err(CliError::Input(format!("matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    Ok(SpdMatrix::from_rows(rows)?)
}

/// A bare matrix file: a JSON list of rows.
pub fn read_matrix(path: &Path, dim: usize) -> CliResult<SpdMatrix> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let rows: Vec<Vec<f64>> =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    parse_matrix(&rows, dim)
}
