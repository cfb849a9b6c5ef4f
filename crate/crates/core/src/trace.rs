//! Per-step records of iterative schemes.

use crate::spd::SpdMatrix;

/// Which scheme produced a trace, and for what input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceMeta {
    pub scheme: String,
    pub seed: Option<u64>,
    pub measure_digest: String,
}

/// Errors at every recorded index; full iterates only at selected indices.
#[derive(Debug, Clone)]
pub struct IterationTrace {
    pub indices: Vec<u64>,
    pub errors: Vec<f64>,
    /// Nanoseconds since the start of the run, per recorded index.
    pub wall_ns: Vec<u64>,
    pub iterates: Vec<(u64, SpdMatrix)>,
    pub meta: TraceMeta,
    /// Set when the run stopped early (e.g. an inner solve failed).
    pub truncated: Option<String>,
}

impl IterationTrace {
    pub fn new(meta: TraceMeta) -> Self {
        IterationTrace {
            indices: Vec::new(),
            errors: Vec::new(),
            wall_ns: Vec::new(),
            iterates: Vec::new(),
            meta,
            truncated: None,
        }
    }

    pub fn push(&mut self, index: u64, error: f64, wall_ns: u64) {
        debug_assert!(self.indices.last().is_none_or(|&last| index > last));
        self.indices.push(index);
        self.errors.push(error);
        self.wall_ns.push(wall_ns);
    }

    pub fn retain(&mut self, index: u64, iterate: SpdMatrix) {
        self.iterates.push((index, iterate));
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn final_error(&self) -> Option<f64> {
        self.errors.last().copied()
    }

    pub fn error_at(&self, index: u64) -> Option<f64> {
        self.indices
            .binary_search(&index)
            .ok()
            .map(|i| self.errors[i])
    }

    pub fn last_iterate(&self) -> Option<&SpdMatrix> {
        self.iterates.last().map(|(_, x)| x)
    }
}

/// Logarithmic retention schedule: 1, 2, 4, 8, …
pub fn log_spaced(n: u64) -> bool {
    n.is_power_of_two()
}
