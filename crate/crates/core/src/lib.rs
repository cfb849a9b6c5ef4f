//! Karcher barycenters of finitely supported measures on the cone of
//! symmetric positive-definite matrices, under the Thompson metric.
//!
//! The crate covers the pointwise geometry ([`spd`]), finite measures and
//! exact W₁ transport ([`measure`], [`transport`]), the Karcher solver with
//! its resolvent and exponential-formula semigroup ([`solver`]), and the
//! inductive-mean approximation schemes ([`schemes`]).

// `!(x > 0.0)` deliberately rejects NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod linalg;
pub mod measure;
pub mod random;
pub mod rng;
pub mod schemes;
pub mod solver;
pub mod spd;
pub mod trace;
pub mod transport;

pub use error::{Error, Result};
pub use linalg::EigenDecomposition;
pub use measure::{convex_combine, diameter, sample_empirical, truncate, FiniteMeasure};
pub use spd::{
    exp_point, geodesic, log_point, loewner_leq, matrix_fn, sym_eigen, taylor_remainder_check,
    thompson_distance, SpdMatrix, SymMatrix, TaylorCheck,
};
pub use transport::{w1_distance, TransportPlan};
