//! Karcher solver, resolvents, the resolvent semigroup and the proximal iteration.

mod config;
mod flow;
mod karcher;
mod proximal;
mod resolvent;

pub use config::{KarcherResult, SolverConfig, CHAIN_TOL_FLOOR};
pub use flow::{
    certified_steps, euler_flow, kobayashi_bound, kobayashi_gap, ode_consistency, semigroup,
    semigroup_with, two_scale_gap, FlowMode, FlowOutcome, OdeCheck, TimeGrid, MAX_RESOLVENT_CALLS,
};
pub use karcher::{karcher_iterate, karcher_mean, karcher_residual, log_euclidean_mean, normalized_residual};
pub use proximal::{harmonic_time, proximal_envelope, proximal_sequence};
pub use resolvent::{
    asymptotics_constant, augmented_measure, resolvent, resolvent_asymptotics_check,
    resolvent_bound_check, resolvent_chain, resolvent_identity_gap, resolvent_path, resolvent_power,
    AsymptoticsCheck, ResolventBounds,
};
