//! Approximation schemes for `Λ(μ)`: deterministic (nodice) and stochastic
//! inductive means, and the perturbation estimates linking them to resolvent chains.

mod inductive;
mod perturbation;

pub use inductive::{
    draw_indices, nodice_sequence, nodice_sequence_checked, stochastic_sequence, truncated_sequence,
    truncation_coupling_check, CouplingCheck, InductiveMeans, NodiceInvariants, SchemeSpec,
};
pub use perturbation::{
    convrate_check, convrate_envelope, entropy_lipschitz_check, perturbed_resolvent_solve,
    varying_measure_chain_gap, ConvrateCheck, PerturbedResolvent, CHAIN_SLACK, CONVRATE_SLACK,
    ENTROPY_SLACK, PERTURBATION_LIMIT, PERTURBED_SLACK,
};
