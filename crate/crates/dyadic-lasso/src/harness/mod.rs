//! Monte Carlo experiments and exact numerical checks.

pub mod checks;
pub mod experiments;
pub mod sequence;

pub use checks::{delta_m_check, lemma_identity_checks, packing_check};
pub use experiments::{
    mc_risk, minimax_hypercube_experiment, oracle_ratio_experiment, rates_experiment,
    selected_oracle_experiment, Estimator, Model,
};
