//! Gibbs sampler over intercepts, coefficients, residual variance,
//! regulation indicators and prior weights.

mod chain;
mod conditionals;
mod rng;
mod sweep;

pub use chain::{
    initial_state, monitored_cells, run_chain, run_chains, ChainConfig, ChainRunner, ChainTrace, Checkpoint,
    ParamSample, CHECKPOINT_VERSION,
};
pub use conditionals::{
    alpha_conditional, coefficient_conditional, indicator_log_odds, indicator_probability, sample_alpha,
    sample_coefficient, sample_indicator, sample_sigma2, sample_weight, sigma2_conditional, weight_grid_probabilities,
    CoefficientId, NormalConditional, ScaledInvChiSquared,
};
pub use sweep::{ChainState, SweepPlan, SweepSettings, Sweeper};
