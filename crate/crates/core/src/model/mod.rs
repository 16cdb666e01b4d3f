//! Domain types and the prior over regulation indicators.

pub(crate) mod prior;
mod sparsity;
mod types;

pub use prior::{
    log_odds_from_logs, prior_log_odds, prior_probability, prior_probability_arithmetic, sample_network_from_prior,
    weight_log_density, weight_normalizing_constant_log,
};
pub use sparsity::{default_weight_grid, prior_sparsity_study, SparsityStudyResult};
pub use types::{
    pair_count, pair_index, pairs, ClampPolicy, Dataset, DatasetParts, Hyperparams, ModelParams, NetworkState,
    DEFAULT_CLAMP_EPSILON,
};
