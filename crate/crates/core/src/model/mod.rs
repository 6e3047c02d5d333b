//! Domain types and pure density evaluations of the model.

mod chain;
mod data;
pub mod density;
mod groups;
mod state;

pub use chain::ChainOutput;
pub use data::{Dataset, STANDARDIZED_TOL};
pub use density::{
    group_norms, log_likelihood, log_prior_kernel, log_propriety_bound,
    pointwise_log_likelihood, propriety_bound, residual_sum_of_squares, wang_objective,
    GroupNorms,
};
pub use groups::GroupStructure;
pub use state::{CoefficientMatrix, Hyperparams, MixingState};
