//! Blocked Gibbs sampler over `(σ², τ², ω², W)` using the scale-mixture
//! representation of the group-sparse prior.

mod config;
pub mod diagnostics;
mod gibbs;
mod gram;
mod invgauss;
pub mod updates;

pub use config::{Init, SamplerConfig};
pub use gibbs::{run_gibbs, GibbsSampler};
pub use gram::{GramCache, GroupGram};
pub use invgauss::{sample_inverse_gaussian, InverseGaussian};
pub use updates::{BlockConditional, GibbsState};
