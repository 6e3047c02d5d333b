//! Penalized point estimator with gene- and SNP-level group norms, its
//! cross-validated tuning, and the bootstrap baseline.

mod bootstrap;
mod cv;
mod solver;

pub use bootstrap::{bootstrap_from_resamples, bootstrap_intervals, percentile_ranks, BootstrapResult, MIN_REPLICATES};
pub use cv::{assign_folds, cv_select, CvSelection};
pub use solver::{fit_wang, WangFit, WangOptions, WangProblem};
