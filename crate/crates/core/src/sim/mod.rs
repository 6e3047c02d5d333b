//! Simulation studies: synthetic truth and data, and interval coverage.

mod design;
mod generate;
mod study;

pub use design::{BayesTuning, BootstrapTuning, ErrorFamily, FitSettings, StudyDesign};
pub use generate::{
    choose_active_rows, draw_coefficients, simulate_genotypes, simulate_mixing, simulate_phenotypes,
    simulate_truth, Truth,
};
pub use study::{run_study, BayesMethod, BootstrapMethod, CoverageTable, IntervalMethod, Intervals, MethodCoverage};
