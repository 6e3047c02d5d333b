//! Posterior summaries, SNP selection and ranking, plots and file I/O.

mod intervals;
pub mod io;
mod plot;
mod select;
mod standardize;

pub use intervals::{credible_intervals, intervals_from_draws, quantile_sorted, IntervalReport, MIN_DRAWS};
pub use plot::{emit_interval_plot, render_interval_plot};
pub use select::{rank_snps, select_snps, RankedSnp, Selection};
pub use standardize::{standardize_phenotypes, Standardization};
