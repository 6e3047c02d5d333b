//! Tuning-parameter selection by WAIC over a grid of `(λ₁², λ₂²)`.

mod grid;
mod search;
mod waic;

pub use grid::TuningGrid;
pub use search::{grid_search, GridSearch, WaicEntry, WaicReport};
pub use waic::{waic, waic_from_log_lik, Waic};
