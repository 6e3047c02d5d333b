//! Nonparametric subject-level bootstrap of the penalized estimator.

use ndarray::{Array2, ArrayView2, Axis};
use rand::Rng;
use rayon::prelude::*;

use super::solver::{WangOptions, WangProblem};
use crate::error::{Error, Result};
use crate::model::GroupStructure;
use crate::rng::{derive_seed, rng_from_seed};
use crate::scalar::Scalar;

pub const MIN_REPLICATES: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapResult<T> {
    /// Fit on the full data.
    pub estimate: Array2<T>,
    pub lower: Array2<T>,
    pub upper: Array2<T>,
    pub level: f64,
    pub gamma1: T,
    pub gamma2: T,
    /// Convergence flag of each replicate; non-converged replicates are kept.
    pub converged: Vec<bool>,
}

impl<T: Scalar> BootstrapResult<T> {
    pub fn replicates(&self) -> usize {
        self.converged.len()
    }

    pub fn converged_fraction(&self) -> f64 {
        let ok = self.converged.iter().filter(|&&c| c).count();
        ok as f64 / self.converged.len().max(1) as f64
    }
}

/// One-based order-statistic ranks of the percentile interval.
///
/// The lower bound is the `⌈Bα/2⌉`-th and the upper bound the
/// `⌈B(1−α/2)⌉`-th smallest replicate (inverse empirical CDF), with
/// `α = 1 − level`; a small slack absorbs rounding in `B·α/2`.
pub fn percentile_ranks(b: usize, level: f64) -> (usize, usize) {
    let half = (1.0 - level) / 2.0;
    let bf = b as f64;
    let rank = |p: f64| ((bf * p - 1e-9).ceil() as usize).clamp(1, b);
    (rank(half), rank(1.0 - half))
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("interval level must lie in (0, 1), got {level}")))
    }
}

/// Bootstrap with caller-supplied resamples (each a list of subject indices).
pub fn bootstrap_from_resamples<T: Scalar>(
    x: ArrayView2<'_, T>,
    y: ArrayView2<'_, T>,
    groups: &GroupStructure,
    gamma1: T,
    gamma2: T,
    resamples: &[Vec<usize>],
    level: f64,
    opts: &WangOptions,
) -> Result<BootstrapResult<T>> {
    check_level(level)?;
    let n = x.nrows();
    if resamples.is_empty() {
        return Err(Error::Invalid("no bootstrap resamples".into()));
    }
    if let Some(bad) = resamples.iter().flatten().find(|&&l| l >= n) {
        return Err(Error::Invalid(format!("resample index {bad} out of range for n = {n}")));
    }
    let estimate = WangProblem::new(x, y, groups)?.solve(gamma1, gamma2, opts)?.w;
    let fits: Vec<(Array2<T>, bool)> = resamples
        .par_iter()
        .map(|idx| {
            let xb = x.select(Axis(0), idx);
            let yb = y.select(Axis(0), idx);
            let fit = WangProblem::new(xb.view(), yb.view(), groups)?.solve(gamma1, gamma2, opts)?;
            Ok((fit.w, fit.converged))
        })
        .collect::<Result<_>>()?;

    let b = fits.len();
    let (lo_rank, hi_rank) = percentile_ranks(b, level);
    let (d, c) = estimate.dim();
    let mut lower = Array2::zeros((d, c));
    let mut upper = Array2::zeros((d, c));
    let mut values = Vec::with_capacity(b);
    for i in 0..d {
        for j in 0..c {
            values.clear();
            values.extend(fits.iter().map(|(w, _)| w[[i, j]]));
            values.sort_by(|a, b| a.partial_cmp(b).expect("finite bootstrap estimates"));
            lower[[i, j]] = values[lo_rank - 1];
            upper[[i, j]] = values[hi_rank - 1];
        }
    }
    let converged: Vec<bool> = fits.iter().map(|(_, ok)| *ok).collect();
    let missed = converged.iter().filter(|&&ok| !ok).count();
    if missed > 0 {
        log::warn!("{missed} of {b} bootstrap fits did not converge; kept as flagged");
    }
    Ok(BootstrapResult {
        estimate,
        lower,
        upper,
        level,
        gamma1,
        gamma2,
        converged,
    })
}

/// Percentile intervals from `replicates` resamples of the subjects, with
/// the penalty weights held fixed. Resample `r` is drawn from the stream
/// `derive_seed(seed, r)`.
pub fn bootstrap_intervals<T: Scalar>(
    x: ArrayView2<'_, T>,
    y: ArrayView2<'_, T>,
    groups: &GroupStructure,
    gamma1: T,
    gamma2: T,
    replicates: usize,
    level: f64,
    seed: u64,
    opts: &WangOptions,
) -> Result<BootstrapResult<T>> {
    if replicates < MIN_REPLICATES {
        return Err(Error::Invalid(format!(
            "bootstrap needs at least {MIN_REPLICATES} replicates, got {replicates}"
        )));
    }
    let n = x.nrows();
    let resamples: Vec<Vec<usize>> = (0..replicates as u64)
        .map(|r| {
            let mut rng = rng_from_seed(derive_seed(seed, r));
            (0..n).map(|_| rng.random_range(0..n)).collect()
        })
        .collect();
    bootstrap_from_resamples(x, y, groups, gamma1, gamma2, &resamples, level, opts)
}
