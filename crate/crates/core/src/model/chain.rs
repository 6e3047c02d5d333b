use ndarray::{Array1, Array2, Array3, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Thinned post-burn-in draws from one Gibbs chain.
///
/// `w_draws` is `S × d × c`; `log_lik` is `S × n`, row `s` holding
/// `log p(y_ℓ | W_s, σ²_s)` for every subject.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainOutput<T> {
    pub w_draws: Array3<T>,
    pub sigma2_draws: Array1<T>,
    pub log_lik: Array2<T>,
    pub seed: u64,
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub lambda1_sq: T,
    pub lambda2_sq: T,
}

impl<T: Scalar> ChainOutput<T> {
    pub fn validate(&self) -> Result<()> {
        let s = self.w_draws.len_of(Axis(0));
        if self.sigma2_draws.len() != s || self.log_lik.nrows() != s {
            return Err(Error::dims(
                "chain output",
                format!("{s} draws throughout"),
                format!(
                    "{} sigma2 draws, {} log-likelihood rows",
                    self.sigma2_draws.len(),
                    self.log_lik.nrows()
                ),
            ));
        }
        Ok(())
    }

    pub fn n_draws(&self) -> usize {
        self.w_draws.len_of(Axis(0))
    }

    pub fn d(&self) -> usize {
        self.w_draws.len_of(Axis(1))
    }

    pub fn c(&self) -> usize {
        self.w_draws.len_of(Axis(2))
    }

    pub fn draw(&self, s: usize) -> ArrayView2<'_, T> {
        self.w_draws.index_axis(Axis(0), s)
    }

    /// All stored draws of the single coefficient `w_ij`.
    pub fn coefficient_trace(&self, i: usize, j: usize) -> ArrayView1<'_, T> {
        self.w_draws.slice(ndarray::s![.., i, j])
    }

    pub fn posterior_mean(&self) -> Array2<T> {
        self.w_draws
            .mean_axis(Axis(0))
            .unwrap_or_else(|| Array2::zeros((self.d(), self.c())))
    }

    pub fn posterior_mean_sigma2(&self) -> T {
        self.sigma2_draws.mean().unwrap_or_else(T::nan)
    }

    /// Index of the stored draw with the largest joint log-likelihood plus
    /// `extra(s)`; used to pick a posterior-mode proxy.
    pub fn argmax_draw(&self, extra: impl Fn(usize) -> T) -> Option<usize> {
        (0..self.n_draws())
            .map(|s| (s, self.log_lik.row(s).sum() + extra(s)))
            .fold(None, |best: Option<(usize, T)>, (s, v)| match best {
                Some((_, bv)) if bv >= v => best,
                _ => Some((s, v)),
            })
            .map(|(s, _)| s)
    }
}
