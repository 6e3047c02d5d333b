use ndarray::ArrayView2;

use crate::error::{Error, Result};
use crate::model::ChainOutput;
use crate::scalar::Scalar;

/// The two WAIC terms, each summed over subjects.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waic {
    pub waic: f64,
    /// `Σ_ℓ log( S⁻¹ Σ_s p(y_ℓ | W_s, σ²_s) )`.
    pub lppd: f64,
    /// `Σ_ℓ` sample variance (denominator `S − 1`) of `log p(y_ℓ | W_s, σ²_s)`.
    pub penalty: f64,
}

impl Waic {
    pub fn from_terms(lppd: f64, penalty: f64) -> Self {
        Self {
            waic: -2.0 * lppd + 2.0 * penalty,
            lppd,
            penalty,
        }
    }
}

/// WAIC from an `S × n` matrix of per-draw, per-subject log-likelihoods.
pub fn waic_from_log_lik<T: Scalar>(log_lik: ArrayView2<'_, T>) -> Result<Waic> {
    let s = log_lik.nrows();
    if s < 2 {
        return Err(Error::Invalid(format!("WAIC needs at least 2 stored draws, got {s}")));
    }
    let sf = s as f64;
    let mut lppd = 0.0;
    let mut penalty = 0.0;
    for col in log_lik.columns() {
        let vals: Vec<f64> = col.iter().map(|v| v.as_f64()).collect();
        let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::Numerical("non-finite log-likelihood in chain".into()));
        }
        let sum_exp: f64 = vals.iter().map(|v| (v - max).exp()).sum();
        lppd += max + sum_exp.ln() - sf.ln();
        // shifting by the first draw makes a constant column exactly zero
        let shift = vals[0];
        let mean = vals.iter().map(|v| v - shift).sum::<f64>() / sf;
        penalty += vals.iter().map(|v| (v - shift - mean).powi(2)).sum::<f64>() / (sf - 1.0);
    }
    Ok(Waic::from_terms(lppd, penalty))
}

pub fn waic<T: Scalar>(chain: &ChainOutput<T>) -> Result<Waic> {
    waic_from_log_lik(chain.log_lik.view())
}
