use ndarray::{Array1, Array2, Array3};

use super::config::{Init, SamplerConfig};
use super::gram::GramCache;
use super::updates::{self, GibbsState};
use crate::error::{Error, Result};
use crate::model::{density, ChainOutput, Dataset, Hyperparams, MixingState};
use crate::rng::{rng_from_seed, ChainRng};
use crate::scalar::Scalar;
use crate::wang::{fit_wang, WangOptions};

/// One Gibbs chain. A sweep updates `σ²`, then `τ²_1..τ²_K`, then
/// `ω²_1..ω²_d`, then the coefficient blocks `W^(1)..W^(K)`.
pub struct GibbsSampler<'a, T> {
    data: &'a Dataset<T>,
    hyper: Hyperparams<T>,
    cache: GramCache<T>,
    state: GibbsState<T>,
    rng: ChainRng,
    floor: T,
}

impl<'a, T: Scalar> GibbsSampler<'a, T> {
    pub fn new(data: &'a Dataset<T>, hyper: Hyperparams<T>, config: &SamplerConfig<T>) -> Result<Self> {
        hyper.validate()?;
        config.validate()?;
        let (d, c) = (data.d(), data.c());
        let w0 = match &config.init {
            Init::Zeros => Array2::zeros((d, c)),
            Init::Given(w) => {
                if w.dim() != (d, c) {
                    return Err(Error::dims(
                        "initial W",
                        format!("{d}×{c}"),
                        format!("{:?}", w.dim()),
                    ));
                }
                w.clone()
            }
            Init::Wang => {
                let (g1, g2) = hyper.matched_gammas(T::one());
                fit_wang(data.x(), data.y(), data.groups(), g1, g2, &WangOptions::default())?.w
            }
        };
        let mixing = MixingState::unit(data.groups().n_groups(), d);
        let state = GibbsState::new(data, w0, mixing)?;
        Ok(Self {
            data,
            hyper,
            cache: GramCache::new(data),
            state,
            rng: rng_from_seed(config.seed),
            floor: config.numeric_floor,
        })
    }

    pub fn state(&self) -> &GibbsState<T> {
        &self.state
    }

    pub fn sweep(&mut self) -> Result<()> {
        let groups = self.data.groups();
        self.state.refresh_residual(self.data, &self.cache);
        updates::update_sigma2(&mut self.state, self.data, &self.hyper, &mut self.rng)?;
        for k in 0..groups.n_groups() {
            updates::update_tau2(&mut self.state, groups, k, &self.hyper, self.floor, &mut self.rng)?;
        }
        for i in 0..self.data.d() {
            updates::update_omega2(&mut self.state, i, &self.hyper, self.floor, &mut self.rng)?;
        }
        for k in 0..groups.n_groups() {
            updates::update_w_block(&mut self.state, groups, k, &self.cache, &mut self.rng)?;
        }
        Ok(())
    }

    /// Per-subject log-likelihood at the current state.
    pub fn pointwise_log_likelihood(&self) -> Array1<T> {
        density::pointwise_log_likelihood_from_residuals(
            self.state.residual(),
            self.state.mixing.sigma2,
        )
    }
}

/// Runs a full chain and keeps the thinned post-burn-in draws together
/// with their per-subject log-likelihoods.
pub fn run_gibbs<T: Scalar>(
    data: &Dataset<T>,
    hyper: &Hyperparams<T>,
    config: &SamplerConfig<T>,
) -> Result<ChainOutput<T>> {
    let mut sampler = GibbsSampler::new(data, *hyper, config)?;
    let s_total = config.n_stored();
    let (n, d, c) = (data.n(), data.d(), data.c());
    let mut w_draws = Array3::zeros((s_total, d, c));
    let mut sigma2_draws = Array1::zeros(s_total);
    let mut log_lik = Array2::zeros((s_total, n));
    let mut s = 0;
    for t in 0..config.iterations {
        sampler.sweep().map_err(|e| Error::ChainAborted {
            iteration: t,
            source: Box::new(e),
        })?;
        if config.keeps(t) {
            w_draws
                .index_axis_mut(ndarray::Axis(0), s)
                .assign(&sampler.state.w);
            sigma2_draws[s] = sampler.state.mixing.sigma2;
            log_lik.row_mut(s).assign(&sampler.pointwise_log_likelihood());
            s += 1;
        }
    }
    debug_assert_eq!(s, s_total);
    Ok(ChainOutput {
        w_draws,
        sigma2_draws,
        log_lik,
        seed: config.seed,
        iterations: config.iterations,
        burn_in: config.burn_in,
        thin: config.thin,
        lambda1_sq: hyper.lambda1_sq,
        lambda2_sq: hyper.lambda2_sq,
    })
}
