use ndarray::Array2;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Starting value for `W`. The mixing variables always start at one.
#[derive(Debug, Clone, PartialEq)]
pub enum Init<T> {
    Zeros,
    /// Penalized point estimate with `γ = 2λ` (i.e. `σ = 1`, the scale of
    /// standardized phenotypes).
    Wang,
    Given(Array2<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig<T> {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub init: Init<T>,
    /// Lower clamp on squared block/row norms entering the inverse-Gaussian means.
    pub numeric_floor: T,
}

impl<T: Scalar> SamplerConfig<T> {
    pub fn new(iterations: usize, burn_in: usize) -> Self {
        Self {
            iterations,
            burn_in,
            thin: 1,
            seed: 0,
            init: Init::Zeros,
            numeric_floor: T::lit(1e-12),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_thin(mut self, thin: usize) -> Self {
        self.thin = thin;
        self
    }

    pub fn with_init(mut self, init: Init<T>) -> Self {
        self.init = init;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Invalid("iterations must be positive".into()));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::Invalid(format!(
                "burn-in {} must be smaller than iterations {}",
                self.burn_in, self.iterations
            )));
        }
        if self.thin == 0 {
            return Err(Error::Invalid("thin must be positive".into()));
        }
        if !(self.numeric_floor > T::zero()) {
            return Err(Error::Invalid("numeric floor must be positive".into()));
        }
        Ok(())
    }

    /// Number of stored draws, `⌊(iterations − burn_in) / thin⌋`.
    pub fn n_stored(&self) -> usize {
        (self.iterations - self.burn_in) / self.thin
    }

    /// Whether sweep `t` (0-based) is kept.
    pub fn keeps(&self, t: usize) -> bool {
        t >= self.burn_in && (t - self.burn_in + 1).is_multiple_of(self.thin)
    }
}
