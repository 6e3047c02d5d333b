//! Inverse-Gaussian variates by the transformation-with-multiple-roots method.
//!
//! Draw `ν ~ N(0,1)`, set `y = ν²` and take the smaller root
//! `x = μ + μ²y/(2λ) − (μ/(2λ))·√(4μλy + μ²y²)`. Accept `x` with
//! probability `μ/(μ + x)`, otherwise return `μ²/x`. The smaller root is
//! evaluated as `μ / (1 + t + √(t² + 2t))` with `t = μy/(2λ)`, which is the
//! same quantity without the cancellation that hits the textbook form when
//! `μ` is large.

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseGaussian<T> {
    mean: T,
    shape: T,
}

impl<T: Scalar> InverseGaussian<T> {
    pub fn new(mean: T, shape: T) -> Result<Self> {
        if !(mean > T::zero() && mean.is_finite()) {
            return Err(Error::Domain(format!("inverse-Gaussian mean {mean} must be positive")));
        }
        if !(shape > T::zero() && shape.is_finite()) {
            return Err(Error::Domain(format!("inverse-Gaussian shape {shape} must be positive")));
        }
        Ok(Self { mean, shape })
    }

    pub fn mean(&self) -> T {
        self.mean
    }

    pub fn shape(&self) -> T {
        self.shape
    }

    pub fn variance(&self) -> T {
        self.mean.powi(3) / self.shape
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        let mu = self.mean;
        let nu = T::standard_normal(rng);
        let t = mu * nu * nu / (T::lit(2.0) * self.shape);
        let x = mu / (T::one() + t + (t * (t + T::lit(2.0))).sqrt());
        let u = T::uniform01(rng);
        if u * (mu + x) <= mu {
            x
        } else {
            mu * mu / x
        }
    }
}

/// One draw from Inverse-Gaussian(mean `mu`, shape `lambda`).
pub fn sample_inverse_gaussian<T: Scalar, R: Rng + ?Sized>(mu: T, lambda: T, rng: &mut R) -> Result<T> {
    Ok(InverseGaussian::new(mu, lambda)?.sample(rng))
}
