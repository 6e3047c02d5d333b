//! Floating-point abstraction shared by every numeric routine in the crate.
//!
//! All model, sampler and solver code is written against [`Scalar`], which is
//! implemented for `f32` and `f64`. Random variate generation is routed
//! through the trait so generic code does not have to carry `rand_distr`
//! bounds around.

use std::iter::Sum;

use ndarray::NdFloat;
use num_traits::FromPrimitive;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

/// Real scalar type usable by the samplers and solvers.
pub trait Scalar: NdFloat + FromPrimitive + Sum + Default {
    /// Converts an `f64` literal. Infallible for the implemented types.
    fn lit(v: f64) -> Self;

    /// Lossy conversion for reporting and special functions.
    fn as_f64(self) -> f64;

    fn from_usize_lossy(v: usize) -> Self {
        Self::lit(v as f64)
    }

    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Uniform draw on the half-open interval `[0, 1)`.
    fn uniform01<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Gamma draw with the given shape and scale; `None` on invalid parameters.
    fn sample_gamma<R: Rng + ?Sized>(shape: Self, scale: Self, rng: &mut R) -> Option<Self>;
}

macro_rules! impl_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            #[inline]
            fn lit(v: f64) -> Self {
                v as $t
            }

            #[inline]
            fn as_f64(self) -> f64 {
                self as f64
            }

            #[inline]
            fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                StandardNormal.sample(rng)
            }

            #[inline]
            fn uniform01<R: Rng + ?Sized>(rng: &mut R) -> Self {
                rng.random::<$t>()
            }

            fn sample_gamma<R: Rng + ?Sized>(shape: Self, scale: Self, rng: &mut R) -> Option<Self> {
                Gamma::<$t>::new(shape, scale).ok().map(|g| g.sample(rng))
            }
        }
    };
}

impl_scalar!(f32);
impl_scalar!(f64);

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mean_of<T: Scalar>(n: usize, f: impl Fn(&mut ChaCha8Rng) -> T) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        (0..n).map(|_| f(&mut rng).as_f64()).sum::<f64>() / n as f64
    }

    #[test]
    fn gamma_mean_matches_shape_times_scale() {
        let m = mean_of::<f64>(50_000, |r| f64::sample_gamma(3.0, 0.5, r).unwrap());
        assert!((m - 1.5).abs() < 0.02, "{m}");
        let m = mean_of::<f32>(50_000, |r| f32::sample_gamma(2.0, 2.0, r).unwrap());
        assert!((m - 4.0).abs() < 0.06, "{m}");
    }

    #[test]
    fn gamma_rejects_bad_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(f64::sample_gamma(-1.0, 1.0, &mut rng).is_none());
        assert!(f64::sample_gamma(1.0, 0.0, &mut rng).is_none());
    }

    #[test]
    fn uniform_is_in_unit_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let u = f32::uniform01(&mut rng);
            assert!((0.0..1.0).contains(&u));
        }
    }
}
