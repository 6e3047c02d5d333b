//! Log densities, penalties and norms of the group-sparse multi-task model.
//!
//! The prior on `W` is only known up to its normalizing constant, so
//! [`log_prior_kernel`] returns the unnormalized log kernel; differences of
//! it between coefficient matrices are meaningful, absolute values are not.

use std::f64::consts::PI;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use statrs::function::gamma::ln_gamma;

use super::groups::GroupStructure;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn check_shapes<T>(
    y: &ArrayView2<'_, T>,
    x: &ArrayView2<'_, T>,
    w: &ArrayView2<'_, T>,
) -> Result<()> {
    let (n, d) = x.dim();
    if w.nrows() != d || y.nrows() != n || y.ncols() != w.ncols() {
        return Err(Error::dims(
            "Y ≈ X W",
            format!("X {n}×{d}, W {d}×c, Y {n}×c"),
            format!("X {:?}, W {:?}, Y {:?}", x.dim(), w.dim(), y.dim()),
        ));
    }
    Ok(())
}

/// Residual matrix `Y − X W`.
pub fn residuals<T: Scalar>(
    y: ArrayView2<'_, T>,
    x: ArrayView2<'_, T>,
    w: ArrayView2<'_, T>,
) -> Result<Array2<T>> {
    check_shapes(&y, &x, &w)?;
    Ok(&y - &x.dot(&w))
}

/// `Σ_ℓ ‖y_ℓ − Wᵀx_ℓ‖²`.
pub fn residual_sum_of_squares<T: Scalar>(
    y: ArrayView2<'_, T>,
    x: ArrayView2<'_, T>,
    w: ArrayView2<'_, T>,
) -> Result<T> {
    Ok(residuals(y, x, w)?.iter().map(|&r| r * r).sum())
}

fn check_sigma2<T: Scalar>(sigma2: T) -> Result<()> {
    if !(sigma2 > T::zero() && sigma2.is_finite()) {
        return Err(Error::Domain(format!("sigma2 = {sigma2} must be positive")));
    }
    Ok(())
}

/// Per-subject `log N_c(y_ℓ; Wᵀx_ℓ, σ² I_c)` from a precomputed residual matrix.
pub fn pointwise_log_likelihood_from_residuals<T: Scalar>(
    residuals: ArrayView2<'_, T>,
    sigma2: T,
) -> Array1<T> {
    let c = T::from_usize_lossy(residuals.ncols());
    let half = T::lit(0.5);
    let norm = half * c * (T::lit(2.0 * PI) * sigma2).ln();
    residuals.map_axis(Axis(1), |r| {
        -norm - r.iter().map(|&v| v * v).sum::<T>() * half / sigma2
    })
}

/// Per-subject Gaussian log-likelihoods `log p(y_ℓ | W, σ²)`.
pub fn pointwise_log_likelihood<T: Scalar>(
    y: ArrayView2<'_, T>,
    x: ArrayView2<'_, T>,
    w: ArrayView2<'_, T>,
    sigma2: T,
) -> Result<Array1<T>> {
    check_sigma2(sigma2)?;
    let r = residuals(y, x, w)?;
    Ok(pointwise_log_likelihood_from_residuals(r.view(), sigma2))
}

/// `Σ_ℓ log N_c(y_ℓ; Wᵀx_ℓ, σ² I_c)`.
pub fn log_likelihood<T: Scalar>(
    y: ArrayView2<'_, T>,
    x: ArrayView2<'_, T>,
    w: ArrayView2<'_, T>,
    sigma2: T,
) -> Result<T> {
    check_sigma2(sigma2)?;
    let rss = residual_sum_of_squares(y, x, w)?;
    let nc = T::from_usize_lossy(y.len());
    let half = T::lit(0.5);
    Ok(-half * nc * (T::lit(2.0 * PI) * sigma2).ln() - half * rss / sigma2)
}

/// The gene-level `G₂,₁` and SNP-level `ℓ₂,₁` norms of `W`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupNorms<T> {
    pub g21: T,
    pub l21: T,
}

pub fn group_norms<T: Scalar>(w: ArrayView2<'_, T>, groups: &GroupStructure) -> Result<GroupNorms<T>> {
    if groups.n_snps() != w.nrows() {
        return Err(Error::dims(
            "group norms",
            format!("{} rows", groups.n_snps()),
            w.nrows().to_string(),
        ));
    }
    let row_sq: Vec<T> = w
        .axis_iter(Axis(0))
        .map(|r| r.iter().map(|&v| v * v).sum())
        .collect();
    let l21 = row_sq.iter().map(|s| s.sqrt()).sum();
    let g21 = groups
        .iter()
        .map(|members| members.iter().map(|&i| row_sq[i]).sum::<T>().sqrt())
        .sum();
    Ok(GroupNorms { g21, l21 })
}

/// Penalized least-squares objective
/// `Σ_ℓ ‖y_ℓ − Wᵀx_ℓ‖² + γ₁‖W‖_{G₂,₁} + γ₂‖W‖_{ℓ₂,₁}`.
pub fn wang_objective<T: Scalar>(
    w: ArrayView2<'_, T>,
    y: ArrayView2<'_, T>,
    x: ArrayView2<'_, T>,
    groups: &GroupStructure,
    gamma1: T,
    gamma2: T,
) -> Result<T> {
    if gamma1 < T::zero() || gamma2 < T::zero() {
        return Err(Error::Domain(format!(
            "penalty weights must be nonnegative (got {gamma1}, {gamma2})"
        )));
    }
    let rss = residual_sum_of_squares(y, x, w)?;
    let norms = group_norms(w, groups)?;
    Ok(rss + gamma1 * norms.g21 + gamma2 * norms.l21)
}

/// Unnormalized log prior `−(λ₁/σ)‖W‖_{G₂,₁} − (λ₂/σ)‖W‖_{ℓ₂,₁}`.
pub fn log_prior_kernel<T: Scalar>(
    w: ArrayView2<'_, T>,
    groups: &GroupStructure,
    lambda1: T,
    lambda2: T,
    sigma: T,
) -> Result<T> {
    if !(sigma > T::zero()) {
        return Err(Error::Domain(format!("sigma = {sigma} must be positive")));
    }
    if lambda1 < T::zero() || lambda2 < T::zero() {
        return Err(Error::Domain("lambda1 and lambda2 must be nonnegative".into()));
    }
    let norms = group_norms(w, groups)?;
    Ok(-(lambda1 * norms.g21 + lambda2 * norms.l21) / sigma)
}

/// Logarithm of [`propriety_bound`].
pub fn log_propriety_bound(m_k: usize, c: usize, lambda1: f64, sigma: f64) -> Result<f64> {
    if m_k == 0 || c == 0 || !(lambda1 > 0.0) || !(sigma > 0.0) {
        return Err(Error::Domain(
            "propriety bound needs m_k, c, lambda1, sigma > 0".into(),
        ));
    }
    let p = (m_k * c) as f64;
    Ok(0.5 * (p - 1.0) * PI.ln() + ln_gamma(0.5 * (p + 1.0)) + p * 2f64.ln()
        - 0.5 * p * (lambda1 * lambda1 / (sigma * sigma)).ln())
}

/// Closed form of `∫ exp(−(λ₁/σ)‖W^(k)‖_F) dW^(k)` over `R^{m_k c}`, which
/// bounds the integral of one group's prior kernel.
pub fn propriety_bound(m_k: usize, c: usize, lambda1: f64, sigma: f64) -> Result<f64> {
    log_propriety_bound(m_k, c, lambda1, sigma).map(f64::exp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use ndarray::array;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn standard_normal_at_zero() {
        let z = array![[0.0]];
        let ll = log_likelihood(z.view(), z.view(), z.view(), 1.0).unwrap();
        assert_abs_diff_eq!(ll, -0.5 * (2.0 * PI).ln(), epsilon = 1e-15);
    }

    #[test]
    fn zero_coefficients_reduce_to_frobenius() {
        let y = array![[1.0, -2.0], [0.5, 3.0], [0.0, 1.0]];
        let x = array![[0.0, 1.0], [2.0, 1.0], [1.0, 0.0]];
        let w = Array2::zeros((2, 2));
        let s2 = 1.7;
        let f2: f64 = y.iter().map(|v| v * v).sum();
        let expected = -3.0 * (2.0 * PI * s2).ln() - f2 / (2.0 * s2);
        assert_relative_eq!(
            log_likelihood(y.view(), x.view(), w.view(), s2).unwrap(),
            expected,
            max_relative = 1e-14
        );
    }

    #[test]
    fn matches_elementwise_density_sum() {
        // random 3×2×2 instance against a per-entry univariate density sum
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = Array2::from_shape_fn((3, 2), |_| rng.random_range(0..3) as f64);
        let w = Array2::from_shape_fn((2, 2), |_| rng.random_range(-1.0..1.0));
        let y = Array2::from_shape_fn((3, 2), |_| rng.random_range(-2.0..2.0));
        let s2 = 0.8;
        let mut oracle = 0.0;
        for l in 0..3 {
            for j in 0..2 {
                let mean = x[[l, 0]] * w[[0, j]] + x[[l, 1]] * w[[1, j]];
                let z = y[[l, j]] - mean;
                oracle += (-(z * z) / (2.0 * s2)).exp().ln() - 0.5 * (2.0 * PI * s2).ln();
            }
        }
        let ll = log_likelihood(y.view(), x.view(), w.view(), s2).unwrap();
        assert_relative_eq!(ll, oracle, max_relative = 1e-13);
        let pw = pointwise_log_likelihood(y.view(), x.view(), w.view(), s2).unwrap();
        assert_relative_eq!(pw.sum(), oracle, max_relative = 1e-13);
    }

    #[test]
    fn likelihood_errors() {
        let a = array![[0.0]];
        assert!(matches!(
            log_likelihood(a.view(), a.view(), a.view(), 0.0),
            Err(Error::Domain(_))
        ));
        let w = array![[0.0], [0.0]];
        assert!(matches!(
            log_likelihood(a.view(), a.view(), w.view(), 1.0),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn norm_examples() {
        let g = GroupStructure::single(2).unwrap();
        let zero = Array2::<f64>::zeros((2, 3));
        assert_eq!(group_norms(zero.view(), &g).unwrap(), GroupNorms { g21: 0.0, l21: 0.0 });
        let w = array![[3.0], [4.0]];
        let n = group_norms(w.view(), &g).unwrap();
        assert_eq!((n.g21, n.l21), (5.0, 7.0));
        let s = GroupStructure::singletons(2).unwrap();
        let w = array![[0.3, -1.2], [2.5, 0.7]];
        let n = group_norms(w.view(), &s).unwrap();
        assert_relative_eq!(n.g21, n.l21, max_relative = 1e-15);
    }

    #[test]
    fn objective_examples() {
        let g = GroupStructure::contiguous(&[1, 2]).unwrap();
        let x = array![[0.0, 1.0, 2.0], [1.0, 1.0, 0.0]];
        let y = array![[0.5, 1.0], [-1.0, 2.0]];
        let w = array![[0.1, 0.2], [-0.3, 0.0], [0.4, 0.5]];
        let rss = residual_sum_of_squares(y.view(), x.view(), w.view()).unwrap();
        assert_eq!(wang_objective(w.view(), y.view(), x.view(), &g, 0.0, 0.0).unwrap(), rss);
        let zero = Array2::zeros((3, 2));
        let f2: f64 = y.iter().map(|v| v * v).sum();
        assert_eq!(wang_objective(zero.view(), y.view(), x.view(), &g, 3.0, 4.0).unwrap(), f2);
        // independent norm code: explicit loops
        let g21 = (0.1f64.powi(2) + 0.2f64.powi(2)).sqrt()
            + (0.3f64.powi(2) + 0.4f64.powi(2) + 0.5f64.powi(2)).sqrt();
        let l21 = (0.05f64).sqrt() + 0.3 + (0.41f64).sqrt();
        let obj = wang_objective(w.view(), y.view(), x.view(), &g, 1.5, 0.25).unwrap();
        assert_relative_eq!(obj, rss + 1.5 * g21 + 0.25 * l21, max_relative = 1e-14);
        assert!(wang_objective(w.view(), y.view(), x.view(), &g, -1.0, 0.0).is_err());
    }

    #[test]
    fn prior_kernel_examples() {
        let g1 = GroupStructure::single(1).unwrap();
        assert_eq!(log_prior_kernel(array![[0.0]].view(), &g1, 2.0, 3.0, 1.0).unwrap(), 0.0);
        let w = -1.3;
        let k = log_prior_kernel(array![[w]].view(), &g1, 0.7, 1.1, 0.5).unwrap();
        assert_relative_eq!(k, -(0.7 + 1.1) * 1.3 / 0.5, max_relative = 1e-15);
        let g = GroupStructure::single(2).unwrap();
        let k = log_prior_kernel(array![[3.0], [4.0]].view(), &g, 2.0, 0.0, 1.0).unwrap();
        assert_eq!(k, -10.0);
        assert!(log_prior_kernel(array![[0.0]].view(), &g1, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn propriety_bound_examples() {
        assert_relative_eq!(propriety_bound(1, 1, 2.0, 1.0).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(propriety_bound(1, 1, 1.0, 1.0).unwrap(), 2.0, max_relative = 1e-14);
        assert_relative_eq!(
            propriety_bound(1, 2, 1.0, 1.0).unwrap(),
            2.0 * PI,
            max_relative = 1e-14
        );
        assert!(propriety_bound(0, 2, 1.0, 1.0).is_err());
        // large dimension stays finite thanks to log-space evaluation
        assert!(log_propriety_bound(500, 100, 3.0, 1.0).unwrap().is_finite());
    }

    #[test]
    fn propriety_bound_matches_radial_quadrature_in_plane() {
        // ∫_{R²} exp(−‖w‖) dw = 2π ∫_0^∞ r e^{−r} dr, by trapezoid on [0, 60]
        let h = 1e-4;
        let steps = (60.0 / h) as usize;
        let f = |r: f64| r * (-r).exp();
        let mut s = 0.5 * (f(0.0) + f(60.0));
        for i in 1..steps {
            s += f(i as f64 * h);
        }
        let quad = 2.0 * PI * s * h;
        assert_relative_eq!(quad, propriety_bound(1, 2, 1.0, 1.0).unwrap(), max_relative = 1e-6);
    }

    proptest! {
        #[test]
        fn norms_are_homogeneous(
            vals in proptest::collection::vec(-5.0f64..5.0, 12),
            alpha in -3.0f64..3.0,
        ) {
            let w = Array2::from_shape_vec((4, 3), vals).unwrap();
            let g = GroupStructure::contiguous(&[1, 3]).unwrap();
            let base = group_norms(w.view(), &g).unwrap();
            let scaled = group_norms((&w * alpha).view(), &g).unwrap();
            prop_assert!((scaled.g21 - alpha.abs() * base.g21).abs() <= 1e-10 * (1.0 + base.g21));
            prop_assert!((scaled.l21 - alpha.abs() * base.l21).abs() <= 1e-10 * (1.0 + base.l21));
            let one = GroupStructure::single(4).unwrap();
            let fro = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assert!((group_norms(w.view(), &one).unwrap().g21 - fro).abs() <= 1e-12 * (1.0 + fro));
        }
    }
}
