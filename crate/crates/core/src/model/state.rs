use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::groups::GroupStructure;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// The `d × c` regression matrix, one row per SNP and one column per phenotype.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix<T> {
    w: Array2<T>,
}

impl<T: Scalar> CoefficientMatrix<T> {
    pub fn new(w: Array2<T>) -> Self {
        Self { w }
    }

    pub fn zeros(d: usize, c: usize) -> Self {
        Self::new(Array2::zeros((d, c)))
    }

    pub fn as_array(&self) -> ArrayView2<'_, T> {
        self.w.view()
    }

    pub fn into_array(self) -> Array2<T> {
        self.w
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, T> {
        self.w.row(i)
    }

    /// The `m_k × c` block of rows belonging to group `k`, in member order.
    pub fn block(&self, groups: &GroupStructure, k: usize) -> Array2<T> {
        self.w.select(Axis(0), groups.members(k))
    }

    pub fn set_block(&mut self, groups: &GroupStructure, k: usize, block: ArrayView2<'_, T>) {
        for (r, &i) in groups.members(k).iter().enumerate() {
            self.w.row_mut(i).assign(&block.row(r));
        }
    }

    pub fn d(&self) -> usize {
        self.w.nrows()
    }

    pub fn c(&self) -> usize {
        self.w.ncols()
    }
}

/// Gene-level and SNP-level scale-mixing variables plus the error variance.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingState<T> {
    pub tau2: Array1<T>,
    pub omega2: Array1<T>,
    pub sigma2: T,
}

impl<T: Scalar> MixingState<T> {
    /// All mixing variables and `σ²` set to one.
    pub fn unit(k: usize, d: usize) -> Self {
        Self {
            tau2: Array1::ones(k),
            omega2: Array1::ones(d),
            sigma2: T::one(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: T| v > T::zero() && v.is_finite();
        if let Some((k, v)) = self.tau2.iter().enumerate().find(|(_, &v)| !ok(v)) {
            return Err(Error::Domain(format!("tau2[{k}] = {v} is not positive and finite")));
        }
        if let Some((i, v)) = self.omega2.iter().enumerate().find(|(_, &v)| !ok(v)) {
            return Err(Error::Domain(format!("omega2[{i}] = {v} is not positive and finite")));
        }
        if !ok(self.sigma2) {
            return Err(Error::Domain(format!(
                "sigma2 = {} is not positive and finite",
                self.sigma2
            )));
        }
        Ok(())
    }

    /// Prior precision multiplier `1/τ²_{k(i)} + 1/ω²_i` for SNP `i`.
    pub fn row_precision(&self, groups: &GroupStructure, i: usize) -> T {
        self.tau2[groups.group_of(i)].recip() + self.omega2[i].recip()
    }
}

/// Tuning pair `(λ₁², λ₂²)` and the inverse-Gamma prior on `σ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams<T> {
    pub lambda1_sq: T,
    pub lambda2_sq: T,
    pub a_sigma: T,
    pub b_sigma: T,
}

impl<T: Scalar> Hyperparams<T> {
    pub fn new(lambda1_sq: T, lambda2_sq: T, a_sigma: T, b_sigma: T) -> Result<Self> {
        let h = Self {
            lambda1_sq,
            lambda2_sq,
            a_sigma,
            b_sigma,
        };
        h.validate()?;
        Ok(h)
    }

    /// Tuning pair with the default `Inv-Gamma(1, 1)` prior on `σ²`.
    pub fn with_lambdas(lambda1_sq: T, lambda2_sq: T) -> Result<Self> {
        Self::new(lambda1_sq, lambda2_sq, T::one(), T::one())
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("lambda1_sq", self.lambda1_sq),
            ("lambda2_sq", self.lambda2_sq),
            ("a_sigma", self.a_sigma),
            ("b_sigma", self.b_sigma),
        ] {
            if !(v > T::zero() && v.is_finite()) {
                return Err(Error::Domain(format!("{name} = {v} must be positive and finite")));
            }
        }
        Ok(())
    }

    pub fn lambda1(&self) -> T {
        self.lambda1_sq.sqrt()
    }

    pub fn lambda2(&self) -> T {
        self.lambda2_sq.sqrt()
    }

    /// Penalty weights `(γ₁, γ₂) = (2σλ₁, 2σλ₂)` under which the posterior
    /// mode coincides with the penalized estimator.
    pub fn matched_gammas(&self, sigma: T) -> (T, T) {
        let two = T::lit(2.0);
        (two * sigma * self.lambda1(), two * sigma * self.lambda2())
    }
}
