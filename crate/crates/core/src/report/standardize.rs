use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Per-column centering and scaling applied to raw phenotypes.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardization {
    pub mean: Vec<f64>,
    /// Sample standard deviation (denominator `n − 1`).
    pub sd: Vec<f64>,
}

impl Standardization {
    pub fn apply<T: Scalar>(&self, y: ArrayView2<'_, T>) -> Array2<T> {
        Array2::from_shape_fn(y.dim(), |(l, j)| T::lit((y[[l, j]].as_f64() - self.mean[j]) / self.sd[j]))
    }

    pub fn back_transform<T: Scalar>(&self, z: ArrayView2<'_, T>) -> Array2<T> {
        Array2::from_shape_fn(z.dim(), |(l, j)| T::lit(z[[l, j]].as_f64() * self.sd[j] + self.mean[j]))
    }
}

/// Centers each column to mean zero and scales it to unit sample variance.
/// `names` labels the columns in error messages and may be empty.
pub fn standardize_phenotypes<T: Scalar>(
    y: ArrayView2<'_, T>,
    names: &[String],
) -> Result<(Array2<T>, Standardization)> {
    let n = y.nrows();
    if n < 2 {
        return Err(Error::Invalid(format!("standardizing needs at least 2 subjects, got {n}")));
    }
    let mut mean = Vec::with_capacity(y.ncols());
    let mut sd = Vec::with_capacity(y.ncols());
    for (j, col) in y.columns().into_iter().enumerate() {
        let m = col.iter().map(|v| v.as_f64()).sum::<f64>() / n as f64;
        let var = col.iter().map(|v| (v.as_f64() - m).powi(2)).sum::<f64>() / (n - 1) as f64;
        let s = var.sqrt();
        if !(s > 1e-12 * m.abs().max(f64::MIN_POSITIVE)) || !s.is_finite() {
            let label = names.get(j).map(String::as_str).unwrap_or("");
            return Err(Error::Invalid(format!(
                "phenotype column {} {label} has zero variance",
                j + 1
            )));
        }
        mean.push(m);
        sd.push(s);
    }
    let t = Standardization { mean, sd };
    Ok((t.apply(y), t))
}
