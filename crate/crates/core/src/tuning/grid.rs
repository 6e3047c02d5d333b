use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Candidate `(λ₁², λ₂²)` pairs, kept in lexicographic order without duplicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningGrid {
    points: Vec<(f64, f64)>,
}

impl TuningGrid {
    pub fn new(mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Invalid("tuning grid is empty".into()));
        }
        if let Some(p) = points.iter().find(|(a, b)| !(a.is_finite() && b.is_finite() && *a > 0.0 && *b > 0.0)) {
            return Err(Error::Domain(format!("grid point {p:?} is not strictly positive")));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        if let Some(w) = points.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Invalid(format!("duplicate grid point {:?}", w[0])));
        }
        Ok(Self { points })
    }

    /// Cartesian product of the two axes.
    pub fn product(lambda1_sq: &[f64], lambda2_sq: &[f64]) -> Result<Self> {
        let points = lambda1_sq
            .iter()
            .flat_map(|&a| lambda2_sq.iter().map(move |&b| (a, b)))
            .collect();
        Self::new(points)
    }

    /// `{10^lo, …, 10^hi}²` with integer exponent steps.
    pub fn powers_of_ten(lo: i32, hi: i32) -> Result<Self> {
        if lo > hi {
            return Err(Error::Invalid(format!("empty exponent range {lo}..={hi}")));
        }
        let axis: Vec<f64> = (lo..=hi).map(|e| 10f64.powi(e)).collect();
        Self::product(&axis, &axis)
    }

    /// The full 11 × 11 grid `{10⁻⁵, …, 10⁵}²`.
    pub fn full() -> Self {
        Self::powers_of_ten(-5, 5).expect("static grid")
    }

    /// The central 7 × 7 block `{10⁻³, …, 10³}²` of the full grid (49 chains).
    pub fn subgrid49() -> Self {
        Self::powers_of_ten(-3, 3).expect("static grid")
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_grids() {
        let full = TuningGrid::full();
        assert_eq!(full.len(), 121);
        assert_eq!(full.points()[0], (1e-5, 1e-5));
        assert_eq!(full.points()[1], (1e-5, 1e-4));
        assert_eq!(TuningGrid::subgrid49().len(), 49);
        assert!(TuningGrid::subgrid49().points().iter().all(|p| full.points().contains(p)));
    }

    #[test]
    fn rejects_bad_points() {
        assert!(TuningGrid::new(vec![]).is_err());
        assert!(TuningGrid::new(vec![(0.0, 1.0)]).is_err());
        assert!(TuningGrid::new(vec![(1.0, 2.0), (1.0, 2.0)]).is_err());
        let g = TuningGrid::new(vec![(2.0, 1.0), (1.0, 3.0), (1.0, 2.0)]).unwrap();
        assert_eq!(g.points(), &[(1.0, 2.0), (1.0, 3.0), (2.0, 1.0)]);
    }
}
