use ndarray::{Array2, ArrayView3, Axis};

use crate::error::{Error, Result};
use crate::model::ChainOutput;
use crate::scalar::Scalar;

pub const MIN_DRAWS: usize = 100;

/// Quantile of sorted data by linear interpolation between order
/// statistics: with `h = (S − 1)p`, the result is
/// `x₍⌊h⌋₎ + (h − ⌊h⌋)(x₍⌊h⌋+1₎ − x₍⌊h⌋₎)` (zero-based order statistics).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Posterior means and equal-tail intervals for every `(SNP, phenotype)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalReport {
    pub snp_names: Vec<String>,
    pub phenotype_names: Vec<String>,
    pub mean: Array2<f64>,
    pub lower: Array2<f64>,
    pub upper: Array2<f64>,
    pub level: f64,
}

impl IntervalReport {
    pub fn d(&self) -> usize {
        self.mean.nrows()
    }

    pub fn c(&self) -> usize {
        self.mean.ncols()
    }

    pub fn with_names(mut self, snp_names: Vec<String>, phenotype_names: Vec<String>) -> Result<Self> {
        if snp_names.len() != self.d() || phenotype_names.len() != self.c() {
            return Err(Error::dims(
                "interval report names",
                format!("{} SNPs, {} phenotypes", self.d(), self.c()),
                format!("{} SNPs, {} phenotypes", snp_names.len(), phenotype_names.len()),
            ));
        }
        self.snp_names = snp_names;
        self.phenotype_names = phenotype_names;
        Ok(self)
    }

    /// True when the interval of `(i, j)` excludes zero; touching zero does not count.
    pub fn excludes_zero(&self, i: usize, j: usize) -> bool {
        self.lower[[i, j]] > 0.0 || self.upper[[i, j]] < 0.0
    }

    pub fn snp_selected(&self, i: usize) -> bool {
        (0..self.c()).any(|j| self.excludes_zero(i, j))
    }

    pub fn snp_index(&self, name: &str) -> Option<usize> {
        self.snp_names.iter().position(|s| s == name)
    }
}

fn default_names(prefix: &str, k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("{prefix}{i}")).collect()
}

/// Equal-tail intervals at `level` from an `S × d × c` array of draws.
pub fn intervals_from_draws(draws: ArrayView3<'_, f64>, level: f64) -> Result<IntervalReport> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!("interval level must lie in (0, 1), got {level}")));
    }
    let (s, d, c) = draws.dim();
    if s < MIN_DRAWS {
        return Err(Error::Invalid(format!(
            "credible intervals need at least {MIN_DRAWS} stored draws, got {s}"
        )));
    }
    let tail = (1.0 - level) / 2.0;
    let mut mean = Array2::zeros((d, c));
    let mut lower = Array2::zeros((d, c));
    let mut upper = Array2::zeros((d, c));
    let mut buf = Vec::with_capacity(s);
    for i in 0..d {
        for j in 0..c {
            buf.clear();
            buf.extend(draws.index_axis(Axis(1), i).column(j).iter().copied());
            buf.sort_by(|a, b| a.partial_cmp(b).expect("finite draws"));
            let m = buf.iter().sum::<f64>() / s as f64;
            mean[[i, j]] = m.clamp(buf[0], buf[s - 1]);
            lower[[i, j]] = quantile_sorted(&buf, tail);
            upper[[i, j]] = quantile_sorted(&buf, 1.0 - tail);
        }
    }
    Ok(IntervalReport {
        snp_names: default_names("snp", d),
        phenotype_names: default_names("pheno", c),
        mean,
        lower,
        upper,
        level,
    })
}

pub fn credible_intervals<T: Scalar>(chain: &ChainOutput<T>, level: f64) -> Result<IntervalReport> {
    let draws = chain.w_draws.mapv(|v| v.as_f64());
    intervals_from_draws(draws.view(), level)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array3;

    #[test]
    fn interpolation_rule_on_one_to_hundred() {
        let draws = Array3::from_shape_fn((100, 1, 1), |(s, _, _)| (s + 1) as f64);
        let r = intervals_from_draws(draws.view(), 0.90).unwrap();
        assert!((r.lower[[0, 0]] - 5.95).abs() < 1e-12);
        assert!((r.upper[[0, 0]] - 95.05).abs() < 1e-12);
        assert_eq!(r.mean[[0, 0]], 50.5);
    }

    #[test]
    fn constant_draws() {
        let draws = Array3::from_elem((150, 2, 1), 3.0);
        let r = intervals_from_draws(draws.view(), 0.95).unwrap();
        assert!(r.lower.iter().chain(r.upper.iter()).chain(r.mean.iter()).all(|&v| v == 3.0));
    }

    #[test]
    fn symmetric_draws_give_symmetric_interval() {
        let draws = Array3::from_shape_fn((201, 1, 1), |(s, _, _)| s as f64 - 100.0);
        let r = intervals_from_draws(draws.view(), 0.95).unwrap();
        assert!((r.lower[[0, 0]] + r.upper[[0, 0]]).abs() < 1e-12);
    }

    #[test]
    fn rejects_short_chains_and_bad_levels() {
        let draws = Array3::<f64>::zeros((99, 1, 1));
        assert!(intervals_from_draws(draws.view(), 0.95).is_err());
        let draws = Array3::<f64>::zeros((100, 1, 1));
        assert!(intervals_from_draws(draws.view(), 1.0).is_err());
    }

    #[test]
    fn zero_boundary_is_not_excluded() {
        let draws = Array3::from_shape_fn((100, 1, 2), |(s, _, j)| if j == 0 { 0.0 } else { 1.0 + s as f64 });
        let r = intervals_from_draws(draws.view(), 0.95).unwrap();
        assert!(!r.excludes_zero(0, 0));
        assert!(r.excludes_zero(0, 1));
    }
}
