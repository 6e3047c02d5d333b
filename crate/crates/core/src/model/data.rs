use ndarray::{Array2, ArrayView2, Axis};

use super::groups::GroupStructure;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Tolerance on column mean and variance for a dataset flagged as standardized.
pub const STANDARDIZED_TOL: f64 = 1e-8;

/// Genotypes (`n × d`, minor-allele counts in {0, 1, 2}), phenotypes
/// (`n × c`) and the SNP grouping.
///
/// Genotypes are used as raw counts: no centering or scaling is applied
/// before fitting.
#[derive(Debug, Clone)]
pub struct Dataset<T> {
    x: Array2<T>,
    y: Array2<T>,
    groups: GroupStructure,
    snp_names: Vec<String>,
    phenotype_names: Vec<String>,
    standardized: bool,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(x: Array2<T>, y: Array2<T>, groups: GroupStructure) -> Result<Self> {
        let snp_names = (0..x.ncols()).map(|i| format!("snp{}", i + 1)).collect();
        let phenotype_names = (0..y.ncols()).map(|j| format!("pheno{}", j + 1)).collect();
        Self::with_names(x, y, groups, snp_names, phenotype_names)
    }

    pub fn with_names(
        x: Array2<T>,
        y: Array2<T>,
        groups: GroupStructure,
        snp_names: Vec<String>,
        phenotype_names: Vec<String>,
    ) -> Result<Self> {
        if x.nrows() != y.nrows() {
            return Err(Error::dims(
                "dataset rows",
                format!("{} phenotype rows", x.nrows()),
                y.nrows().to_string(),
            ));
        }
        if groups.n_snps() != x.ncols() {
            return Err(Error::dims(
                "dataset groups",
                format!("{} SNPs", x.ncols()),
                groups.n_snps().to_string(),
            ));
        }
        if snp_names.len() != x.ncols() || phenotype_names.len() != y.ncols() {
            return Err(Error::dims(
                "dataset names",
                format!("{} SNP / {} phenotype names", x.ncols(), y.ncols()),
                format!("{} / {}", snp_names.len(), phenotype_names.len()),
            ));
        }
        if y.ncols() == 0 {
            return Err(Error::Invalid("no phenotype columns".into()));
        }
        let (one, two) = (T::one(), T::lit(2.0));
        if let Some(((l, j), v)) = x
            .indexed_iter()
            .find(|(_, &v)| v != T::zero() && v != one && v != two)
        {
            return Err(Error::Invalid(format!(
                "genotype at subject {l}, SNP '{}' is {v}; expected 0, 1 or 2",
                snp_names[j]
            )));
        }
        if let Some(((l, j), _)) = y.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Invalid(format!(
                "phenotype '{}' at subject {l} is not finite",
                phenotype_names[j]
            )));
        }
        Ok(Self {
            x,
            y,
            groups,
            snp_names,
            phenotype_names,
            standardized: false,
        })
    }

    /// Flags the phenotypes as standardized after checking every column has
    /// sample mean 0 and sample variance 1.
    pub fn mark_standardized(mut self) -> Result<Self> {
        let n = self.n();
        if n < 2 {
            return Err(Error::Invalid("need at least two subjects to standardize".into()));
        }
        let tol = T::lit(STANDARDIZED_TOL);
        for (j, col) in self.y.axis_iter(Axis(1)).enumerate() {
            let mean = col.sum() / T::from_usize_lossy(n);
            let var = col.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>()
                / T::from_usize_lossy(n - 1);
            if mean.abs() > tol || (var - T::one()).abs() > tol {
                return Err(Error::Invalid(format!(
                    "phenotype '{}' is not standardized (mean {mean}, variance {var})",
                    self.phenotype_names[j]
                )));
            }
        }
        self.standardized = true;
        Ok(self)
    }

    /// Subset (with repetition) of subjects, e.g. a bootstrap resample.
    pub fn select_subjects(&self, rows: &[usize]) -> Self {
        Self {
            x: self.x.select(Axis(0), rows),
            y: self.y.select(Axis(0), rows),
            groups: self.groups.clone(),
            snp_names: self.snp_names.clone(),
            phenotype_names: self.phenotype_names.clone(),
            standardized: false,
        }
    }

    pub fn x(&self) -> ArrayView2<'_, T> {
        self.x.view()
    }

    pub fn y(&self) -> ArrayView2<'_, T> {
        self.y.view()
    }

    pub fn groups(&self) -> &GroupStructure {
        &self.groups
    }

    pub fn snp_names(&self) -> &[String] {
        &self.snp_names
    }

    pub fn phenotype_names(&self) -> &[String] {
        &self.phenotype_names
    }

    pub fn is_standardized(&self) -> bool {
        self.standardized
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn d(&self) -> usize {
        self.x.ncols()
    }

    pub fn c(&self) -> usize {
        self.y.ncols()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn rejects_non_genotype_values() {
        let g = GroupStructure::single(2).unwrap();
        let x = array![[0.0, 3.0]];
        let y = array![[1.0]];
        let err = Dataset::new(x, y, g).unwrap_err();
        assert!(err.to_string().contains("snp2"));
    }

    #[test]
    fn rejects_shape_mismatch() {
        let g = GroupStructure::single(2).unwrap();
        assert!(Dataset::new(array![[0.0, 1.0]], array![[1.0], [2.0]], g.clone()).is_err());
        let g3 = GroupStructure::single(3).unwrap();
        assert!(Dataset::new(array![[0.0, 1.0]], array![[1.0]], g3).is_err());
    }

    #[test]
    fn standardized_flag_is_checked() {
        let g = GroupStructure::single(1).unwrap();
        let ds = Dataset::new(array![[0.0], [1.0], [2.0]], array![[-1.0], [0.0], [1.0]], g.clone())
            .unwrap();
        assert!(ds.mark_standardized().unwrap().is_standardized());
        let ds = Dataset::new(array![[0.0], [1.0], [2.0]], array![[1.0], [2.0], [3.0]], g).unwrap();
        assert!(ds.mark_standardized().is_err());
    }

    #[test]
    fn subject_selection_repeats_rows() {
        let g = GroupStructure::single(1).unwrap();
        let ds = Dataset::new(array![[0.0], [2.0]], array![[5.0], [7.0]], g).unwrap();
        let b = ds.select_subjects(&[1, 1, 0]);
        assert_eq!(b.y(), array![[7.0], [7.0], [5.0]]);
        assert_eq!(b.n(), 3);
    }
}
