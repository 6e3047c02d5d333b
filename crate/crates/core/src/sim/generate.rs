//! Synthetic genotypes, true coefficients and phenotypes.

use ndarray::{Array1, Array2};
use rand::seq::index::sample;
use rand::Rng;
use statrs::function::erf::erfc;

use super::design::{ErrorFamily, StudyDesign};
use crate::error::{Error, Result};
use crate::model::GroupStructure;
use crate::scalar::Scalar;

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Minor-allele counts under Hardy-Weinberg equilibrium with minor-allele
/// frequencies drawn from Uniform(0.05, 0.5).
///
/// With `correlation > 0`, SNPs within a gene share a Gaussian copula with
/// equicorrelation `correlation`; the latent normal of SNP `i` is cut at
/// the genotype quantiles `(1−p)²` and `1−p²`, so the marginals stay exact.
pub fn simulate_genotypes<R: Rng + ?Sized>(
    n: usize,
    groups: &GroupStructure,
    correlation: f64,
    rng: &mut R,
) -> Array2<f64> {
    let d = groups.n_snps();
    let maf: Vec<f64> = (0..d).map(|_| rng.random_range(0.05..0.5)).collect();
    let shared = correlation.sqrt();
    let own = (1.0 - correlation).sqrt();
    let mut x = Array2::zeros((n, d));
    for l in 0..n {
        for members in groups.iter() {
            let u = f64::standard_normal(rng);
            for &i in members {
                let z = shared * u + own * f64::standard_normal(rng);
                let p = maf[i];
                let q = std_normal_cdf(z);
                x[[l, i]] = if q < (1.0 - p) * (1.0 - p) {
                    0.0
                } else if q < 1.0 - p * p {
                    1.0
                } else {
                    2.0
                };
            }
        }
    }
    x
}

/// True coefficients together with the mixing variables that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct Truth {
    pub w: Array2<f64>,
    pub tau2: Array1<f64>,
    pub omega2: Array1<f64>,
    /// Nonzero rows, ascending.
    pub active: Vec<usize>,
}

/// `τ²_k ~ Gamma(shape (m_k c + 1)/2, rate λ₁²/2)` and
/// `ω²_i ~ Gamma(shape (c + 1)/2, rate λ₂²/2)`.
pub fn simulate_mixing<R: Rng + ?Sized>(
    groups: &GroupStructure,
    c: usize,
    lambda1_sq: f64,
    lambda2_sq: f64,
    rng: &mut R,
) -> Result<(Array1<f64>, Array1<f64>)> {
    let draw = |shape: f64, rate: f64, rng: &mut R| {
        f64::sample_gamma(shape, 1.0 / rate, rng)
            .ok_or_else(|| Error::Domain(format!("invalid gamma parameters ({shape}, {rate})")))
    };
    let tau2 = groups
        .sizes()
        .iter()
        .map(|&m| draw((m * c + 1) as f64 / 2.0, lambda1_sq / 2.0, rng))
        .collect::<Result<Vec<_>>>()?;
    let omega2 = (0..groups.n_snps())
        .map(|_| draw((c + 1) as f64 / 2.0, lambda2_sq / 2.0, rng))
        .collect::<Result<Vec<_>>>()?;
    Ok((Array1::from(tau2), Array1::from(omega2)))
}

/// `w_ij ~ N(0, σ² (1/τ²_{k(i)} + 1/ω²_i)⁻¹)` independently.
pub fn draw_coefficients<R: Rng + ?Sized>(
    groups: &GroupStructure,
    tau2: &Array1<f64>,
    omega2: &Array1<f64>,
    sigma2: f64,
    c: usize,
    rng: &mut R,
) -> Array2<f64> {
    Array2::from_shape_fn((groups.n_snps(), c), |(i, _)| {
        let var = sigma2 / (1.0 / tau2[groups.group_of(i)] + 1.0 / omega2[i]);
        var.sqrt() * f64::standard_normal(rng)
    })
}

/// Every row of the active genes plus a seeded choice of the remaining
/// `active_rows` among SNPs of the other genes.
pub fn choose_active_rows<R: Rng + ?Sized>(design: &StudyDesign, groups: &GroupStructure, rng: &mut R) -> Result<Vec<usize>> {
    let mut active: Vec<usize> = design
        .active_genes
        .iter()
        .flat_map(|&k| groups.members(k).iter().copied())
        .collect();
    if active.len() > design.active_rows {
        return Err(Error::Config(format!(
            "active genes hold {} SNPs, more than active_rows = {}",
            active.len(),
            design.active_rows
        )));
    }
    let pool: Vec<usize> = (0..groups.n_snps())
        .filter(|&i| !design.active_genes.contains(&groups.group_of(i)))
        .collect();
    let extra = design.active_rows - active.len();
    if extra > pool.len() {
        return Err(Error::Config(format!(
            "{extra} further active rows requested but only {} SNPs lie outside the active genes",
            pool.len()
        )));
    }
    active.extend(sample(rng, pool.len(), extra).into_iter().map(|p| pool[p]));
    active.sort_unstable();
    Ok(active)
}

/// Simulates the mixing variables and coefficients from the design's
/// generating values, then sets every row outside the active set to zero.
pub fn simulate_truth<R: Rng + ?Sized>(design: &StudyDesign, rng: &mut R) -> Result<Truth> {
    let groups = design.groups()?;
    let (tau2, omega2) = simulate_mixing(&groups, design.c, design.lambda1_sq, design.lambda2_sq, rng)?;
    let mut w = draw_coefficients(&groups, &tau2, &omega2, design.sigma2, design.c, rng);
    let active = choose_active_rows(design, &groups, rng)?;
    for i in 0..groups.n_snps() {
        if active.binary_search(&i).is_err() {
            w.row_mut(i).fill(0.0);
        }
    }
    Ok(Truth { w, tau2, omega2, active })
}

/// `Y = XW + E` with rows of `E` either `N(0, σ²I)` or multivariate t₄
/// with scale `σ²I`, i.e. `σ z √(4/χ²₄)` with one χ² draw per subject.
pub fn simulate_phenotypes<R: Rng + ?Sized>(
    x: &Array2<f64>,
    w: &Array2<f64>,
    sigma2: f64,
    family: ErrorFamily,
    rng: &mut R,
) -> Result<Array2<f64>> {
    if x.ncols() != w.nrows() {
        return Err(Error::dims("phenotype simulation", format!("W with {} rows", x.ncols()), w.nrows().to_string()));
    }
    if !(sigma2 >= 0.0) {
        return Err(Error::Domain(format!("sigma2 must be nonnegative, got {sigma2}")));
    }
    let sigma = sigma2.sqrt();
    let mut y = x.dot(w);
    for mut row in y.rows_mut() {
        let scale = match family {
            ErrorFamily::Gaussian => sigma,
            ErrorFamily::StudentT4 => {
                let chi2 = f64::sample_gamma(2.0, 2.0, rng).expect("valid gamma parameters");
                sigma * (4.0 / chi2).sqrt()
            }
        };
        for v in row.iter_mut() {
            *v += scale * f64::standard_normal(rng);
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn genotype_marginals_follow_hardy_weinberg() {
        let g = GroupStructure::contiguous(&[3, 2]).unwrap();
        let mut rng = rng_from_seed(1);
        let x = simulate_genotypes(20_000, &g, 0.7, &mut rng);
        assert!(x.iter().all(|&v| v == 0.0 || v == 1.0 || v == 2.0));
        for col in x.columns() {
            let p = col.sum() / (2.0 * 20_000.0);
            assert!(p > 0.03 && p < 0.52, "{p}");
            let het = col.iter().filter(|&&v| v == 1.0).count() as f64 / 20_000.0;
            assert!((het - 2.0 * p * (1.0 - p)).abs() < 0.02, "{het} vs {p}");
        }
    }

    #[test]
    fn copula_correlates_within_gene_only() {
        let g = GroupStructure::contiguous(&[2, 1]).unwrap();
        let mut rng = rng_from_seed(2);
        let x = simulate_genotypes(20_000, &g, 0.7, &mut rng);
        let corr = |a: usize, b: usize| {
            let (ca, cb) = (x.column(a), x.column(b));
            let (ma, mb) = (ca.mean().unwrap(), cb.mean().unwrap());
            let cov = ca.iter().zip(cb.iter()).map(|(u, v)| (u - ma) * (v - mb)).sum::<f64>();
            let va = ca.iter().map(|u| (u - ma).powi(2)).sum::<f64>();
            let vb = cb.iter().map(|v| (v - mb).powi(2)).sum::<f64>();
            cov / (va * vb).sqrt()
        };
        assert!(corr(0, 1) > 0.2);
        assert!(corr(0, 2).abs() < 0.05);
    }

    #[test]
    fn sparsity_extremes() {
        let mut d = StudyDesign::desk(1).unwrap();
        d.active_genes.clear();
        d.active_rows = 0;
        let t = simulate_truth(&d, &mut rng_from_seed(3)).unwrap();
        assert!(t.w.iter().all(|&v| v == 0.0));
        d.active_rows = d.d();
        let t = simulate_truth(&d, &mut rng_from_seed(3)).unwrap();
        assert!(t.w.iter().all(|&v| v != 0.0));
    }

    #[test]
    fn active_layout_is_respected() {
        let d = StudyDesign::desk(1).unwrap();
        let t = simulate_truth(&d, &mut rng_from_seed(4)).unwrap();
        assert_eq!(t.active.len(), 4);
        assert!(t.active.contains(&18) && t.active.contains(&19));
        let nonzero: Vec<usize> = (0..20).filter(|&i| t.w.row(i).iter().any(|&v| v != 0.0)).collect();
        assert_eq!(nonzero, t.active);
    }

    #[test]
    fn noiseless_phenotypes() {
        let x = ndarray::array![[0.0, 1.0], [2.0, 1.0]];
        let w = ndarray::array![[0.5, -1.0], [1.5, 2.0]];
        let y = simulate_phenotypes(&x, &w, 0.0, ErrorFamily::Gaussian, &mut rng_from_seed(5)).unwrap();
        assert_eq!(y, x.dot(&w));
    }
}
