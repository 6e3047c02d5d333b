use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::GroupStructure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorFamily {
    #[default]
    Gaussian,
    /// Multivariate t with 4 degrees of freedom and scale matrix `σ²I`
    /// (so each error has variance `2σ²`).
    StudentT4,
}

/// How the Bayesian fit picks `(λ₁², λ₂²)` in each replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BayesTuning {
    /// Minimum WAIC over `waic_grid × waic_grid`.
    #[default]
    Waic,
    /// The generating values.
    Truth,
}

/// How the penalized fit picks `(γ₁, γ₂)` in each replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BootstrapTuning {
    /// Cross-validation over `cv_grid × cv_grid`.
    #[default]
    Cv,
    /// `γ = 2σλ` at the generating values.
    Truth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitSettings {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub level: f64,
    pub bayes_tuning: BayesTuning,
    pub waic_grid: Vec<f64>,
    pub bootstrap_replicates: usize,
    pub bootstrap_tuning: BootstrapTuning,
    pub cv_folds: usize,
    pub cv_grid: Vec<f64>,
}

impl Default for FitSettings {
    fn default() -> Self {
        Self {
            iterations: 3000,
            burn_in: 1000,
            thin: 2,
            level: 0.95,
            bayes_tuning: BayesTuning::Waic,
            waic_grid: vec![1e-2, 1e-1, 1.0, 1e1, 1e2],
            bootstrap_replicates: 1000,
            bootstrap_tuning: BootstrapTuning::Cv,
            cv_folds: 5,
            cv_grid: vec![1e-1, 1.0, 1e1, 1e2, 1e3],
        }
    }
}

fn default_lambda() -> f64 {
    2.0
}

fn default_correlation() -> f64 {
    0.7
}

/// One simulation study. Read from TOML; see the README for the schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyDesign {
    pub n: usize,
    pub group_sizes: Vec<usize>,
    pub c: usize,
    #[serde(default)]
    pub family: ErrorFamily,
    #[serde(default = "default_lambda")]
    pub lambda1_sq: f64,
    #[serde(default = "default_lambda")]
    pub lambda2_sq: f64,
    #[serde(default = "default_lambda")]
    pub sigma2: f64,
    /// Number of nonzero rows of the true `W`.
    pub active_rows: usize,
    /// Genes whose rows are all active; the remaining active rows are drawn
    /// from the other genes.
    #[serde(default)]
    pub active_genes: Vec<usize>,
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    /// Within-gene latent correlation of the genotype copula; 0 gives independent SNPs.
    #[serde(default = "default_correlation")]
    pub genotype_correlation: f64,
    /// Draw a fresh true `W` in every replicate instead of once per study.
    #[serde(default)]
    pub resimulate_truth: bool,
    #[serde(default)]
    pub fit: FitSettings,
}

impl StudyDesign {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let design: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        design.validate()?;
        Ok(design)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Reduced-size analog of the four reference studies: `d = 20` SNPs in
    /// genes of 8, 6, 4 and 2 SNPs, `c = 4`, the 2-SNP gene fully active
    /// plus two further active rows. Studies 1 and 3 use `n = 100`, 2 and 4
    /// use `n = 15 < d`; 3 and 4 have t₄ errors. The Bayesian fit uses the
    /// generating `λ₁², λ₂²`; the bootstrap is tuned by five-fold CV.
    pub fn desk(study: u8) -> Result<Self> {
        let (n, family) = match study {
            1 => (100, ErrorFamily::Gaussian),
            2 => (15, ErrorFamily::Gaussian),
            3 => (100, ErrorFamily::StudentT4),
            4 => (15, ErrorFamily::StudentT4),
            _ => return Err(Error::Config(format!("no desk study {study}; expected 1-4"))),
        };
        Ok(Self {
            n,
            group_sizes: vec![8, 6, 4, 2],
            c: 4,
            family,
            lambda1_sq: 2.0,
            lambda2_sq: 2.0,
            sigma2: 2.0,
            active_rows: 4,
            active_genes: vec![3],
            replicates: 50,
            seed: u64::from(study),
            genotype_correlation: 0.7,
            resimulate_truth: false,
            fit: FitSettings {
                bayes_tuning: BayesTuning::Truth,
                bootstrap_replicates: 200,
                ..FitSettings::default()
            },
        })
    }

    pub fn d(&self) -> usize {
        self.group_sizes.iter().sum()
    }

    pub fn groups(&self) -> Result<GroupStructure> {
        GroupStructure::contiguous(&self.group_sizes)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n < 2 || self.c == 0 || self.group_sizes.is_empty() {
            return bad("design needs n >= 2, c >= 1 and at least one gene".into());
        }
        if self.group_sizes.contains(&0) {
            return bad("gene sizes must be positive".into());
        }
        if self.active_rows > self.d() {
            return bad(format!("active_rows {} exceeds d = {}", self.active_rows, self.d()));
        }
        let mut genes = self.active_genes.clone();
        genes.sort_unstable();
        genes.dedup();
        if genes.len() != self.active_genes.len() || genes.iter().any(|&k| k >= self.group_sizes.len()) {
            return bad(format!("active_genes {:?} must be distinct gene indices", self.active_genes));
        }
        let full: usize = genes.iter().map(|&k| self.group_sizes[k]).sum();
        if full > self.active_rows {
            return bad(format!(
                "active genes hold {full} SNPs but only {} active rows are allowed",
                self.active_rows
            ));
        }
        for (name, v) in [("lambda1_sq", self.lambda1_sq), ("lambda2_sq", self.lambda2_sq), ("sigma2", self.sigma2)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if !(0.0..1.0).contains(&self.genotype_correlation) {
            return bad("genotype_correlation must lie in [0, 1)".into());
        }
        if self.replicates < 2 {
            return bad("a study needs at least 2 replicates".into());
        }
        let f = &self.fit;
        if f.burn_in >= f.iterations || f.thin == 0 {
            return bad("fit needs burn_in < iterations and thin >= 1".into());
        }
        if !(f.level > 0.0 && f.level < 1.0) {
            return bad(format!("level must lie in (0, 1), got {}", f.level));
        }
        if f.waic_grid.is_empty() || f.cv_grid.is_empty() {
            return bad("tuning grids must be nonempty".into());
        }
        Ok(())
    }
}
