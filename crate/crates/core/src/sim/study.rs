//! Coverage of interval estimators over simulation replicates.

use std::io::Write;

use ndarray::Array2;
use rayon::prelude::*;

use super::design::{BayesTuning, BootstrapTuning, StudyDesign};
use super::generate::{simulate_genotypes, simulate_phenotypes, simulate_truth, Truth};
use crate::error::{Error, Result};
use crate::model::{Dataset, Hyperparams};
use crate::report::credible_intervals;
use crate::rng::{derive_seed, rng_from_seed};
use crate::sampler::{run_gibbs, SamplerConfig};
use crate::tuning::{grid_search, TuningGrid};
use crate::wang::{bootstrap_intervals, cv_select, WangOptions};

const GENOTYPE_STREAM: u64 = 0;
const TRUTH_STREAM: u64 = 1;
const REPLICATE_STREAM: u64 = 2;

/// Interval bounds for every coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct Intervals {
    pub lower: Array2<f64>,
    pub upper: Array2<f64>,
}

/// An interval estimator evaluated by [`run_study`].
pub trait IntervalMethod: Sync {
    fn name(&self) -> &str;
    fn intervals(&self, data: &Dataset<f64>, design: &StudyDesign, seed: u64) -> Result<Intervals>;
}

/// Equal-tail credible intervals from the Gibbs sampler.
pub struct BayesMethod;

impl IntervalMethod for BayesMethod {
    fn name(&self) -> &str {
        "bayes"
    }

    fn intervals(&self, data: &Dataset<f64>, design: &StudyDesign, seed: u64) -> Result<Intervals> {
        let f = &design.fit;
        let config = SamplerConfig::new(f.iterations, f.burn_in).with_thin(f.thin).with_seed(seed);
        let chain = match f.bayes_tuning {
            BayesTuning::Truth => {
                let hyper = Hyperparams::with_lambdas(design.lambda1_sq, design.lambda2_sq)?;
                run_gibbs(data, &hyper, &config)?
            }
            BayesTuning::Waic => {
                let grid = TuningGrid::product(&f.waic_grid, &f.waic_grid)?;
                let base = Hyperparams::with_lambdas(1.0, 1.0)?;
                let found = grid_search(data, &grid, &base, &config, 1)?;
                log::debug!("WAIC picked (λ₁², λ₂²) = {:?}", found.report.best_pair());
                found.best
            }
        };
        let report = credible_intervals(&chain, f.level)?;
        Ok(Intervals {
            lower: report.lower,
            upper: report.upper,
        })
    }
}

/// Percentile bootstrap around the penalized estimator.
pub struct BootstrapMethod;

impl IntervalMethod for BootstrapMethod {
    fn name(&self) -> &str {
        "bootstrap"
    }

    fn intervals(&self, data: &Dataset<f64>, design: &StudyDesign, seed: u64) -> Result<Intervals> {
        let f = &design.fit;
        let opts = WangOptions::default();
        let (g1, g2) = match f.bootstrap_tuning {
            BootstrapTuning::Truth => {
                let sigma = design.sigma2.sqrt();
                (2.0 * sigma * design.lambda1_sq.sqrt(), 2.0 * sigma * design.lambda2_sq.sqrt())
            }
            BootstrapTuning::Cv => {
                let grid: Vec<(f64, f64)> = f
                    .cv_grid
                    .iter()
                    .flat_map(|&a| f.cv_grid.iter().map(move |&b| (a, b)))
                    .collect();
                let sel = cv_select(data.x(), data.y(), data.groups(), &grid, f.cv_folds, seed, &opts)?;
                (sel.gamma1, sel.gamma2)
            }
        };
        let boot = bootstrap_intervals(
            data.x(),
            data.y(),
            data.groups(),
            g1,
            g2,
            f.bootstrap_replicates,
            f.level,
            derive_seed(seed, 1),
            &opts,
        )?;
        Ok(Intervals {
            lower: boot.lower,
            upper: boot.upper,
        })
    }
}

/// Coverage of one method across the replicates it completed.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodCoverage {
    pub method: String,
    pub replicates: usize,
    pub failures: usize,
    /// Fraction of completed replicates whose interval covered `w_ij`.
    pub coverage: Array2<f64>,
    /// Mean coverage over all parameters.
    pub mcp_overall: f64,
    /// Mean coverage over parameters with nonzero truth.
    pub mcp_active: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageTable {
    pub methods: Vec<MethodCoverage>,
}

impl CoverageTable {
    pub fn method(&self, name: &str) -> Option<&MethodCoverage> {
        self.methods.iter().find(|m| m.method == name)
    }

    /// One row per method: `method, mcp_overall, mcp_active, replicates, failures`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["method", "mcp_overall", "mcp_active", "replicates", "failures"])?;
        for m in &self.methods {
            w.write_record([
                m.method.clone(),
                m.mcp_overall.to_string(),
                m.mcp_active.to_string(),
                m.replicates.to_string(),
                m.failures.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

struct Replicate {
    truth: Truth,
    outcomes: Vec<Option<Intervals>>,
}

/// Simulates `design.replicates` datasets, fits every method to each and
/// tallies how often each interval covers the true coefficient.
///
/// Genotypes are drawn once per study. The true `W` is drawn once as well
/// unless `resimulate_truth` is set. Replicate `r` draws its noise and
/// method seeds from `derive_seed(derive_seed(seed, 2), r)`, so results do
/// not depend on scheduling. A method that fails on a replicate is left out
/// of that method's tallies.
pub fn run_study(design: &StudyDesign, methods: &[&dyn IntervalMethod]) -> Result<CoverageTable> {
    design.validate()?;
    if methods.is_empty() {
        return Err(Error::Invalid("no interval methods given".into()));
    }
    let groups = design.groups()?;
    let x = simulate_genotypes(
        design.n,
        &groups,
        design.genotype_correlation,
        &mut rng_from_seed(derive_seed(design.seed, GENOTYPE_STREAM)),
    );
    let fixed_truth = simulate_truth(design, &mut rng_from_seed(derive_seed(design.seed, TRUTH_STREAM)))?;
    let replicate_base = derive_seed(design.seed, REPLICATE_STREAM);

    let replicates: Vec<Replicate> = (0..design.replicates as u64)
        .into_par_iter()
        .map(|r| {
            let seed = derive_seed(replicate_base, r);
            let mut rng = rng_from_seed(seed);
            let truth = if design.resimulate_truth {
                simulate_truth(design, &mut rng)?
            } else {
                fixed_truth.clone()
            };
            let y = simulate_phenotypes(&x, &truth.w, design.sigma2, design.family, &mut rng)?;
            let data = Dataset::new(x.clone(), y, groups.clone())?;
            let outcomes = methods
                .iter()
                .enumerate()
                .map(|(m, method)| match method.intervals(&data, design, derive_seed(seed, m as u64 + 1)) {
                    Ok(iv) => Some(iv),
                    Err(e) => {
                        log::warn!("replicate {r}: method {} failed: {e}", method.name());
                        None
                    }
                })
                .collect();
            Ok(Replicate { truth, outcomes })
        })
        .collect::<Result<_>>()?;

    let (d, c) = (design.d(), design.c);
    let table = methods
        .iter()
        .enumerate()
        .map(|(m, method)| {
            let mut hits = Array2::<f64>::zeros((d, c));
            let (mut done, mut active_hits, mut active_total) = (0usize, 0.0, 0.0);
            for rep in &replicates {
                let Some(iv) = &rep.outcomes[m] else { continue };
                done += 1;
                for i in 0..d {
                    for j in 0..c {
                        let t = rep.truth.w[[i, j]];
                        let covered = iv.lower[[i, j]] <= t && t <= iv.upper[[i, j]];
                        if covered {
                            hits[[i, j]] += 1.0;
                        }
                        if t != 0.0 {
                            active_total += 1.0;
                            if covered {
                                active_hits += 1.0;
                            }
                        }
                    }
                }
            }
            let coverage = if done > 0 { hits / done as f64 } else { Array2::from_elem((d, c), f64::NAN) };
            MethodCoverage {
                method: method.name().to_owned(),
                replicates: done,
                failures: replicates.len() - done,
                mcp_overall: coverage.mean().unwrap_or(f64::NAN),
                mcp_active: if active_total > 0.0 { active_hits / active_total } else { f64::NAN },
                coverage,
            }
        })
        .collect();
    Ok(CoverageTable { methods: table })
}
