use std::io::Write;
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;

use super::grid::TuningGrid;
use super::waic::{waic, Waic};
use crate::error::{Error, Result};
use crate::model::{ChainOutput, Dataset, Hyperparams};
use crate::rng::derive_seed;
use crate::sampler::{run_gibbs, SamplerConfig};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct WaicEntry {
    pub lambda1_sq: f64,
    pub lambda2_sq: f64,
    pub seed: u64,
    pub seconds: f64,
    /// `Err` carries the failure message of a chain that did not finish.
    pub outcome: std::result::Result<Waic, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaicReport {
    pub entries: Vec<WaicEntry>,
    pub best: usize,
}

impl WaicReport {
    pub fn best_entry(&self) -> &WaicEntry {
        &self.entries[self.best]
    }

    pub fn best_pair(&self) -> (f64, f64) {
        let e = self.best_entry();
        (e.lambda1_sq, e.lambda2_sq)
    }

    pub fn n_failed(&self) -> usize {
        self.entries.iter().filter(|e| e.outcome.is_err()).count()
    }

    /// CSV with columns `lambda1_sq, lambda2_sq, waic, lppd, penalty, seed, seconds`.
    /// Failed points have empty WAIC fields.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["lambda1_sq", "lambda2_sq", "waic", "lppd", "penalty", "seed", "seconds"])?;
        for e in &self.entries {
            let (a, b, c) = match &e.outcome {
                Ok(t) => (t.waic.to_string(), t.lppd.to_string(), t.penalty.to_string()),
                Err(_) => (String::new(), String::new(), String::new()),
            };
            w.write_record([
                e.lambda1_sq.to_string(),
                e.lambda2_sq.to_string(),
                a,
                b,
                c,
                e.seed.to_string(),
                format!("{:.3}", e.seconds),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub struct GridSearch<T> {
    pub report: WaicReport,
    pub best: ChainOutput<T>,
}

/// Runs one chain per grid point and keeps the chain with the smallest WAIC.
///
/// Point `g` is sampled with seed `derive_seed(config.seed, g)` and the
/// hyperparameters of `hyper_base` with its tuning pair replaced. Chains run
/// on a pool of `threads` workers (0 uses the global pool size). Failed
/// chains are recorded and excluded; ties in WAIC go to the smaller index.
pub fn grid_search<T: Scalar>(
    data: &Dataset<T>,
    grid: &TuningGrid,
    hyper_base: &Hyperparams<T>,
    config: &SamplerConfig<T>,
    threads: usize,
) -> Result<GridSearch<T>> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let best: Mutex<Option<(f64, usize, ChainOutput<T>)>> = Mutex::new(None);

    let entries: Vec<WaicEntry> = pool.install(|| {
        grid.points()
            .par_iter()
            .enumerate()
            .map(|(g, &(l1, l2))| {
                let seed = derive_seed(config.seed, g as u64);
                let start = Instant::now();
                let outcome = Hyperparams::new(T::lit(l1), T::lit(l2), hyper_base.a_sigma, hyper_base.b_sigma)
                    .and_then(|hyper| run_gibbs(data, &hyper, &config.clone().with_seed(seed)))
                    .and_then(|chain| {
                        let w = waic(&chain)?;
                        if !w.waic.is_finite() {
                            return Err(Error::Numerical("non-finite WAIC".into()));
                        }
                        Ok((w, chain))
                    });
                let seconds = start.elapsed().as_secs_f64();
                let outcome = match outcome {
                    Ok((w, chain)) => {
                        let mut slot = best.lock().expect("poisoned");
                        let better = match &*slot {
                            None => true,
                            Some((bw, bi, _)) => (w.waic, g) < (*bw, *bi),
                        };
                        if better {
                            *slot = Some((w.waic, g, chain));
                        }
                        Ok(w)
                    }
                    Err(e) => {
                        log::warn!("grid point {g} ({l1}, {l2}) failed: {e}");
                        Err(e.to_string())
                    }
                };
                WaicEntry {
                    lambda1_sq: l1,
                    lambda2_sq: l2,
                    seed,
                    seconds,
                    outcome,
                }
            })
            .collect()
    });

    match best.into_inner().expect("poisoned") {
        Some((_, index, chain)) => Ok(GridSearch {
            report: WaicReport { entries, best: index },
            best: chain,
        }),
        None => Err(Error::AllFailed(entries.len())),
    }
}
