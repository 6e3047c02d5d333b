//! K-fold cross-validation over a grid of penalty weights.

use ndarray::{Array2, ArrayView2, Axis};
use rayon::prelude::*;

use super::solver::{WangOptions, WangProblem};
use crate::error::{Error, Result};
use crate::model::GroupStructure;
use crate::rng::derive_seed;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct CvSelection<T> {
    pub gamma1: T,
    pub gamma2: T,
    pub index: usize,
    /// Mean held-out residual sum of squares per grid point.
    pub scores: Vec<T>,
}

/// Assigns each subject to one of `folds` folds.
///
/// The order is a seeded shuffle keyed on each subject's own data row, so
/// the folds are a property of the subjects rather than of their position
/// in the file: permuting subjects permutes the assignment with them.
/// Folds differ in size by at most one.
pub fn assign_folds<T: Scalar>(
    x: ArrayView2<'_, T>,
    y: ArrayView2<'_, T>,
    folds: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    let n = x.nrows();
    if folds < 2 || n < folds {
        return Err(Error::Invalid(format!(
            "cross-validation needs 2 <= folds <= n (folds {folds}, n {n})"
        )));
    }
    let keys: Vec<u64> = (0..n)
        .map(|l| {
            x.row(l)
                .iter()
                .chain(y.row(l).iter())
                .fold(seed, |h, v| derive_seed(h, v.as_f64().to_bits()))
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        keys[a].cmp(&keys[b]).then_with(|| {
            // identical keys mean identical rows unless the hash collides
            row_cmp(x, y, a, b)
        })
    });
    let mut fold_of = vec![0; n];
    for (rank, &l) in order.iter().enumerate() {
        fold_of[l] = rank % folds;
    }
    Ok(fold_of)
}

fn row_cmp<T: Scalar>(x: ArrayView2<'_, T>, y: ArrayView2<'_, T>, a: usize, b: usize) -> std::cmp::Ordering {
    let ra = x.row(a).into_iter().chain(y.row(a)).map(|v| v.as_f64());
    let rb = x.row(b).into_iter().chain(y.row(b)).map(|v| v.as_f64());
    ra.zip(rb)
        .map(|(p, q)| p.total_cmp(&q))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Picks the `(γ₁, γ₂)` pair with the smallest mean held-out residual sum
/// of squares (summed over phenotypes). Ties go to the smallest grid index.
pub fn cv_select<T: Scalar>(
    x: ArrayView2<'_, T>,
    y: ArrayView2<'_, T>,
    groups: &GroupStructure,
    grid: &[(T, T)],
    folds: usize,
    seed: u64,
    opts: &WangOptions,
) -> Result<CvSelection<T>> {
    if grid.is_empty() {
        return Err(Error::Invalid("empty penalty grid".into()));
    }
    if x.nrows() != y.nrows() {
        return Err(Error::dims("cross-validation", format!("{} rows", x.nrows()), format!("{} rows", y.nrows())));
    }
    let fold_of = assign_folds(x, y, folds, seed)?;
    let splits: Vec<(WangProblem<T>, Array2<T>, Array2<T>)> = (0..folds)
        .map(|f| {
            let train: Vec<usize> = (0..fold_of.len()).filter(|&l| fold_of[l] != f).collect();
            let test: Vec<usize> = (0..fold_of.len()).filter(|&l| fold_of[l] == f).collect();
            let problem = WangProblem::new(
                x.select(Axis(0), &train).view(),
                y.select(Axis(0), &train).view(),
                groups,
            )?;
            Ok((problem, x.select(Axis(0), &test), y.select(Axis(0), &test)))
        })
        .collect::<Result<_>>()?;

    let jobs: Vec<(usize, usize)> = (0..grid.len()).flat_map(|g| (0..folds).map(move |f| (g, f))).collect();
    let losses: Vec<T> = jobs
        .par_iter()
        .map(|&(g, f)| {
            let (problem, xt, yt) = &splits[f];
            let fit = problem.solve(grid[g].0, grid[g].1, opts)?;
            let resid = yt - &xt.dot(&fit.w);
            Ok(resid.iter().map(|&r| r * r).sum())
        })
        .collect::<Result<_>>()?;

    let denom = T::from_usize_lossy(folds);
    let scores: Vec<T> = losses.chunks(folds).map(|c| c.iter().copied().sum::<T>() / denom).collect();
    let mut index = 0;
    for (g, &s) in scores.iter().enumerate() {
        if s < scores[index] {
            index = g;
        }
    }
    Ok(CvSelection {
        gamma1: grid[index].0,
        gamma2: grid[index].1,
        index,
        scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    fn strong_signal(seed: u64, n: usize) -> (Array2<f64>, Array2<f64>, GroupStructure) {
        let mut rng = rng_from_seed(seed);
        let x = Array2::from_shape_fn((n, 4), |_| rng.random_range(0..3) as f64);
        let w = ndarray::array![[1.5, -1.0], [0.0, 0.0], [0.8, 0.5], [0.0, 0.0]];
        let noise = Array2::from_shape_fn((n, 2), |_| 0.3 * f64::standard_normal(&mut rng));
        (x.clone(), x.dot(&w) + noise, GroupStructure::contiguous(&[2, 2]).unwrap())
    }

    #[test]
    fn folds_are_balanced() {
        let (x, y, _) = strong_signal(1, 23);
        let f = assign_folds(x.view(), y.view(), 5, 9).unwrap();
        let mut counts = [0; 5];
        for &k in &f {
            counts[k] += 1;
        }
        assert!(counts.iter().all(|&c| c == 4 || c == 5), "{counts:?}");
        assert!(assign_folds(x.view(), y.view(), 30, 9).is_err());
    }

    #[test]
    fn singleton_grid_returns_its_pair() {
        let (x, y, g) = strong_signal(2, 30);
        let sel = cv_select(x.view(), y.view(), &g, &[(3.0, 4.0)], 5, 1, &WangOptions::default()).unwrap();
        assert_eq!((sel.gamma1, sel.gamma2, sel.index), (3.0, 4.0, 0));
    }

    #[test]
    fn strong_signal_beats_heaviest_penalty() {
        let (x, y, g) = strong_signal(3, 60);
        let grid = [(0.1, 0.1), (1.0, 1.0), (10.0, 10.0), (1e4, 1e4)];
        let sel = cv_select(x.view(), y.view(), &g, &grid, 5, 2, &WangOptions::default()).unwrap();
        assert!(sel.scores[sel.index] <= sel.scores[3]);
        assert_ne!(sel.index, 3);
    }

    #[test]
    fn subject_order_does_not_matter() {
        let (x, y, g) = strong_signal(4, 40);
        let grid = [(0.5, 0.5), (5.0, 1.0), (50.0, 5.0)];
        let a = cv_select(x.view(), y.view(), &g, &grid, 5, 7, &WangOptions::default()).unwrap();
        let perm: Vec<usize> = (0..40).rev().collect();
        let xp = x.select(Axis(0), &perm);
        let yp = y.select(Axis(0), &perm);
        let fa = assign_folds(x.view(), y.view(), 5, 7).unwrap();
        let fb = assign_folds(xp.view(), yp.view(), 5, 7).unwrap();
        for (i, &p) in perm.iter().enumerate() {
            assert_eq!(fb[i], fa[p]);
        }
        let b = cv_select(xp.view(), yp.view(), &g, &grid, 5, 7, &WangOptions::default()).unwrap();
        assert_eq!(a.index, b.index);
    }
}
