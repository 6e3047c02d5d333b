//! Penalized multi-task least squares with gene-level and SNP-level group norms.
//!
//! The solver has two stages. The first is majorize-minimize on the smoothed
//! objective, where each norm `‖v‖` is replaced by `√(‖v‖² + ε)` and
//! majorized by a quadratic at the current iterate. Every iteration is then
//! a ridge solve with per-row weights
//! `½γ₁/√(‖W^(k)‖²_F + ε) + ½γ₂/√(‖wⁱ‖² + ε)` shared by all phenotype
//! columns, and the smoothed objective never increases.
//!
//! Smoothing leaves inactive rows at tiny nonzero values, so the second
//! stage runs accelerated proximal gradient on the exact objective from the
//! majorize-minimize solution. The proximal map of the nested norms is the
//! row-wise group soft-threshold followed by the gene-wise one, which sets
//! inactive rows and genes exactly to zero.

use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::GroupStructure;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WangOptions {
    /// Relative change `‖ΔW‖_F / max(‖W‖_F, 1)` below which a stage stops.
    pub tol: f64,
    pub max_iter: usize,
    /// Smoothing constant inside each norm.
    pub epsilon: f64,
    /// Iteration cap of the proximal polish; zero disables it.
    pub polish_iter: usize,
}

impl Default for WangOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 1000,
            epsilon: 1e-10,
            polish_iter: 2000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct WangFit<T> {
    pub w: Array2<T>,
    pub converged: bool,
    pub mm_iterations: usize,
    pub polish_iterations: usize,
    /// Smoothed objective after each majorize-minimize iteration (index 0 is the start).
    pub smoothed_trace: Vec<T>,
    /// Exact objective at the returned estimate.
    pub objective: T,
}

/// Sufficient statistics `XᵀX`, `XᵀY`, `‖Y‖²_F` of one least-squares problem.
#[derive(Debug, Clone)]
pub struct WangProblem<T> {
    xtx: Array2<T>,
    xty: Array2<T>,
    yty: T,
    groups: GroupStructure,
}

impl<T: Scalar> WangProblem<T> {
    pub fn new(x: ArrayView2<'_, T>, y: ArrayView2<'_, T>, groups: &GroupStructure) -> Result<Self> {
        if x.nrows() != y.nrows() || groups.n_snps() != x.ncols() {
            return Err(Error::dims(
                "penalized fit",
                format!("X n×{} and Y n×c", groups.n_snps()),
                format!("X {:?}, Y {:?}", x.dim(), y.dim()),
            ));
        }
        Ok(Self {
            xtx: x.t().dot(&x),
            xty: x.t().dot(&y),
            yty: y.iter().map(|&v| v * v).sum(),
            groups: groups.clone(),
        })
    }

    /// `‖Y − XW‖²_F` through the Gram form.
    pub fn rss(&self, w: ArrayView2<'_, T>) -> T {
        let two = T::lit(2.0);
        let cross: T = (&w * &self.xty).sum();
        let quad: T = (&w * &self.xtx.dot(&w)).sum();
        (self.yty - two * cross + quad).max(T::zero())
    }

    fn row_sq(w: ArrayView2<'_, T>) -> Vec<T> {
        w.axis_iter(Axis(0)).map(|r| r.iter().map(|&v| v * v).sum()).collect()
    }

    fn penalty(&self, w: ArrayView2<'_, T>, g1: T, g2: T, eps: T) -> T {
        let rs = Self::row_sq(w);
        let gene: T = self
            .groups
            .iter()
            .map(|m| (m.iter().map(|&i| rs[i]).sum::<T>() + eps).sqrt())
            .sum();
        let row: T = rs.iter().map(|&s| (s + eps).sqrt()).sum();
        g1 * gene + g2 * row
    }

    pub fn smoothed_objective(&self, w: ArrayView2<'_, T>, g1: T, g2: T, eps: T) -> T {
        self.rss(w) + self.penalty(w, g1, g2, eps)
    }

    pub fn objective(&self, w: ArrayView2<'_, T>, g1: T, g2: T) -> T {
        self.rss(w) + self.penalty(w, g1, g2, T::zero())
    }

    fn mm_weights(&self, w: ArrayView2<'_, T>, g1: T, g2: T, eps: T) -> Vec<T> {
        let half = T::lit(0.5);
        let rs = Self::row_sq(w);
        let mut weights = vec![T::zero(); rs.len()];
        for members in self.groups.iter() {
            let gene = (members.iter().map(|&i| rs[i]).sum::<T>() + eps).sqrt();
            for &i in members {
                weights[i] = half * g1 / gene + half * g2 / (rs[i] + eps).sqrt();
            }
        }
        weights
    }

    fn ridge_solve(&self, weights: &[T]) -> Result<Array2<T>> {
        let mut a = self.xtx.clone();
        for (i, &v) in weights.iter().enumerate() {
            a[[i, i]] += v;
        }
        let l = linalg::cholesky_jittered(a.view(), T::lit(1e-12))?;
        Ok(linalg::cholesky_solve(l.view(), self.xty.view()))
    }

    fn prox(&self, v: &mut Array2<T>, t1: T, t2: T) {
        for mut row in v.axis_iter_mut(Axis(0)) {
            let norm = row.iter().map(|&x| x * x).sum::<T>().sqrt();
            let scale = if norm > t2 { T::one() - t2 / norm } else { T::zero() };
            row.mapv_inplace(|x| x * scale);
        }
        for members in self.groups.iter() {
            let norm = members
                .iter()
                .map(|&i| v.row(i).iter().map(|&x| x * x).sum::<T>())
                .sum::<T>()
                .sqrt();
            let scale = if norm > t1 { T::one() - t1 / norm } else { T::zero() };
            for &i in members {
                v.row_mut(i).mapv_inplace(|x| x * scale);
            }
        }
    }

    pub fn solve(&self, gamma1: T, gamma2: T, opts: &WangOptions) -> Result<WangFit<T>> {
        if gamma1 < T::zero() || gamma2 < T::zero() || !gamma1.is_finite() || !gamma2.is_finite() {
            return Err(Error::Domain(format!(
                "penalty weights must be finite and nonnegative (got {gamma1}, {gamma2})"
            )));
        }
        let eps = T::lit(opts.epsilon);
        let tol = T::lit(opts.tol);
        let d = self.xtx.nrows();
        let scale = |w: &Array2<T>| w.iter().map(|&v| v * v).sum::<T>().sqrt().max(T::one());

        let trace = self.xtx.diag().sum();
        let ridge = (T::lit(0.5) * (gamma1 + gamma2))
            .max(T::lit(1e-8) * (trace / T::from_usize_lossy(d.max(1)) + T::one()));
        let mut w = self.ridge_solve(&vec![ridge; d])?;
        let mut f = self.smoothed_objective(w.view(), gamma1, gamma2, eps);
        let mut smoothed_trace = vec![f];
        let mut mm_converged = false;
        let mut mm_iterations = 0;
        for _ in 0..opts.max_iter {
            mm_iterations += 1;
            let weights = self.mm_weights(w.view(), gamma1, gamma2, eps);
            let next = self.ridge_solve(&weights)?;
            let f_next = self.smoothed_objective(next.view(), gamma1, gamma2, eps);
            debug_assert!(
                f_next <= f + T::lit(1e-10) * f.abs().max(T::one()),
                "majorize-minimize step increased the smoothed objective: {f} -> {f_next}"
            );
            let change = (&next - &w).iter().map(|&v| v * v).sum::<T>().sqrt();
            let denom = scale(&next);
            w = next;
            f = f_next;
            smoothed_trace.push(f);
            if change <= tol * denom {
                mm_converged = true;
                break;
            }
        }

        let mut converged = mm_converged;
        let mut polish_iterations = 0;
        if opts.polish_iter > 0 {
            let (w_p, iters, ok) = self.polish(w, gamma1, gamma2, opts)?;
            w = w_p;
            polish_iterations = iters;
            converged = ok;
        }
        let objective = self.objective(w.view(), gamma1, gamma2);
        Ok(WangFit {
            w,
            converged,
            mm_iterations,
            polish_iterations,
            smoothed_trace,
            objective,
        })
    }

    /// Proximal gradient with momentum and function-value restart.
    fn polish(&self, w0: Array2<T>, g1: T, g2: T, opts: &WangOptions) -> Result<(Array2<T>, usize, bool)> {
        let two = T::lit(2.0);
        let lip = two * linalg::max_eigenvalue_psd(self.xtx.view(), 100) * T::lit(1.01);
        if !(lip > T::zero()) {
            // X = 0: the penalty alone decides and its minimizer is zero
            let zero = Array2::zeros(w0.dim());
            return Ok((if g1 + g2 > T::zero() { zero } else { w0 }, 0, true));
        }
        let step = lip.recip();
        let tol = T::lit(opts.tol);
        let mut x = w0.clone();
        let mut z = w0;
        let mut t = T::one();
        let mut f_prev = self.objective(x.view(), g1, g2);
        for it in 1..=opts.polish_iter {
            let grad = (self.xtx.dot(&z) - &self.xty) * two;
            let mut next = &z - &(grad * step);
            self.prox(&mut next, step * g1, step * g2);
            let f_next = self.objective(next.view(), g1, g2);
            let change = (&next - &x).iter().map(|&v| v * v).sum::<T>().sqrt();
            let denom = next.iter().map(|&v| v * v).sum::<T>().sqrt().max(T::one());
            if f_next > f_prev {
                // restart momentum from the last accepted point
                t = T::one();
                z = x.clone();
                continue;
            }
            let t_next = (T::one() + (T::one() + T::lit(4.0) * t * t).sqrt()) / two;
            z = &next + &((&next - &x) * ((t - T::one()) / t_next));
            x = next;
            t = t_next;
            f_prev = f_next;
            if change <= tol * denom {
                return Ok((x, it, true));
            }
        }
        Ok((x, opts.polish_iter, false))
    }
}

/// Penalized estimate `argmin_W ‖Y − XW‖²_F + γ₁‖W‖_{G₂,₁} + γ₂‖W‖_{ℓ₂,₁}`.
///
/// Hitting the iteration cap is not an error: the current iterate is
/// returned with `converged = false`.
pub fn fit_wang<T: Scalar>(
    x: ArrayView2<'_, T>,
    y: ArrayView2<'_, T>,
    groups: &GroupStructure,
    gamma1: T,
    gamma2: T,
    opts: &WangOptions,
) -> Result<WangFit<T>> {
    WangProblem::new(x, y, groups)?.solve(gamma1, gamma2, opts)
}
