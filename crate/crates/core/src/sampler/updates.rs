//! Full conditional distributions of the blocked Gibbs sampler.
//!
//! Each `*_conditional` function returns the parameters of a full
//! conditional; the matching `update_*` function draws from it and writes the
//! draw into the state. Keeping the two apart lets tests check the
//! parameters directly.

use ndarray::{Array1, Array2, ArrayView2};
use rand::Rng;

use super::gram::GramCache;
use super::invgauss::InverseGaussian;
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{density, Dataset, GroupStructure, Hyperparams, MixingState};
use crate::scalar::Scalar;

/// Relative diagonal jitter used when a block precision fails to factor.
pub const CHOLESKY_JITTER: f64 = 1e-10;

/// Current `W`, mixing variables and the residual `R = Y − X W`.
#[derive(Debug, Clone)]
pub struct GibbsState<T> {
    pub w: Array2<T>,
    pub mixing: MixingState<T>,
    /// `Rᵀ`, `c × n`, so each phenotype's residuals are contiguous.
    residual_t: Array2<T>,
}

impl<T: Scalar> GibbsState<T> {
    pub fn new(data: &Dataset<T>, w: Array2<T>, mixing: MixingState<T>) -> Result<Self> {
        if mixing.tau2.len() != data.groups().n_groups() || mixing.omega2.len() != data.d() {
            return Err(Error::dims(
                "mixing state",
                format!("{} tau2 / {} omega2", data.groups().n_groups(), data.d()),
                format!("{} / {}", mixing.tau2.len(), mixing.omega2.len()),
            ));
        }
        mixing.validate()?;
        let residual = density::residuals(data.y(), data.x(), w.view())?;
        let residual_t = residual.reversed_axes().as_standard_layout().into_owned();
        Ok(Self { w, mixing, residual_t })
    }

    /// The `n × c` residual matrix.
    pub fn residual(&self) -> ArrayView2<'_, T> {
        self.residual_t.t()
    }

    /// Recomputes `R = Y − X W` from scratch, discarding accumulated rounding.
    pub fn refresh_residual(&mut self, data: &Dataset<T>, cache: &GramCache<T>) {
        self.residual_t.assign(&data.y().t());
        linalg::sub_row_combinations(self.residual_t.view_mut(), cache.xt(), self.w.view());
    }

    pub fn rss(&self) -> T {
        self.residual_t.iter().map(|&r| r * r).sum()
    }

    fn row_sq(&self, i: usize) -> T {
        self.w.row(i).iter().map(|&v| v * v).sum()
    }

    fn block_sq(&self, groups: &GroupStructure, k: usize) -> T {
        groups.members(k).iter().map(|&i| self.row_sq(i)).sum()
    }
}

/// Shape and scale `(a*, b*)` of the inverse-Gamma conditional of `σ²`.
pub fn sigma2_conditional<T: Scalar>(
    state: &GibbsState<T>,
    data: &Dataset<T>,
    hyper: &Hyperparams<T>,
) -> (T, T) {
    let half = T::lit(0.5);
    let (n, d, c) = (data.n(), data.d(), data.c());
    let shape = half * T::from_usize_lossy(c) * T::from_usize_lossy(n + d) + hyper.a_sigma;
    let groups = data.groups();
    let penalty: T = (0..d)
        .map(|i| state.mixing.row_precision(groups, i) * state.row_sq(i))
        .sum();
    let scale = half * state.rss() + half * penalty + hyper.b_sigma;
    (shape, scale)
}

pub fn update_sigma2<T: Scalar, R: Rng + ?Sized>(
    state: &mut GibbsState<T>,
    data: &Dataset<T>,
    hyper: &Hyperparams<T>,
    rng: &mut R,
) -> Result<T> {
    let (shape, scale) = sigma2_conditional(state, data, hyper);
    let g = T::sample_gamma(shape, T::one(), rng)
        .ok_or_else(|| Error::Numerical(format!("invalid sigma2 conditional shape {shape}")))?;
    let sigma2 = scale / g;
    if !(sigma2 > T::zero() && sigma2.is_finite()) {
        return Err(Error::Numerical(format!("sigma2 draw {sigma2} (b* = {scale})")));
    }
    state.mixing.sigma2 = sigma2;
    Ok(sigma2)
}

fn mixing_conditional<T: Scalar>(lambda_sq: T, sigma2: T, norm_sq: T, floor: T) -> Result<InverseGaussian<T>> {
    let norm_sq = norm_sq.max(floor);
    InverseGaussian::new((lambda_sq * sigma2 / norm_sq).sqrt(), lambda_sq)
}

/// Inverse-Gaussian conditional of `1/τ²_k`.
pub fn tau2_conditional<T: Scalar>(
    state: &GibbsState<T>,
    groups: &GroupStructure,
    k: usize,
    hyper: &Hyperparams<T>,
    floor: T,
) -> Result<InverseGaussian<T>> {
    mixing_conditional(hyper.lambda1_sq, state.mixing.sigma2, state.block_sq(groups, k), floor)
}

/// Inverse-Gaussian conditional of `1/ω²_i`.
pub fn omega2_conditional<T: Scalar>(
    state: &GibbsState<T>,
    i: usize,
    hyper: &Hyperparams<T>,
    floor: T,
) -> Result<InverseGaussian<T>> {
    mixing_conditional(hyper.lambda2_sq, state.mixing.sigma2, state.row_sq(i), floor)
}

fn reciprocal_draw<T: Scalar, R: Rng + ?Sized>(ig: &InverseGaussian<T>, rng: &mut R, what: &str) -> Result<T> {
    let v = ig.sample(rng).recip();
    if !(v > T::zero() && v.is_finite()) {
        return Err(Error::Numerical(format!(
            "{what} draw {v} from IG(mean {}, shape {})",
            ig.mean(),
            ig.shape()
        )));
    }
    Ok(v)
}

pub fn update_tau2<T: Scalar, R: Rng + ?Sized>(
    state: &mut GibbsState<T>,
    groups: &GroupStructure,
    k: usize,
    hyper: &Hyperparams<T>,
    floor: T,
    rng: &mut R,
) -> Result<T> {
    let ig = tau2_conditional(state, groups, k, hyper, floor)?;
    let v = reciprocal_draw(&ig, rng, "tau2")?;
    state.mixing.tau2[k] = v;
    Ok(v)
}

pub fn update_omega2<T: Scalar, R: Rng + ?Sized>(
    state: &mut GibbsState<T>,
    i: usize,
    hyper: &Hyperparams<T>,
    floor: T,
    rng: &mut R,
) -> Result<T> {
    let ig = omega2_conditional(state, i, hyper, floor)?;
    let v = reciprocal_draw(&ig, rng, "omega2")?;
    state.mixing.omega2[i] = v;
    Ok(v)
}

/// Multivariate normal conditional of one coefficient block.
///
/// `vec(W^(k)ᵀ) ~ N(vec(Mᵀ), σ² (S_k + D_k)⁻¹ ⊗ I_c)` where `M` is `mean`
/// and `chol` is the lower Cholesky factor of `S_k + D_k`.
#[derive(Debug, Clone)]
pub struct BlockConditional<T> {
    pub mean: Array2<T>,
    pub chol: Array2<T>,
    pub sigma2: T,
}

impl<T: Scalar> BlockConditional<T> {
    /// Mean in `vec(W^(k)ᵀ)` order: row `r` of the block occupies entries `r·c .. r·c + c`.
    pub fn vec_mean(&self) -> Array1<T> {
        self.mean.iter().copied().collect()
    }

    /// Dense `m_k c × m_k c` covariance `σ² (S_k + D_k)⁻¹ ⊗ I_c`.
    pub fn dense_covariance(&self) -> Array2<T> {
        let (m, c) = self.mean.dim();
        let inv = linalg::cholesky_inverse(self.chol.view());
        let mut cov = Array2::zeros((m * c, m * c));
        for a in 0..m {
            for b in 0..m {
                let v = self.sigma2 * inv[[a, b]];
                for j in 0..c {
                    cov[[a * c + j, b * c + j]] = v;
                }
            }
        }
        cov
    }

    /// Draw `M + σ L⁻ᵀ Z` with `Z` standard normal, filled row-major.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Array2<T> {
        let mut z = Array2::from_shape_simple_fn(self.mean.dim(), || T::standard_normal(rng));
        linalg::back_substitute_transposed(self.chol.view(), z.view_mut());
        let sigma = self.sigma2.sqrt();
        z.mapv_inplace(|v| v * sigma);
        z + &self.mean
    }
}

/// Factor `S_k + D_k` and form `X_kᵀ (Y − X_{−k} W_{−k}) = X_kᵀ R + S_k W_k`.
fn block_system<T: Scalar>(
    state: &GibbsState<T>,
    groups: &GroupStructure,
    k: usize,
    cache: &GramCache<T>,
) -> Result<(Array2<T>, Array2<T>)> {
    let gg = cache.block(k);
    let members = groups.members(k);
    let mut precision = gg.gram.clone();
    for (r, &i) in members.iter().enumerate() {
        precision[[r, r]] += state.mixing.row_precision(groups, i);
    }
    let chol = linalg::cholesky_jittered(precision.view(), T::lit(CHOLESKY_JITTER))?;
    let mut rhs = linalg::row_inner_products(gg.x_block_t.view(), state.residual_t.view());
    let c = rhs.ncols();
    match (rhs.as_slice_mut(), state.w.as_slice()) {
        (Some(out), Some(w)) => {
            for (row, g) in out.chunks_exact_mut(c).zip(gg.gram.outer_iter()) {
                for (&i, &f) in members.iter().zip(g.iter()) {
                    row.iter_mut().zip(&w[i * c..(i + 1) * c]).for_each(|(o, &v)| *o += f * v);
                }
            }
        }
        _ => {
            for (mut row, g) in rhs.outer_iter_mut().zip(gg.gram.outer_iter()) {
                for (&i, &f) in members.iter().zip(g.iter()) {
                    row.scaled_add(f, &state.w.row(i));
                }
            }
        }
    }
    Ok((chol, rhs))
}

pub fn w_block_conditional<T: Scalar>(
    state: &GibbsState<T>,
    groups: &GroupStructure,
    k: usize,
    cache: &GramCache<T>,
) -> Result<BlockConditional<T>> {
    let (chol, rhs) = block_system(state, groups, k, cache)?;
    let mean = linalg::cholesky_solve(chol.view(), rhs.view());
    Ok(BlockConditional {
        mean,
        chol,
        sigma2: state.mixing.sigma2,
    })
}

/// Draws `W^(k)` from its conditional and updates the residual.
///
/// Uses `M + σ L⁻ᵀ Z = L⁻ᵀ (L⁻¹ b + σ Z)`, which needs one triangular solve
/// fewer than [`BlockConditional::sample`] and consumes the same normals.
pub fn update_w_block<T: Scalar, R: Rng + ?Sized>(
    state: &mut GibbsState<T>,
    groups: &GroupStructure,
    k: usize,
    cache: &GramCache<T>,
    rng: &mut R,
) -> Result<()> {
    let (chol, mut draw) = block_system(state, groups, k, cache)?;
    linalg::forward_substitute(chol.view(), draw.view_mut());
    let sigma = state.mixing.sigma2.sqrt();
    match draw.as_slice_mut() {
        Some(v) => v.iter_mut().for_each(|v| *v += sigma * T::standard_normal(rng)),
        None => draw.iter_mut().for_each(|v| *v += sigma * T::standard_normal(rng)),
    }
    linalg::back_substitute_transposed(chol.view(), draw.view_mut());
    if draw.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!("non-finite coefficient draw in group {k}")));
    }
    let members = groups.members(k);
    let mut delta = draw;
    for (r, &i) in members.iter().enumerate() {
        let mut drow = delta.row_mut(r);
        let mut wrow = state.w.row_mut(i);
        drow.iter_mut().zip(wrow.iter_mut()).for_each(|(d, w)| {
            let new = *d;
            *d = new - *w;
            *w = new;
        });
    }
    linalg::sub_row_combinations(state.residual_t.view_mut(), cache.block(k).x_block_t.view(), delta.view());
    Ok(())
}
