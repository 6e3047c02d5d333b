//! Reference implementations used as test oracles. Everything here is
//! written independently of the library internals: plain loops, dense
//! matrices and textbook algorithms.

#![allow(dead_code)]

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use gsmtr::GroupStructure;

pub fn oracle_rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Genotype-like design: entries uniform on {0, 1, 2}.
pub fn random_genotypes(n: usize, d: usize, rng: &mut impl Rng) -> Array2<f64> {
    Array2::from_shape_fn((n, d), |_| rng.random_range(0..3) as f64)
}

pub fn random_matrix(rows: usize, cols: usize, scale: f64, rng: &mut impl Rng) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| scale * normal(rng))
}

// ---------------------------------------------------------------------------
// Dense linear algebra

/// Inverse by Gauss-Jordan elimination with partial pivoting.
pub fn gauss_jordan_inverse(a: &Array2<f64>) -> Array2<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    let mut inv = Array2::<f64>::eye(n);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[[i, col]].abs().total_cmp(&m[[j, col]].abs()))
            .unwrap();
        assert!(m[[pivot, col]].abs() > 1e-300, "singular matrix");
        for j in 0..n {
            m.swap([col, j], [pivot, j]);
            inv.swap([col, j], [pivot, j]);
        }
        let p = m[[col, col]];
        for j in 0..n {
            m[[col, j]] /= p;
            inv[[col, j]] /= p;
        }
        for i in 0..n {
            if i != col {
                let f = m[[i, col]];
                if f != 0.0 {
                    for j in 0..n {
                        m[[i, j]] -= f * m[[col, j]];
                        inv[[i, j]] -= f * inv[[col, j]];
                    }
                }
            }
        }
    }
    inv
}

pub fn kron(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    Array2::from_shape_fn((ar * br, ac * bc), |(i, j)| a[[i / br, j / bc]] * b[[i % br, j % bc]])
}

/// Mean and covariance of `vec(W^(k)ᵀ)` given everything else, built
/// literally as `A_k = Σ_ℓ (x_ℓ^(k) ⊗ I_c)(x_ℓ^(k)ᵀ ⊗ I_c) + Diag{1/τ²_k + 1/ω²_i} ⊗ I_c`,
/// `Σ_k = σ² A_k⁻¹`, `μ_k = A_k⁻¹ Σ_ℓ (x_ℓ^(k) ⊗ I_c)(y_ℓ − W^(−k)ᵀ x_ℓ^(−k))`.
pub fn dense_block_conditional(
    x: &Array2<f64>,
    y: &Array2<f64>,
    w: &Array2<f64>,
    groups: &GroupStructure,
    k: usize,
    tau2: &[f64],
    omega2: &[f64],
    sigma2: f64,
) -> (Array1<f64>, Array2<f64>) {
    let members = groups.members(k);
    let (n, c) = y.dim();
    let m = members.len();
    let eye = Array2::<f64>::eye(c);
    let mut a = Array2::<f64>::zeros((m * c, m * c));
    let mut rhs = Array2::<f64>::zeros((m * c, 1));
    for l in 0..n {
        let xk = Array2::from_shape_fn((m, 1), |(r, _)| x[[l, members[r]]]);
        let left = kron(&xk, &eye);
        a = a + left.dot(&left.t());
        let mut r = Array2::<f64>::zeros((c, 1));
        for j in 0..c {
            let mut v = y[[l, j]];
            for i in 0..x.ncols() {
                if !members.contains(&i) {
                    v -= w[[i, j]] * x[[l, i]];
                }
            }
            r[[j, 0]] = v;
        }
        rhs = rhs + left.dot(&r);
    }
    let diag = Array2::from_shape_fn((m, m), |(p, q)| {
        if p == q {
            1.0 / tau2[k] + 1.0 / omega2[members[p]]
        } else {
            0.0
        }
    });
    a = a + kron(&diag, &eye);
    let inv = gauss_jordan_inverse(&a);
    let mean = inv.dot(&rhs).column(0).to_owned();
    (mean, inv * sigma2)
}

// ---------------------------------------------------------------------------
// Densities and distribution checks

pub fn inverse_gaussian_density(x: f64, mu: f64, lambda: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    (lambda / (2.0 * std::f64::consts::PI * x.powi(3))).sqrt()
        * (-lambda * (x - mu).powi(2) / (2.0 * mu * mu * x)).exp()
}

pub fn inverse_gamma_density(x: f64, shape: f64, scale: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    (shape * scale.ln() - statrs::function::gamma::ln_gamma(shape) - (shape + 1.0) * x.ln() - scale / x).exp()
}

fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels + panels % 2;
    let h = (b - a) / panels as f64;
    let mut s = f(a) + f(b);
    for i in 1..panels {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Kolmogorov distance between the empirical CDF of `draws` and the CDF
/// obtained by integrating `density` from `support_start` with Simpson's
/// rule between consecutive order statistics.
pub fn ks_distance_by_quadrature(draws: &[f64], density: impl Fn(f64) -> f64, support_start: f64) -> f64 {
    let mut sorted = draws.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut cdf = simpson(&density, support_start, sorted[0], 2000);
    let mut worst: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        if i > 0 {
            cdf += simpson(&density, sorted[i - 1], x, 8);
        }
        worst = worst.max((cdf - i as f64 / n).abs()).max((cdf - (i + 1) as f64 / n).abs());
    }
    worst
}

pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v)
}

// ---------------------------------------------------------------------------
// Monte Carlo error by batch means

/// Posterior mean and standard deviation of one scalar trace together with
/// their Monte Carlo standard errors from non-overlapping batches.
#[derive(Debug, Clone, Copy)]
pub struct TraceSummary {
    pub mean: f64,
    pub mean_se: f64,
    pub sd: f64,
    pub sd_se: f64,
}

pub fn batch_summary(trace: &[f64], batches: usize) -> TraceSummary {
    let size = trace.len() / batches;
    let used = &trace[..size * batches];
    let (mean, var) = mean_var(used);
    let mut bmeans = Vec::with_capacity(batches);
    let mut bsds = Vec::with_capacity(batches);
    for b in used.chunks(size) {
        let (m, v) = mean_var(b);
        bmeans.push(m);
        bsds.push(v.sqrt());
    }
    let (_, vm) = mean_var(&bmeans);
    let (_, vs) = mean_var(&bsds);
    TraceSummary {
        mean,
        mean_se: (vm / batches as f64).sqrt(),
        sd: var.sqrt(),
        sd_se: (vs / batches as f64).sqrt(),
    }
}

// ---------------------------------------------------------------------------
// Random-walk Metropolis on the collapsed posterior

/// `log p(W, σ² | Y)` up to a constant, with no auxiliary variables:
/// Gaussian likelihood, the group-norm prior kernel of `W` given `σ`
/// together with its `σ^{−dc}` scale factor, and an inverse-Gamma prior
/// on `σ²`.
pub struct CollapsedPosterior {
    pub x: Array2<f64>,
    pub y: Array2<f64>,
    pub groups: GroupStructure,
    pub lambda1: f64,
    pub lambda2: f64,
    pub a_sigma: f64,
    pub b_sigma: f64,
}

impl CollapsedPosterior {
    pub fn dim(&self) -> usize {
        self.x.ncols() * self.y.ncols() + 1
    }

    /// Parameters are `vec(W)` row-major followed by `log σ²`; the
    /// Jacobian of the log transform is included.
    pub fn log_density(&self, theta: &[f64]) -> f64 {
        let (n, d) = self.x.dim();
        let c = self.y.ncols();
        let log_s2 = theta[d * c];
        let s2 = log_s2.exp();
        let sigma = s2.sqrt();
        let mut rss = 0.0;
        for l in 0..n {
            for j in 0..c {
                let mut fit = 0.0;
                for i in 0..d {
                    fit += self.x[[l, i]] * theta[i * c + j];
                }
                rss += (self.y[[l, j]] - fit).powi(2);
            }
        }
        let mut g21 = 0.0;
        for members in self.groups.iter() {
            let mut s = 0.0;
            for &i in members {
                for j in 0..c {
                    s += theta[i * c + j].powi(2);
                }
            }
            g21 += s.sqrt();
        }
        let mut l21 = 0.0;
        for i in 0..d {
            l21 += (0..c).map(|j| theta[i * c + j].powi(2)).sum::<f64>().sqrt();
        }
        let (nf, df, cf) = (n as f64, d as f64, c as f64);
        -0.5 * nf * cf * log_s2 - rss / (2.0 * s2) - 0.5 * df * cf * log_s2
            - (self.lambda1 * g21 + self.lambda2 * l21) / sigma
            - (self.a_sigma + 1.0) * log_s2
            - self.b_sigma / s2
            + log_s2
    }
}

fn cholesky_lower(a: &Array2<f64>) -> Array2<f64> {
    let n = a.nrows();
    let mut l = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[[i, k]] * l[[j, k]]).sum();
            if i == j {
                l[[i, i]] = (a[[i, i]] - s).max(1e-300).sqrt();
            } else {
                l[[i, j]] = (a[[i, j]] - s) / l[[j, j]];
            }
        }
    }
    l
}

pub struct MetropolisRun {
    /// One trace per parameter, `σ²` last (on its natural scale).
    pub traces: Vec<Vec<f64>>,
    pub acceptance: f64,
}

/// Random-walk Metropolis with a Gaussian proposal whose covariance is
/// learned in pilot rounds and then frozen for the recorded run.
pub fn random_walk_metropolis(
    post: &CollapsedPosterior,
    start: &[f64],
    iterations: usize,
    seed: u64,
) -> MetropolisRun {
    let p = post.dim();
    let mut rng = oracle_rng(seed);
    let mut theta = start.to_vec();
    let mut logp = post.log_density(&theta);
    let mut chol = Array2::<f64>::eye(p) * 0.05;
    let scale = 2.38 / (p as f64).sqrt();

    let step = |theta: &mut Vec<f64>, logp: &mut f64, chol: &Array2<f64>, rng: &mut ChaCha20Rng| -> bool {
        let z: Vec<f64> = (0..p).map(|_| normal(rng)).collect();
        let prop: Vec<f64> = (0..p)
            .map(|i| theta[i] + scale * (0..=i).map(|k| chol[[i, k]] * z[k]).sum::<f64>())
            .collect();
        let lp = post.log_density(&prop);
        if rng.random::<f64>().ln() < lp - *logp {
            *theta = prop;
            *logp = lp;
            true
        } else {
            false
        }
    };

    for round in 0..6 {
        let len = 20_000 * (round + 1);
        let mut samples = Vec::with_capacity(len);
        for _ in 0..len {
            step(&mut theta, &mut logp, &chol, &mut rng);
            samples.push(theta.clone());
        }
        let half = &samples[len / 2..];
        let m: Vec<f64> = (0..p).map(|i| half.iter().map(|s| s[i]).sum::<f64>() / half.len() as f64).collect();
        let cov = Array2::from_shape_fn((p, p), |(i, j)| {
            half.iter().map(|s| (s[i] - m[i]) * (s[j] - m[j])).sum::<f64>() / (half.len() - 1) as f64
        });
        chol = cholesky_lower(&(cov + Array2::<f64>::eye(p) * 1e-10));
    }

    let mut traces = vec![Vec::with_capacity(iterations); p];
    let mut accepted = 0usize;
    for _ in 0..iterations {
        if step(&mut theta, &mut logp, &chol, &mut rng) {
            accepted += 1;
        }
        for i in 0..p - 1 {
            traces[i].push(theta[i]);
        }
        traces[p - 1].push(theta[p - 1].exp());
    }
    MetropolisRun {
        traces,
        acceptance: accepted as f64 / iterations as f64,
    }
}
