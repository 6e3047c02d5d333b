//! Dense symmetric positive-definite routines on small matrices, plus
//! tall-skinny products used in the sampler's inner loop.

use ndarray::{Array2, ArrayView2, ArrayViewMut2};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `a bᵀ` for `a: m × n`, `b: c × n`: all pairwise inner products of rows.
///
/// The sampler keeps subject-indexed arrays with subjects along rows so that
/// every inner loop runs over the long `n` axis. General matrix
/// multiplication repacks its operands on every call, which dominates when
/// `m` and `c` are small.
pub fn row_inner_products<T: Scalar>(a: ArrayView2<'_, T>, b: ArrayView2<'_, T>) -> Array2<T> {
    assert_eq!(a.ncols(), b.ncols(), "row_inner_products: length mismatch");
    let n = a.ncols();
    if n == 0 {
        return Array2::zeros((a.nrows(), b.nrows()));
    }
    if let (Some(av), Some(bv)) = (a.as_slice(), b.as_slice()) {
        let mut out = Vec::with_capacity(a.nrows() * b.nrows());
        for u in av.chunks_exact(n) {
            out.extend(bv.chunks_exact(n).map(|v| dot_slices(u, v)));
        }
        return Array2::from_shape_vec((a.nrows(), b.nrows()), out).expect("row_inner_products shape");
    }
    Array2::from_shape_fn((a.nrows(), b.nrows()), |(r, j)| {
        let (u, v) = (a.row(r), b.row(j));
        match (u.as_slice(), v.as_slice()) {
            (Some(u), Some(v)) => dot_slices(u, v),
            _ => u.dot(&v),
        }
    })
}

/// `out -= coefᵀ a` for `out: c × n`, `a: m × n`, `coef: m × c`.
pub fn sub_row_combinations<T: Scalar>(mut out: ArrayViewMut2<'_, T>, a: ArrayView2<'_, T>, coef: ArrayView2<'_, T>) {
    assert_eq!(out.ncols(), a.ncols(), "sub_row_combinations: length mismatch");
    assert_eq!(coef.dim(), (a.nrows(), out.nrows()), "sub_row_combinations: coefficient shape");
    for (j, mut orow) in out.outer_iter_mut().enumerate() {
        for (r, arow) in a.outer_iter().enumerate() {
            let x = coef[[r, j]];
            if x == T::zero() {
                continue;
            }
            match (orow.as_slice_mut(), arow.as_slice()) {
                (Some(o), Some(u)) => o.iter_mut().zip(u).for_each(|(o, &u)| *o -= x * u),
                _ => orow.scaled_add(-x, &arow),
            }
        }
    }
}

fn dot_slices<T: Scalar>(u: &[T], v: &[T]) -> T {
    let mut acc = [T::zero(); 4];
    let (uc, vc) = (u.chunks_exact(4), v.chunks_exact(4));
    let tail: T = uc.remainder().iter().zip(vc.remainder()).map(|(&a, &b)| a * b).sum();
    for (a, b) in uc.zip(vc) {
        for t in 0..4 {
            acc[t] += a[t] * b[t];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Lower Cholesky factor `L` with `a = L Lᵀ`.
pub fn cholesky<T: Scalar>(a: ArrayView2<'_, T>) -> Result<Array2<T>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::dims("cholesky", "square matrix", format!("{:?}", a.dim())));
    }
    let mut l = vec![T::zero(); n * n];
    for j in 0..n {
        let row_j = &mut l[j * n..(j + 1) * n];
        let diag = a[[j, j]] - row_j[..j].iter().map(|&v| v * v).sum::<T>();
        if !(diag > T::zero()) || !diag.is_finite() {
            return Err(Error::Numerical(format!(
                "matrix not positive definite at pivot {j}"
            )));
        }
        let ljj = diag.sqrt();
        row_j[j] = ljj;
        for i in (j + 1)..n {
            let (head, tail) = l.split_at_mut(i * n);
            let row_j = &head[j * n..j * n + j];
            let row_i = &mut tail[..n];
            let s = a[[i, j]] - row_i[..j].iter().zip(row_j).map(|(&u, &v)| u * v).sum::<T>();
            row_i[j] = s / ljj;
        }
    }
    Ok(Array2::from_shape_vec((n, n), l).expect("cholesky shape"))
}

/// Cholesky with a single retry after adding `rel_jitter * trace` to the diagonal.
pub fn cholesky_jittered<T: Scalar>(a: ArrayView2<'_, T>, rel_jitter: T) -> Result<Array2<T>> {
    match cholesky(a) {
        Ok(l) => Ok(l),
        Err(Error::Numerical(msg)) => {
            let trace = a.diag().iter().copied().sum::<T>();
            let jitter = rel_jitter * trace.abs().max(T::one());
            log::warn!("cholesky failed ({msg}); retrying with jitter {jitter}");
            let mut b = a.to_owned();
            b.diag_mut().mapv_inplace(|v| v + jitter);
            cholesky(b.view())
        }
        Err(e) => Err(e),
    }
}

/// Solves `L X = B` in place for lower-triangular `L`.
pub fn forward_substitute<T: Scalar>(l: ArrayView2<'_, T>, mut b: ArrayViewMut2<'_, T>) {
    let n = l.nrows();
    let c = b.ncols();
    if let (Some(lv), Some(bv)) = (l.as_slice(), b.as_slice_mut()) {
        for i in 0..n {
            let (solved, rest) = bv.split_at_mut(i * c);
            let row = &mut rest[..c];
            for k in 0..i {
                let f = lv[i * n + k];
                row.iter_mut().zip(&solved[k * c..(k + 1) * c]).for_each(|(r, &v)| *r -= f * v);
            }
            let inv = lv[i * n + i].recip();
            row.iter_mut().for_each(|r| *r *= inv);
        }
        return;
    }
    for col in 0..c {
        for i in 0..n {
            let mut s = b[[i, col]];
            for k in 0..i {
                s -= l[[i, k]] * b[[k, col]];
            }
            b[[i, col]] = s / l[[i, i]];
        }
    }
}

/// Solves `Lᵀ X = B` in place for lower-triangular `L`.
pub fn back_substitute_transposed<T: Scalar>(l: ArrayView2<'_, T>, mut b: ArrayViewMut2<'_, T>) {
    let n = l.nrows();
    let c = b.ncols();
    if let (Some(lv), Some(bv)) = (l.as_slice(), b.as_slice_mut()) {
        for i in (0..n).rev() {
            let (head, solved) = bv.split_at_mut((i + 1) * c);
            let row = &mut head[i * c..];
            for k in (i + 1)..n {
                let f = lv[k * n + i];
                let off = (k - i - 1) * c;
                row.iter_mut().zip(&solved[off..off + c]).for_each(|(r, &v)| *r -= f * v);
            }
            let inv = lv[i * n + i].recip();
            row.iter_mut().for_each(|r| *r *= inv);
        }
        return;
    }
    for col in 0..c {
        for i in (0..n).rev() {
            let mut s = b[[i, col]];
            for k in (i + 1)..n {
                s -= l[[k, i]] * b[[k, col]];
            }
            b[[i, col]] = s / l[[i, i]];
        }
    }
}

/// Solves `A X = B` given the lower Cholesky factor of `A`.
pub fn cholesky_solve<T: Scalar>(l: ArrayView2<'_, T>, b: ArrayView2<'_, T>) -> Array2<T> {
    let mut x = b.to_owned();
    forward_substitute(l, x.view_mut());
    back_substitute_transposed(l, x.view_mut());
    x
}

/// Inverse of `A` from its lower Cholesky factor.
pub fn cholesky_inverse<T: Scalar>(l: ArrayView2<'_, T>) -> Array2<T> {
    cholesky_solve(l, Array2::<T>::eye(l.nrows()).view())
}

/// Largest eigenvalue of a symmetric positive semidefinite matrix by power iteration.
pub fn max_eigenvalue_psd<T: Scalar>(a: ArrayView2<'_, T>, iters: usize) -> T {
    let n = a.nrows();
    if n == 0 {
        return T::zero();
    }
    let mut v = ndarray::Array1::<T>::from_elem(n, T::one() / T::from_usize_lossy(n).sqrt());
    let mut lambda = T::zero();
    for _ in 0..iters {
        let w = a.dot(&v);
        let norm = w.dot(&w).sqrt();
        if norm == T::zero() {
            return T::zero();
        }
        lambda = v.dot(&w);
        v = w / norm;
    }
    // Rayleigh quotient can undershoot slightly before convergence.
    lambda.max(a.dot(&v).dot(&v))
}
