//! Small dense linear-algebra kernels: symmetric eigendecomposition
//! (Householder tridiagonalisation followed by implicit QL) and Bessel
//! function sequences for polynomial propagators.
//!
//! The QL routines follow the public-domain EISPACK `tred2`/`tql2` pair.

use crate::error::{MagnonError, Result};
use crate::scalar::Real;

/// Eigen-decomposition of a real symmetric matrix.
///
/// `vectors` is row-major with one eigenvector per row, matching the
/// ascending order of `values`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen<T> {
    pub values: Vec<T>,
    pub vectors: Vec<T>,
    pub dim: usize,
}

impl<T: Real> SymmetricEigen<T> {
    pub fn vector(&self, k: usize) -> &[T] {
        &self.vectors[k * self.dim..(k + 1) * self.dim]
    }
}

const MAX_QL_ITERATIONS: usize = 60;

/// Eigenpairs of the symmetric tridiagonal matrix with diagonal `diag` and
/// first off-diagonal `off` (`off.len() == diag.len() - 1`).
pub fn tridiagonal_eigen<T: Real>(diag: &[T], off: &[T]) -> Result<SymmetricEigen<T>> {
    let n = diag.len();
    if n == 0 {
        return Err(MagnonError::Validation("empty tridiagonal matrix".into()));
    }
    if off.len() + 1 != n {
        return Err(MagnonError::DimensionMismatch {
            expected: n - 1,
            found: off.len(),
        });
    }
    let mut d = diag.to_vec();
    // tql2 expects the sub-diagonal shifted by one.
    let mut e = vec![T::zero(); n];
    e[1..].copy_from_slice(off);
    let mut w = identity::<T>(n);
    tql2(&mut d, &mut e, &mut w, n)?;
    Ok(sort_pairs(d, w, n))
}

/// Eigenpairs of a dense symmetric matrix given row-major.
pub fn symmetric_eigen<T: Real>(matrix: &[T], n: usize) -> Result<SymmetricEigen<T>> {
    if matrix.len() != n * n {
        return Err(MagnonError::DimensionMismatch {
            expected: n * n,
            found: matrix.len(),
        });
    }
    if n == 0 {
        return Err(MagnonError::Validation("empty matrix".into()));
    }
    let mut v = matrix.to_vec();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tred2(&mut v, &mut d, &mut e, n);
    // tql2 works on rows; transpose so each row is a column of V.
    let mut w = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            w[j * n + i] = v[i * n + j];
        }
    }
    tql2(&mut d, &mut e, &mut w, n)?;
    Ok(sort_pairs(d, w, n))
}

fn identity<T: Real>(n: usize) -> Vec<T> {
    let mut w = vec![T::zero(); n * n];
    for i in 0..n {
        w[i * n + i] = T::one();
    }
    w
}

fn sort_pairs<T: Real>(d: Vec<T>, w: Vec<T>, n: usize) -> SymmetricEigen<T> {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap_or(std::cmp::Ordering::Equal));
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n * n);
    for &k in &order {
        values.push(d[k]);
        vectors.extend_from_slice(&w[k * n..(k + 1) * n]);
    }
    SymmetricEigen {
        values,
        vectors,
        dim: n,
    }
}

/// Householder reduction to tridiagonal form. On exit `v` holds the
/// accumulated orthogonal transform, `d` the diagonal and `e[1..]` the
/// sub-diagonal.
fn tred2<T: Real>(v: &mut [T], d: &mut [T], e: &mut [T], n: usize) {
    let at = |i: usize, j: usize| i * n + j;
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = T::zero();
        let mut h = T::zero();
        for k in 0..i {
            scale = scale + d[k].abs();
        }
        if scale == T::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = T::zero();
                v[at(j, i)] = T::zero();
            }
        } else {
            for k in 0..i {
                d[k] = d[k] / scale;
                h = h + d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h = h - f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = T::zero();
            }
            for j in 0..i {
                f = d[j];
                v[at(j, i)] = f;
                g = e[j] + v[at(j, j)] * f;
                for k in (j + 1)..i {
                    g = g + v[at(k, j)] * d[k];
                    e[k] = e[k] + v[at(k, j)] * f;
                }
                e[j] = g;
            }
            f = T::zero();
            for j in 0..i {
                e[j] = e[j] / h;
                f = f + e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] = e[j] - hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[at(k, j)] = v[at(k, j)] - (f * e[k] + g * d[k]);
                }
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = T::zero();
            }
        }
        d[i] = h;
    }
    for i in 0..n.saturating_sub(1) {
        v[at(n - 1, i)] = v[at(i, i)];
        v[at(i, i)] = T::one();
        let h = d[i + 1];
        if h != T::zero() {
            for k in 0..=i {
                d[k] = v[at(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = T::zero();
                for k in 0..=i {
                    g = g + v[at(k, i + 1)] * v[at(k, j)];
                }
                for k in 0..=i {
                    v[at(k, j)] = v[at(k, j)] - g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[at(k, i + 1)] = T::zero();
        }
    }
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
        v[at(n - 1, j)] = T::zero();
    }
    v[at(n - 1, n - 1)] = T::one();
    e[0] = T::zero();
}

/// Implicit QL on a tridiagonal matrix. `w` stores eigenvector estimates
/// as rows and receives the plane rotations.
fn tql2<T: Real>(d: &mut [T], e: &mut [T], w: &mut [T], n: usize) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();

    let two = T::lit(2.0);
    let eps = T::epsilon();
    let mut f = T::zero();
    let mut tst1 = T::zero();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m = n - 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERATIONS {
                    return Err(MagnonError::Numeric {
                        message: format!("QL iteration did not converge for eigenvalue {l}"),
                        residual: e[l].abs().to_f64_lossy(),
                    });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di = *di - h;
                }
                f = f + h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (lo, hi) = w.split_at_mut((i + 1) * n);
                    let row_i = &mut lo[i * n..];
                    let row_i1 = &mut hi[..n];
                    for k in 0..n {
                        let hk = row_i1[k];
                        row_i1[k] = s * row_i[k] + c * hk;
                        row_i[k] = c * row_i[k] - s * hk;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] = d[l] + f;
        e[l] = T::zero();
    }
    Ok(())
}

/// Bessel functions of the first kind `J_0(x) ..= J_nmax(x)` by Miller's
/// backward recurrence, normalised with `J_0 + 2 Σ J_2k = 1`.
pub fn bessel_j_sequence(x: f64, nmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let top = nmax.max(ax.ceil() as usize);
    let mut start = top + 20 + (40.0 * top as f64).sqrt() as usize;
    start += start % 2;

    let mut next = 0.0_f64;
    let mut cur = 1e-300_f64;
    let mut norm = 0.0_f64;
    for k in (1..=start).rev() {
        // cur = J_k, next = J_{k+1}
        let prev = 2.0 * k as f64 / ax * cur - next;
        next = cur;
        cur = prev;
        if k - 1 <= nmax {
            out[k - 1] = cur;
        }
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            for o in out.iter_mut() {
                *o *= 1e-250;
            }
        }
    }
    norm += cur;
    for o in out.iter_mut() {
        *o /= norm;
    }
    if x < 0.0 {
        for (k, o) in out.iter_mut().enumerate() {
            if k % 2 == 1 {
                *o = -*o;
            }
        }
    }
    out
}
