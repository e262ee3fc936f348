//! `exp(−iHt)` acting on states.
//!
//! The default is a Chebyshev expansion: the Hamiltonian is rescaled into
//! `[−1, 1]` with its Gershgorin bounds and the propagator expanded as
//! `e^{−ict} Σ (2 − δ_k0) (−i)^k J_k(rt) T_k(H̃)`. The Bessel coefficients
//! decay super-exponentially once `k > rt`, so the series is cut when they
//! drop below the tolerance. Long times are split into substeps so that
//! `rt` stays moderate and the coefficient sequence stays accurate.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{MagnonError, Result};
use crate::lattice::{l2_norm, SparseHamiltonian, SpinState, MATVEC_CHUNK};
use crate::linalg::{bessel_j_sequence, symmetric_eigen, tridiagonal_eigen, SymmetricEigen};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Chebyshev,
    Krylov,
    /// Dense eigendecomposition; lattices up to `EXACT_MAX_SITES`.
    ExactSmall,
}

pub const EXACT_MAX_SITES: usize = 4096;

/// Largest `r·dt` per Chebyshev substep.
const MAX_CHEB_ARG: f64 = 60.0;
const KRYLOV_DIM: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorConfig<T> {
    pub method: Method,
    /// Snapshot spacing used by runners (units ħ/J).
    pub t_step: T,
    /// Target error per step, at most 1e-8.
    pub tol: T,
}

impl<T: Real> Default for PropagatorConfig<T> {
    fn default() -> Self {
        Self {
            method: Method::Chebyshev,
            t_step: T::one(),
            tol: T::lit(1e-12),
        }
    }
}

impl<T: Real> PropagatorConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > T::zero() && self.tol <= T::lit(1e-8)) {
            return Err(MagnonError::config("propagator.tol", "must lie in (0, 1e-8]"));
        }
        if !(self.t_step > T::zero() && self.t_step.is_finite()) {
            return Err(MagnonError::config("propagator.t_step", "must be finite and > 0"));
        }
        Ok(())
    }
}

type C<T> = Complex<T>;

fn czero<T: Real>() -> C<T> {
    Complex::new(T::zero(), T::zero())
}

struct ChebCoeffs<T> {
    dt: T,
    coeffs: Vec<C<T>>,
}

enum Kind<T> {
    Chebyshev {
        center: T,
        radius: T,
        cache: Option<ChebCoeffs<T>>,
    },
    Krylov,
    Exact(SymmetricEigen<T>),
}

/// Reusable propagator bound to one Hamiltonian.
pub struct Propagator<'h, T> {
    h: &'h SparseHamiltonian<T>,
    tol: T,
    kind: Kind<T>,
}

impl<'h, T: Real> Propagator<'h, T> {
    pub fn new(h: &'h SparseHamiltonian<T>, cfg: &PropagatorConfig<T>) -> Result<Self> {
        cfg.validate()?;
        let kind = match cfg.method {
            Method::Chebyshev => {
                let (lo, hi) = h.spectral_bounds();
                let two = T::lit(2.0);
                Kind::Chebyshev {
                    center: (hi + lo) / two,
                    radius: (hi - lo) / two,
                    cache: None,
                }
            }
            Method::Krylov => Kind::Krylov,
            Method::ExactSmall => {
                if h.dim() > EXACT_MAX_SITES {
                    return Err(MagnonError::config(
                        "propagator.method",
                        format!("exact propagation limited to {EXACT_MAX_SITES} sites, lattice has {}", h.dim()),
                    ));
                }
                Kind::Exact(symmetric_eigen(&h.to_dense(), h.dim())?)
            }
        };
        Ok(Self { h, tol: cfg.tol, kind })
    }

    /// Advances `s` by time `t` (negative `t` runs backwards).
    pub fn advance(&mut self, s: &SpinState<T>, t: T) -> Result<SpinState<T>> {
        if s.dim() != self.h.dim() {
            return Err(MagnonError::DimensionMismatch {
                expected: self.h.dim(),
                found: s.dim(),
            });
        }
        if !t.is_finite() {
            return Err(MagnonError::Domain("evolution time must be finite".into()));
        }
        if t == T::zero() {
            return Ok(s.clone());
        }
        let out = match &mut self.kind {
            Kind::Chebyshev { center, radius, cache } => {
                let (c, r) = (*center, *radius);
                let n_sub = (r * t.abs() / T::lit(MAX_CHEB_ARG)).ceil().to_usize().unwrap_or(1).max(1);
                let dt = t / T::from_usize_lossy(n_sub);
                if cache.as_ref().map(|cc| cc.dt != dt).unwrap_or(true) {
                    *cache = Some(ChebCoeffs {
                        dt,
                        coeffs: cheb_coeffs(c, r, dt, self.tol)?,
                    });
                }
                let coeffs = &cache.as_ref().expect("cache filled above").coeffs;
                let mut v = s.amplitudes().to_vec();
                for _ in 0..n_sub {
                    v = cheb_apply(self.h, &v, c, r, coeffs);
                }
                v
            }
            Kind::Krylov => krylov_evolve(self.h, s.amplitudes(), t, self.tol)?,
            Kind::Exact(eig) => exact_apply(eig, s.amplitudes(), t),
        };
        let norm = l2_norm(&out);
        let guard = T::epsilon().sqrt();
        if !((norm - T::one()).abs() <= guard) {
            return Err(MagnonError::Numeric {
                message: "propagation lost unitarity".into(),
                residual: (norm - T::one()).abs().to_f64_lossy(),
            });
        }
        Ok(SpinState::from_normalized(s.nx, s.ny, out))
    }
}

/// `exp(−iHt)·s` to tolerance `cfg.tol`.
pub fn evolve<T: Real>(
    h: &SparseHamiltonian<T>,
    s: &SpinState<T>,
    t: T,
    cfg: &PropagatorConfig<T>,
) -> Result<SpinState<T>> {
    Propagator::new(h, cfg)?.advance(s, t)
}

fn cheb_coeffs<T: Real>(c: T, r: T, dt: T, tol: T) -> Result<Vec<C<T>>> {
    let x = (r * dt).to_f64_lossy();
    let phase = -(c * dt).to_f64_lossy();
    let global = Complex::new(phase.cos(), phase.sin());
    let nmax = (1.5 * x.abs() + 60.0) as usize;
    let j = bessel_j_sequence(x, nmax);
    let cut = tol.to_f64_lossy() / 10.0;
    let mut last = 0;
    for (k, v) in j.iter().enumerate() {
        if v.abs() >= cut {
            last = k;
        }
    }
    if last + 2 >= j.len() {
        return Err(MagnonError::Numeric {
            message: "Chebyshev series did not reach the requested tolerance".into(),
            residual: j[j.len() - 1].abs(),
        });
    }
    // (−i)^k cycles through 1, −i, −1, i
    let rot = [
        Complex::new(1.0, 0.0),
        Complex::new(0.0, -1.0),
        Complex::new(-1.0, 0.0),
        Complex::new(0.0, 1.0),
    ];
    Ok((0..=last)
        .map(|k| {
            let w = if k == 0 { 1.0 } else { 2.0 };
            let z = global * rot[k % 4] * (w * j[k]);
            Complex::new(T::lit(z.re), T::lit(z.im))
        })
        .collect())
}

/// One Chebyshev substep. The three-term recurrence is fused with the
/// accumulation so each term costs one pass over the matrix.
fn cheb_apply<T: Real>(h: &SparseHamiltonian<T>, v: &[C<T>], c: T, r: T, coeffs: &[C<T>]) -> Vec<C<T>> {
    let n = v.len();
    let mut acc: Vec<C<T>> = v.iter().map(|a| a * coeffs[0]).collect();
    if coeffs.len() == 1 || r == T::zero() {
        return acc;
    }
    let inv_r = T::one() / r;
    let two = T::lit(2.0);
    let mut cur = v.to_vec();
    let mut prev = vec![czero(); n];
    for (k, coef) in coeffs.iter().enumerate().skip(1) {
        let first = k == 1;
        let coef = *coef;
        let src = &cur;
        prev.par_chunks_mut(MATVEC_CHUNK)
            .zip(acc.par_chunks_mut(MATVEC_CHUNK))
            .enumerate()
            .for_each(|(chunk, (pc, ac))| {
                let base = chunk * MATVEC_CHUNK;
                for (o, (p, a)) in pc.iter_mut().zip(ac.iter_mut()).enumerate() {
                    let row = base + o;
                    let hx = (h.row_dot(row, src) - src[row] * c) * inv_r;
                    let nv = if first { hx } else { hx * two - *p };
                    *p = nv;
                    *a = *a + coef * nv;
                }
            });
        std::mem::swap(&mut cur, &mut prev);
    }
    acc
}

fn exact_apply<T: Real>(eig: &SymmetricEigen<T>, v: &[C<T>], t: T) -> Vec<C<T>> {
    let n = eig.dim;
    let proj: Vec<C<T>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let u = eig.vector(k);
            let dot = u.iter().zip(v).fold(czero::<T>(), |acc, (a, b)| acc + b * *a);
            let ph = -eig.values[k] * t;
            dot * Complex::new(ph.cos(), ph.sin())
        })
        .collect();
    (0..n)
        .into_par_iter()
        .map(|i| (0..n).fold(czero(), |acc, k| acc + proj[k] * eig.vector(k)[i]))
        .collect()
}

fn cdot<T: Real>(a: &[C<T>], b: &[C<T>]) -> C<T> {
    a.iter().zip(b).fold(czero(), |acc, (x, y)| acc + x.conj() * y)
}

/// Lanczos with full reorthogonalisation; the step is halved until the
/// a-posteriori estimate `β_m |[e^{−iT dt} e₁]_m|` meets the tolerance.
fn krylov_evolve<T: Real>(h: &SparseHamiltonian<T>, v0: &[C<T>], t: T, tol: T) -> Result<Vec<C<T>>> {
    let n = v0.len();
    let m_max = KRYLOV_DIM.min(n);
    let mut v = v0.to_vec();
    let mut done = T::zero();
    let mut dt = t;
    let mut halvings = 0;
    let eps = t.abs() * T::lit(1e-14);
    while (t - done).abs() > eps {
        if dt.abs() > (t - done).abs() {
            dt = t - done;
        }
        // build the Krylov basis for the current vector
        let beta0 = l2_norm(&v);
        let mut basis: Vec<Vec<C<T>>> = vec![v.iter().map(|a| a / beta0).collect()];
        let mut alpha = Vec::new();
        let mut beta: Vec<T> = Vec::new();
        let mut w = vec![czero(); n];
        let mut breakdown = false;
        for j in 0..m_max {
            h.matvec(&basis[j], &mut w)?;
            let a = cdot(&basis[j], &w).re;
            alpha.push(a);
            for (wi, bi) in w.iter_mut().zip(&basis[j]) {
                *wi = *wi - bi * a;
            }
            if j > 0 {
                let b = beta[j - 1];
                for (wi, bi) in w.iter_mut().zip(&basis[j - 1]) {
                    *wi = *wi - bi * b;
                }
            }
            for q in &basis {
                let p = cdot(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi = *wi - qi * p;
                }
            }
            let b = l2_norm(&w);
            beta.push(b);
            if b <= T::lit(1e-12) * (T::one() + a.abs()) {
                breakdown = true;
                break;
            }
            if j + 1 < m_max {
                basis.push(w.iter().map(|x| x / b).collect());
            }
        }
        let m = alpha.len();
        let eig = tridiagonal_eigen(&alpha, &beta[..m - 1])?;
        loop {
            // y = exp(−i T dt) e₁
            let y: Vec<C<T>> = (0..m)
                .map(|i| {
                    (0..m).fold(czero(), |acc, k| {
                        let u = eig.vector(k);
                        let ph = -eig.values[k] * dt;
                        acc + Complex::new(ph.cos(), ph.sin()) * (u[0] * u[i])
                    })
                })
                .collect();
            let err = if breakdown { T::zero() } else { beta[m - 1] * y[m - 1].norm() };
            if err <= tol {
                let mut out = vec![czero(); n];
                for (k, q) in basis.iter().enumerate().take(m) {
                    let c = y[k] * beta0;
                    for (o, qi) in out.iter_mut().zip(q) {
                        *o = *o + qi * c;
                    }
                }
                v = out;
                done = done + dt;
                break;
            }
            dt = dt / T::lit(2.0);
            halvings += 1;
            if halvings > 60 {
                return Err(MagnonError::Numeric {
                    message: "Krylov step size underflow".into(),
                    residual: err.to_f64_lossy(),
                });
            }
        }
    }
    Ok(v)
}
