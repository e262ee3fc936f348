//! Square-lattice geometry and the single-excitation Hamiltonian.
//!
//! In the one-flipped-spin subspace the Heisenberg sheet reduces to a
//! tight-binding model: hopping `-Je` between edge neighbours (and `-Jd`
//! between diagonal neighbours), with on-site energy
//! `Je·z(i,j) + Jd·z_d(i,j) + ε(i,j)` where `z`, `z_d` count the neighbours
//! that actually exist. With ε ≡ 0 on a periodic lattice the spectrum is
//! exactly `4J - 2J(cos kx + cos ky)`, with the band bottom at zero.
//!
//! Units: ħ = 1, energies in J, lengths in the lattice spacing a, times in 1/J.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{MagnonError, Result};
use crate::potentials::PotentialField;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Lattice simply ends; edge sites have fewer neighbours.
    HardWall,
    /// Torus topology, used for validating the dispersion relation.
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingSpec<T> {
    /// Edge (nearest-neighbour) coupling.
    pub je: T,
    /// Diagonal (next-nearest-neighbour) coupling.
    pub jd: T,
}

impl<T: Real> CouplingSpec<T> {
    pub fn new(je: T, jd: T) -> Result<Self> {
        if !(je.is_finite() && je > T::zero()) {
            return Err(MagnonError::config("coupling.je", "must be finite and > 0"));
        }
        if !(jd.is_finite() && jd >= T::zero()) {
            return Err(MagnonError::config("coupling.jd", "must be finite and >= 0"));
        }
        Ok(Self { je, jd })
    }

    pub fn nearest_only(j: T) -> Result<Self> {
        Self::new(j, T::zero())
    }

    /// Coupling felt by a magnon travelling along a lattice axis.
    pub fn effective(&self) -> T {
        self.je + self.jd + self.jd
    }
}

/// Lattice geometry. The spacing `a` is the unit of length and fixed to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSpec<T> {
    pub nx: usize,
    pub ny: usize,
    pub coupling: CouplingSpec<T>,
    pub boundary: Boundary,
}

impl<T: Real> LatticeSpec<T> {
    pub fn new(nx: usize, ny: usize, coupling: CouplingSpec<T>, boundary: Boundary) -> Result<Self> {
        if nx < 2 {
            return Err(MagnonError::config("lattice.nx", "must be >= 2"));
        }
        if ny < 2 {
            return Err(MagnonError::config("lattice.ny", "must be >= 2"));
        }
        CouplingSpec::new(coupling.je, coupling.jd)?;
        Ok(Self {
            nx,
            ny,
            coupling,
            boundary,
        })
    }

    /// Hard-wall lattice with nearest-neighbour coupling `j`.
    pub fn hard_wall(nx: usize, ny: usize, j: T) -> Result<Self> {
        Self::new(nx, ny, CouplingSpec::nearest_only(j)?, Boundary::HardWall)
    }

    pub fn periodic(nx: usize, ny: usize, j: T) -> Result<Self> {
        Self::new(nx, ny, CouplingSpec::nearest_only(j)?, Boundary::Periodic)
    }

    pub fn spacing(&self) -> T {
        T::one()
    }

    pub fn dim(&self) -> usize {
        self.nx * self.ny
    }

    /// Site index with x running fastest.
    #[inline]
    pub fn flatten(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn unflatten(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    fn shift(&self, i: usize, di: isize, n: usize) -> Option<usize> {
        let t = i as isize + di;
        match self.boundary {
            Boundary::HardWall => (t >= 0 && t < n as isize).then_some(t as usize),
            Boundary::Periodic => Some(t.rem_euclid(n as isize) as usize),
        }
    }

    /// Neighbour at offset `(di, dj)`, if it exists.
    pub fn neighbour(&self, i: usize, j: usize, di: isize, dj: isize) -> Option<(usize, usize)> {
        Some((self.shift(i, di, self.nx)?, self.shift(j, dj, self.ny)?))
    }

    /// Number of existing edge neighbours of a site.
    pub fn coordination(&self, i: usize, j: usize) -> usize {
        EDGE_OFFSETS
            .iter()
            .filter(|&&(di, dj)| self.neighbour(i, j, di, dj).is_some())
            .count()
    }

    pub fn diagonal_coordination(&self, i: usize, j: usize) -> usize {
        DIAGONAL_OFFSETS
            .iter()
            .filter(|&&(di, dj)| self.neighbour(i, j, di, dj).is_some())
            .count()
    }
}

const EDGE_OFFSETS: [(isize, isize); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
const DIAGONAL_OFFSETS: [(isize, isize); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];

/// Real symmetric Hamiltonian in compressed-sparse-row form.
#[derive(Debug, Clone)]
pub struct SparseHamiltonian<T> {
    pub nx: usize,
    pub ny: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
}

pub(crate) const MATVEC_CHUNK: usize = 2048;

impl<T: Real> SparseHamiltonian<T> {
    /// Assembles a matrix from per-row `(column, value)` lists. Duplicate
    /// columns within a row are summed.
    pub fn from_rows(nx: usize, ny: usize, rows: Vec<Vec<(usize, T)>>) -> Result<Self> {
        let dim = nx * ny;
        if rows.len() != dim {
            return Err(MagnonError::DimensionMismatch {
                expected: dim,
                found: rows.len(),
            });
        }
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                if c >= dim {
                    return Err(MagnonError::DimensionMismatch {
                        expected: dim,
                        found: c + 1,
                    });
                }
                if last == Some(c) {
                    let tail = vals.len() - 1;
                    vals[tail] = vals[tail] + v;
                } else {
                    cols.push(c);
                    vals.push(v);
                    last = Some(c);
                }
            }
            row_ptr.push(cols.len());
        }
        Ok(Self {
            nx,
            ny,
            row_ptr,
            cols,
            vals,
        })
    }

    pub fn dim(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.row(r)
            .find(|&(col, _)| col == c)
            .map(|(_, v)| v)
            .unwrap_or_else(T::zero)
    }

    pub fn diagonal(&self, r: usize) -> T {
        self.get(r, r)
    }

    /// Returns `H + c·1`.
    pub fn shifted(&self, c: T) -> Self {
        let mut out = self.clone();
        for r in 0..self.dim() {
            for k in out.row_ptr[r]..out.row_ptr[r + 1] {
                if out.cols[k] == r {
                    out.vals[k] = out.vals[k] + c;
                }
            }
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim()).all(|r| self.row(r).all(|(c, v)| self.get(c, r) == v))
    }

    /// Gershgorin enclosure `[lo, hi]` of the spectrum.
    pub fn spectral_bounds(&self) -> (T, T) {
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for r in 0..self.dim() {
            let mut d = T::zero();
            let mut radius = T::zero();
            for (c, v) in self.row(r) {
                if c == r {
                    d = d + v;
                } else {
                    radius = radius + v.abs();
                }
            }
            lo = lo.min(d - radius);
            hi = hi.max(d + radius);
        }
        (lo, hi)
    }

    pub fn to_dense(&self) -> Vec<T> {
        let n = self.dim();
        let mut m = vec![T::zero(); n * n];
        for r in 0..n {
            for (c, v) in self.row(r) {
                m[r * n + c] = v;
            }
        }
        m
    }

    /// `y = H x`. Rows are processed in fixed-size chunks, each row summed in
    /// column order, so the result does not depend on the thread count.
    pub fn matvec(&self, x: &[Complex<T>], y: &mut [Complex<T>]) -> Result<()> {
        let n = self.dim();
        if x.len() != n {
            return Err(MagnonError::DimensionMismatch {
                expected: n,
                found: x.len(),
            });
        }
        if y.len() != n {
            return Err(MagnonError::DimensionMismatch {
                expected: n,
                found: y.len(),
            });
        }
        y.par_chunks_mut(MATVEC_CHUNK)
            .enumerate()
            .for_each(|(chunk, out)| {
                let base = chunk * MATVEC_CHUNK;
                for (off, yi) in out.iter_mut().enumerate() {
                    *yi = self.row_dot(base + off, x);
                }
            });
        Ok(())
    }

    #[inline]
    pub(crate) fn row_dot(&self, r: usize, x: &[Complex<T>]) -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for k in self.row_ptr[r]..self.row_ptr[r + 1] {
            acc = acc + x[self.cols[k]] * self.vals[k];
        }
        acc
    }

    /// `⟨ψ|H|ψ⟩` for a normalised state.
    pub fn expectation(&self, s: &SpinState<T>) -> Result<T> {
        let hv = apply_hamiltonian(self, s)?;
        Ok(s.amps
            .iter()
            .zip(&hv)
            .map(|(a, b)| (a.conj() * b).re)
            .sum())
    }
}

/// Assembles the single-excitation Hamiltonian of `lattice` with on-site
/// energies `field`.
pub fn build_hamiltonian<T: Real>(
    lattice: &LatticeSpec<T>,
    field: &PotentialField<T>,
) -> Result<SparseHamiltonian<T>> {
    if field.nx != lattice.nx || field.ny != lattice.ny {
        return Err(MagnonError::config(
            "potential",
            format!(
                "field is {}x{} but lattice is {}x{}",
                field.nx, field.ny, lattice.nx, lattice.ny
            ),
        ));
    }
    if let Some(k) = field.eps.iter().position(|e| !e.is_finite()) {
        let (i, j) = lattice.unflatten(k);
        return Err(MagnonError::Validation(format!(
            "non-finite on-site energy at site ({i}, {j})"
        )));
    }
    let je = lattice.coupling.je;
    let jd = lattice.coupling.jd;
    let with_diagonal = jd > T::zero();

    let rows: Vec<Vec<(usize, T)>> = (0..lattice.dim())
        .map(|k| {
            let (i, j) = lattice.unflatten(k);
            let mut row = Vec::with_capacity(9);
            let mut diag = field.eps[k];
            for &(di, dj) in &EDGE_OFFSETS {
                if let Some((ni, nj)) = lattice.neighbour(i, j, di, dj) {
                    row.push((lattice.flatten(ni, nj), -je));
                    diag = diag + je;
                }
            }
            if with_diagonal {
                for &(di, dj) in &DIAGONAL_OFFSETS {
                    if let Some((ni, nj)) = lattice.neighbour(i, j, di, dj) {
                        row.push((lattice.flatten(ni, nj), -jd));
                        diag = diag + jd;
                    }
                }
            }
            row.push((k, diag));
            row
        })
        .collect();
    SparseHamiltonian::from_rows(lattice.nx, lattice.ny, rows)
}

/// Returns `H·s`.
pub fn apply_hamiltonian<T: Real>(h: &SparseHamiltonian<T>, s: &SpinState<T>) -> Result<Vec<Complex<T>>> {
    let mut out = vec![Complex::new(T::zero(), T::zero()); h.dim()];
    h.matvec(&s.amps, &mut out)?;
    Ok(out)
}

/// Normalised amplitude vector over the single-excitation subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinState<T> {
    pub nx: usize,
    pub ny: usize,
    amps: Vec<Complex<T>>,
}

impl<T: Real> SpinState<T> {
    /// Normalises `amps` and wraps them. Fails on a zero or non-finite vector.
    pub fn from_amplitudes(nx: usize, ny: usize, amps: Vec<Complex<T>>) -> Result<Self> {
        if amps.len() != nx * ny {
            return Err(MagnonError::DimensionMismatch {
                expected: nx * ny,
                found: amps.len(),
            });
        }
        let norm = l2_norm(&amps);
        if !(norm.is_finite() && norm > T::zero()) {
            return Err(MagnonError::Validation("state has zero or non-finite norm".into()));
        }
        let inv = T::one() / norm;
        let amps = amps.into_iter().map(|a| a * inv).collect();
        Ok(Self { nx, ny, amps })
    }

    /// Wraps amplitudes without renormalising (caller guarantees unit norm).
    pub(crate) fn from_normalized(nx: usize, ny: usize, amps: Vec<Complex<T>>) -> Self {
        debug_assert_eq!(amps.len(), nx * ny);
        Self { nx, ny, amps }
    }

    /// All amplitude on one site.
    pub fn localized(nx: usize, ny: usize, i: usize, j: usize) -> Result<Self> {
        let mut amps = vec![Complex::new(T::zero(), T::zero()); nx * ny];
        if i >= nx || j >= ny {
            return Err(MagnonError::Domain(format!("site ({i}, {j}) outside {nx}x{ny} lattice")));
        }
        amps[j * nx + i] = Complex::new(T::one(), T::zero());
        Ok(Self { nx, ny, amps })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex<T>> {
        self.amps
    }

    pub fn amplitude(&self, i: usize, j: usize) -> Complex<T> {
        self.amps[j * self.nx + i]
    }

    pub fn norm(&self) -> T {
        l2_norm(&self.amps)
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        if self.dim() != other.dim() {
            return Err(MagnonError::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * b))
    }

    /// Multiplies by a global phase `e^{iφ}`.
    pub fn with_global_phase(&self, phi: T) -> Self {
        let p = Complex::new(phi.cos(), phi.sin());
        Self {
            nx: self.nx,
            ny: self.ny,
            amps: self.amps.iter().map(|a| a * p).collect(),
        }
    }
}

pub(crate) fn l2_norm<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().map(|a| a.norm_sqr()).sum::<T>().sqrt()
}
