use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{MagnonError, Result};
use crate::geometry::{GuidePath, Point};
use crate::lattice::SpinState;
use crate::potentials::Axis;
use crate::scalar::Real;

/// A set of lattice sites.
#[derive(Debug, Clone, PartialEq)]
pub enum Region<T> {
    All,
    /// Inclusive bounds in lattice coordinates.
    Rect { x0: T, x1: T, y0: T, y1: T },
    /// Sites within `half_width` of a guide centreline.
    Tube { path: GuidePath<T>, half_width: T },
    /// `coord > at` when `upper`, else `coord <= at`.
    HalfPlane { axis: Axis, at: T, upper: bool },
    Union(Vec<Region<T>>),
    Intersection(Vec<Region<T>>),
    Not(Box<Region<T>>),
}

impl<T: Real> Region<T> {
    pub fn tube(path: GuidePath<T>, half_width: T) -> Self {
        Region::Tube { path, half_width }
    }

    pub fn rows(y0: T, y1: T) -> Self {
        Region::Rect {
            x0: T::neg_infinity(),
            x1: T::infinity(),
            y0,
            y1,
        }
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        let (x, y) = (T::from_usize_lossy(i), T::from_usize_lossy(j));
        match self {
            Region::All => true,
            Region::Rect { x0, x1, y0, y1 } => x >= *x0 && x <= *x1 && y >= *y0 && y <= *y1,
            Region::Tube { path, half_width } => path.project(Point::new(x, y)).distance <= *half_width,
            Region::HalfPlane { axis, at, upper } => {
                let c = match axis {
                    Axis::X => x,
                    Axis::Y => y,
                };
                if *upper {
                    c > *at
                } else {
                    c <= *at
                }
            }
            Region::Union(rs) => rs.iter().any(|r| r.contains(i, j)),
            Region::Intersection(rs) => rs.iter().all(|r| r.contains(i, j)),
            Region::Not(r) => !r.contains(i, j),
        }
    }

    /// Row-major membership mask, for repeated measurements.
    pub fn mask(&self, nx: usize, ny: usize) -> Vec<bool> {
        (0..nx * ny)
            .into_par_iter()
            .map(|k| self.contains(k % nx, k / nx))
            .collect()
    }
}

pub fn region_population<T: Real>(s: &SpinState<T>, r: &Region<T>) -> T {
    masked_population(s, &r.mask(s.nx, s.ny))
}

pub fn masked_population<T: Real>(s: &SpinState<T>, mask: &[bool]) -> T {
    let p: T = s
        .amplitudes()
        .iter()
        .zip(mask)
        .filter(|(_, m)| **m)
        .map(|(a, _)| a.norm_sqr())
        .sum();
    p.min(T::one())
}

/// Population of each row `j` (i.e. as a function of `y`).
pub fn row_populations<T: Real>(s: &SpinState<T>) -> Vec<T> {
    s.amplitudes()
        .chunks(s.nx)
        .map(|row| row.iter().map(|a| a.norm_sqr()).sum())
        .collect()
}

pub fn centroid<T: Real>(s: &SpinState<T>) -> (T, T) {
    let (mut w, mut sx, mut sy) = (T::zero(), T::zero(), T::zero());
    for (k, a) in s.amplitudes().iter().enumerate() {
        let p = a.norm_sqr();
        w = w + p;
        sx = sx + p * T::from_usize_lossy(k % s.nx);
        sy = sy + p * T::from_usize_lossy(k / s.nx);
    }
    (sx / w, sy / w)
}

/// Standard deviations of the probability distribution along x and y.
pub fn spread<T: Real>(s: &SpinState<T>) -> (T, T) {
    let (cx, cy) = centroid(s);
    let (mut w, mut vx, mut vy) = (T::zero(), T::zero(), T::zero());
    for (k, a) in s.amplitudes().iter().enumerate() {
        let p = a.norm_sqr();
        let dx = T::from_usize_lossy(k % s.nx) - cx;
        let dy = T::from_usize_lossy(k / s.nx) - cy;
        w = w + p;
        vx = vx + p * dx * dx;
        vy = vy + p * dy * dy;
    }
    ((vx / w).sqrt(), (vy / w).sqrt())
}

/// `arg ⟨a|b⟩` restricted to `r`. Both states need population ≥ 0.5 there.
pub fn relative_phase<T: Real>(a: &SpinState<T>, b: &SpinState<T>, r: &Region<T>) -> Result<T> {
    if a.dim() != b.dim() {
        return Err(MagnonError::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let mask = r.mask(a.nx, a.ny);
    let (pa, pb) = (masked_population(a, &mask), masked_population(b, &mask));
    let half = T::lit(0.5);
    if pa < half || pb < half {
        return Err(MagnonError::InsufficientOverlap {
            pop_a: pa.to_f64_lossy(),
            pop_b: pb.to_f64_lossy(),
        });
    }
    let z = a
        .amplitudes()
        .iter()
        .zip(b.amplitudes())
        .zip(&mask)
        .filter(|(_, m)| **m)
        .fold(Complex::new(T::zero(), T::zero()), |acc, ((x, y), _)| acc + x.conj() * y);
    Ok(z.arg())
}
