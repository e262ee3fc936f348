//! On-site energy landscapes produced by current-carrying surface wires.
//!
//! A wire at height `d` above the sheet, carrying current along the sheet,
//! produces an out-of-plane field proportional to `s / (s² + d²)` at signed
//! in-plane distance `s` from the wire. A guide is a pair of antiparallel
//! wires at `±wg` from its centreline, which yields a well whose centre value
//! is normalised to `-eps_min`. A dynamic magnonic crystal (DMC) is a row of
//! transverse wires with alternating current.
//!
//! All energies are in units of J, all lengths in lattice spacings.

use rayon::prelude::*;

use crate::error::{MagnonError, Result};
use crate::geometry::{GuidePath, Point};
use crate::lattice::LatticeSpec;
use crate::scalar::Real;

/// Per-site on-site energy, row-major with x fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField<T> {
    pub nx: usize,
    pub ny: usize,
    pub eps: Vec<T>,
}

impl<T: Real> PotentialField<T> {
    pub fn zeros(nx: usize, ny: usize) -> Self {
        Self {
            nx,
            ny,
            eps: vec![T::zero(); nx * ny],
        }
    }

    pub fn from_fn(nx: usize, ny: usize, f: impl Fn(usize, usize) -> T + Sync) -> Self {
        let eps = (0..nx * ny).into_par_iter().map(|k| f(k % nx, k / nx)).collect();
        Self { nx, ny, eps }
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.eps[j * self.nx + i]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.eps[j * self.nx + i] = v;
    }

    /// Row `j` (fixed y), i.e. the transverse cross-section of a y-directed guide.
    pub fn row(&self, j: usize) -> &[T] {
        &self.eps[j * self.nx..(j + 1) * self.nx]
    }

    pub fn column(&self, i: usize) -> Vec<T> {
        (0..self.ny).map(|j| self.get(i, j)).collect()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.nx != other.nx || self.ny != other.ny {
            return Err(MagnonError::DimensionMismatch {
                expected: self.eps.len(),
                found: other.eps.len(),
            });
        }
        Ok(Self {
            nx: self.nx,
            ny: self.ny,
            eps: self.eps.iter().zip(&other.eps).map(|(a, b)| *a + *b).collect(),
        })
    }

    pub fn scaled(&self, c: T) -> Self {
        Self {
            nx: self.nx,
            ny: self.ny,
            eps: self.eps.iter().map(|&e| e * c).collect(),
        }
    }

    pub fn offset(&self, c: T) -> Self {
        Self {
            nx: self.nx,
            ny: self.ny,
            eps: self.eps.iter().map(|&e| e + c).collect(),
        }
    }
}

/// Transverse shape of a wire-pair guide.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WirePairProfile<T> {
    /// Half-separation of the wires.
    pub wg: T,
    /// Height of the wires above the sheet.
    pub d: T,
    /// Well depth at the centre; positive means attractive.
    pub eps_min: T,
}

impl<T: Real> WirePairProfile<T> {
    pub fn new(wg: T, d: T, eps_min: T) -> Result<Self> {
        if !(wg.is_finite() && wg > T::zero()) {
            return Err(MagnonError::config("guide.wg", "half-width must be finite and > 0"));
        }
        if !(d.is_finite() && d > T::zero()) {
            return Err(MagnonError::config("guide.d", "wire height must be finite and > 0"));
        }
        if !(eps_min.is_finite() && eps_min >= T::zero()) {
            return Err(MagnonError::config("guide.eps_min", "well depth must be finite and >= 0"));
        }
        Ok(Self { wg, d, eps_min })
    }

    /// Unnormalised `B_z(x)` in units of `μ0 I / 2π`.
    pub fn raw_field(&self, x: T) -> T {
        single_wire(x - self.wg, self.d) - single_wire(x + self.wg, self.d)
    }

    /// Same profile with a different depth.
    pub fn with_depth(&self, eps_min: T) -> Self {
        Self { eps_min, ..*self }
    }
}

/// Out-of-plane field of one wire at signed in-plane offset `s`, height `d`.
#[inline]
pub fn single_wire<T: Real>(s: T, d: T) -> T {
    s / (s * s + d * d)
}

/// On-site energy of a guide at transverse offset `x` from its centreline.
pub fn wire_profile<T: Real>(x: T, p: &WirePairProfile<T>) -> Result<T> {
    let b0 = p.raw_field(T::zero()).abs();
    if !(b0 > T::zero()) || !b0.is_finite() {
        return Err(MagnonError::Validation(format!(
            "degenerate wire geometry: field at guide centre vanishes (wg = {}, d = {})",
            p.wg, p.d
        )));
    }
    Ok(p.eps_min * p.raw_field(x) / b0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileAnalysis<T> {
    /// `|B_z(0)|` at fixed current, in units of `μ0 I / 2π`.
    pub depth_at_center: T,
    /// The guide centre is a local maximum between two side minima.
    pub is_split: bool,
}

/// Depth of the wire-pair well at fixed current, and whether it has split
/// into two separate wells.
pub fn profile_analysis<T: Real>(wg: T, d: T) -> Result<ProfileAnalysis<T>> {
    let p = WirePairProfile::new(wg, d, T::one())?;
    let depth_at_center = p.raw_field(T::zero()).abs();
    // ε = -|B|-normalised, so a split well has ε''(0) < 0, i.e. B''(0) > 0 after the sign flip.
    let h = T::lit(1e-3) * wg.min(d);
    let e = |x: T| wire_profile(x, &p).unwrap_or_else(|_| T::nan());
    let curvature = (e(h) - e(T::zero()) - e(T::zero()) + e(-h)) / (h * h);
    Ok(ProfileAnalysis {
        depth_at_center,
        is_split: curvature < T::zero(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Dynamic magnonic crystal: `2·n_periods` wires with alternating current,
/// spaced `period/2` apart along `orientation`, the first at `start`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DmcSpec<T> {
    pub n_periods: usize,
    pub period: T,
    /// Depth of the deepest point, `ε_min^DMC`.
    pub eps_dmc: T,
    pub start: T,
    /// Wire height above the sheet.
    pub height: T,
    /// Axis along which the field is modulated.
    pub orientation: Axis,
    /// Optional `[lo, hi]` range in the perpendicular coordinate covered by the wires.
    pub span: Option<(T, T)>,
}

impl<T: Real> DmcSpec<T> {
    /// Crystal along y with the default wire height of half a period.
    pub fn along_y(n_periods: usize, period: T, eps_dmc: T, start: T) -> Result<Self> {
        let s = Self {
            n_periods,
            period,
            eps_dmc,
            start,
            height: period / T::lit(2.0),
            orientation: Axis::Y,
            span: None,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_periods == 0 {
            return Err(MagnonError::config("dmc.n_periods", "must be >= 1"));
        }
        if !(self.period.is_finite() && self.period > T::zero()) {
            return Err(MagnonError::config("dmc.period", "must be finite and > 0"));
        }
        if !(self.height.is_finite() && self.height > T::zero()) {
            return Err(MagnonError::config("dmc.height", "must be finite and > 0"));
        }
        if !(self.eps_dmc.is_finite() && self.eps_dmc >= T::zero()) {
            return Err(MagnonError::config("dmc.eps_dmc", "must be finite and >= 0"));
        }
        if !self.start.is_finite() {
            return Err(MagnonError::config("dmc.start", "must be finite"));
        }
        if let Some((lo, hi)) = self.span {
            if !(lo < hi) {
                return Err(MagnonError::config("dmc.span", "lower bound must be below upper bound"));
            }
        }
        Ok(())
    }

    pub fn extent(&self) -> T {
        T::from_usize_lossy(self.n_periods) * self.period
    }

    pub fn end(&self) -> T {
        self.start + self.extent()
    }

    pub fn wire_positions(&self) -> Vec<T> {
        let half = self.period / T::lit(2.0);
        (0..2 * self.n_periods)
            .map(|m| self.start + half * T::from_usize_lossy(m))
            .collect()
    }

    fn raw(&self, y: T) -> T {
        let mut sum = T::zero();
        for (m, w) in self.wire_positions().into_iter().enumerate() {
            let f = single_wire(y - w, self.height);
            sum = if m % 2 == 0 { sum + f } else { sum - f };
        }
        sum
    }

    /// Precomputes the depth normalisation.
    pub fn profile(&self) -> Result<DmcProfile<T>> {
        self.validate()?;
        let lo = self.start - T::lit(4.0) * self.height;
        let hi = self.end() + T::lit(4.0) * self.height;
        let step = self.period.min(self.height) / T::lit(400.0);
        let n = ((hi - lo) / step).ceil().to_usize().unwrap_or(0);
        let deepest = (0..=n)
            .map(|k| self.raw(lo + step * T::from_usize_lossy(k)))
            .fold(T::zero(), |m, v| m.min(v));
        let scale = if deepest < T::zero() {
            self.eps_dmc / deepest.abs()
        } else {
            T::zero()
        };
        Ok(DmcProfile { spec: *self, scale })
    }
}

/// DMC with its normalisation resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DmcProfile<T> {
    pub spec: DmcSpec<T>,
    scale: T,
}

impl<T: Real> DmcProfile<T> {
    /// Energy at longitudinal coordinate `y`.
    pub fn at(&self, y: T) -> T {
        if self.scale == T::zero() {
            return T::zero();
        }
        self.scale * self.spec.raw(y)
    }

    /// Energy at a lattice point, honouring orientation and span.
    pub fn at_point(&self, p: Point<T>) -> T {
        let (along, across) = match self.spec.orientation {
            Axis::Y => (p.y, p.x),
            Axis::X => (p.x, p.y),
        };
        if let Some((lo, hi)) = self.spec.span {
            if across < lo || across > hi {
                return T::zero();
            }
        }
        self.at(along)
    }

    /// `Σ_y ε(y)` over integer sites in `[lo, hi]` (a = 1).
    pub fn integral(&self, lo: T, hi: T) -> T {
        let a = lo.ceil().to_i64().unwrap_or(0);
        let b = hi.floor().to_i64().unwrap_or(-1);
        (a..=b).map(|y| self.at(T::lit(y as f64))).sum()
    }
}

/// Energy of a DMC at longitudinal offset `y`.
pub fn dmc_profile<T: Real>(y: T, spec: &DmcSpec<T>) -> Result<T> {
    Ok(spec.profile()?.at(y))
}

/// Wire-pair guide following a centreline path.
#[derive(Debug, Clone, PartialEq)]
pub struct GuideSpec<T> {
    pub path: GuidePath<T>,
    pub profile: WirePairProfile<T>,
}

impl<T: Real> GuideSpec<T> {
    pub fn new(path: GuidePath<T>, profile: WirePairProfile<T>) -> Self {
        Self { path, profile }
    }

    /// Energy at a point, treating each wire as locally straight and parallel
    /// to the nearest stretch of centreline.
    pub fn energy_at(&self, p: Point<T>) -> T {
        let pr = self.path.project(p);
        let b0 = self.profile.raw_field(T::zero()).abs();
        self.profile.eps_min * self.profile.raw_field(pr.offset) / b0
    }
}

/// A device: guides, crystals and a uniform bias, composed additively.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Layout<T> {
    pub guides: Vec<GuideSpec<T>>,
    pub dmcs: Vec<DmcSpec<T>>,
    pub bias: T,
}

impl<T: Real> Layout<T> {
    pub fn new() -> Self {
        Self {
            guides: Vec::new(),
            dmcs: Vec::new(),
            bias: T::zero(),
        }
    }

    pub fn with_guide(mut self, g: GuideSpec<T>) -> Self {
        self.guides.push(g);
        self
    }

    pub fn with_dmc(mut self, d: DmcSpec<T>) -> Self {
        self.dmcs.push(d);
        self
    }

    /// Union of two layouts (biases add).
    pub fn union(&self, other: &Self) -> Self {
        Self {
            guides: self.guides.iter().chain(&other.guides).cloned().collect(),
            dmcs: self.dmcs.iter().chain(&other.dmcs).copied().collect(),
            bias: self.bias + other.bias,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayoutWarning {
    pub element: String,
    pub message: String,
}

/// Rasterises a layout onto the lattice. Elements lying entirely outside the
/// lattice are reported as warnings, not errors.
pub fn layout_to_field<T: Real>(
    layout: &Layout<T>,
    lattice: &LatticeSpec<T>,
) -> Result<(PotentialField<T>, Vec<LayoutWarning>)> {
    let dmcs = layout
        .dmcs
        .iter()
        .map(|d| d.profile())
        .collect::<Result<Vec<_>>>()?;
    let mut warnings = Vec::new();
    let (nx, ny) = (T::from_usize_lossy(lattice.nx), T::from_usize_lossy(lattice.ny));
    for (k, g) in layout.guides.iter().enumerate() {
        let reach = g.profile.wg + g.profile.d;
        let inside = g.path.sample(T::one()).iter().any(|p| {
            p.x > -reach && p.x < nx - T::one() + reach && p.y > -reach && p.y < ny - T::one() + reach
        });
        if !inside {
            warnings.push(LayoutWarning {
                element: format!("guide[{k}]"),
                message: "guide lies entirely outside the lattice".into(),
            });
        }
    }
    for (k, d) in layout.dmcs.iter().enumerate() {
        let n_along = match d.orientation {
            Axis::Y => ny,
            Axis::X => nx,
        };
        let reach = d.height;
        if d.end() + reach < T::zero() || d.start - reach > n_along - T::one() {
            warnings.push(LayoutWarning {
                element: format!("dmc[{k}]"),
                message: "crystal lies entirely outside the lattice".into(),
            });
        }
    }
    let bias = layout.bias;
    let field = PotentialField::from_fn(lattice.nx, lattice.ny, |i, j| {
        let p = Point::new(T::from_usize_lossy(i), T::from_usize_lossy(j));
        let mut e = bias;
        for g in &layout.guides {
            e = e + g.energy_at(p);
        }
        for d in &dmcs {
            e = e + d.at_point(p);
        }
        e
    });
    Ok((field, warnings))
}
