//! Band structure, transverse guide modes and inter-guide coupling.

use crate::error::{MagnonError, Result};
use crate::linalg::tridiagonal_eigen;
use crate::potentials::{wire_profile, WirePairProfile};
use crate::scalar::Real;

/// Free-lattice dispersion `ω = 4J − 2J(cos kx + cos ky)`.
pub fn dispersion<T: Real>(kx: T, ky: T, j: T) -> T {
    let two = T::lit(2.0);
    T::lit(4.0) * j - two * j * (kx.cos() + ky.cos())
}

/// Dispersion with edge coupling `je` and diagonal coupling `jd`.
pub fn dispersion_diagonal<T: Real>(kx: T, ky: T, je: T, jd: T) -> T {
    let four = T::lit(4.0);
    four * (je + jd) - T::lit(2.0) * je * (kx.cos() + ky.cos()) - four * jd * kx.cos() * ky.cos()
}

pub fn group_velocity<T: Real>(kx: T, ky: T, j: T) -> (T, T) {
    let two = T::lit(2.0);
    (two * j * kx.sin(), two * j * ky.sin())
}

/// Wavenumber along an axis giving group speed `v`, on the branch `[0, π/2]`.
pub fn wavevector_for_speed<T: Real>(v: T, j: T) -> Result<T> {
    let vmax = T::lit(2.0) * j;
    if !(v.abs() <= vmax) {
        return Err(MagnonError::Domain(format!(
            "speed {v} exceeds the maximum magnon speed {vmax} (2aJ)"
        )));
    }
    Ok((v.abs() / vmax).asin())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BzPathSample<T> {
    /// Cumulative path length in reciprocal space.
    pub s: Vec<T>,
    pub points: Vec<(T, T)>,
    pub omega: Vec<T>,
}

/// Uniform samples along Γ → X → M → Γ. Each arm gets `n_per_arm` points;
/// corners are shared, and Γ closes the loop.
pub fn bz_path<T: Real>(n_per_arm: usize, j: T) -> Result<BzPathSample<T>> {
    if n_per_arm < 2 {
        return Err(MagnonError::config("points", "need at least 2 points per arm"));
    }
    let pi = T::PI();
    let corners = [(T::zero(), T::zero()), (pi, T::zero()), (pi, pi), (T::zero(), T::zero())];
    let mut out = BzPathSample {
        s: Vec::new(),
        points: Vec::new(),
        omega: Vec::new(),
    };
    let mut s0 = T::zero();
    for arm in 0..3 {
        let (a, b) = (corners[arm], corners[arm + 1]);
        let len = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
        let steps = n_per_arm - 1;
        let first = if arm == 0 { 0 } else { 1 };
        for k in first..=steps {
            let u = T::from_usize_lossy(k) / T::from_usize_lossy(steps);
            let p = (a.0 + (b.0 - a.0) * u, a.1 + (b.1 - a.1) * u);
            out.s.push(s0 + len * u);
            out.points.push(p);
            out.omega.push(dispersion(p.0, p.1, j));
        }
        s0 = s0 + len;
    }
    Ok(out)
}

/// Relative difference in wavenumber along M→Γ at energy `e` between the
/// diagonal-coupling band and the nearest-neighbour band with `J = je + 2jd`.
pub fn m_gamma_discrepancy(je: f64, jd: f64, e: f64) -> Result<f64> {
    let j = je + 2.0 * jd;
    // rescaled band on the diagonal: 4J(1 - cos k)
    let c_ref = 1.0 - e / (4.0 * j);
    // 4(je+jd) - 4je·c - 4jd·c² = e
    let (qa, qb, qc) = (4.0 * jd, 4.0 * je, e - 4.0 * (je + jd));
    let c = if jd == 0.0 {
        -qc / qb
    } else {
        (-qb + (qb * qb - 4.0 * qa * qc).sqrt()) / (2.0 * qa)
    };
    if !(c.abs() <= 1.0 && c_ref.abs() <= 1.0) {
        return Err(MagnonError::Domain(format!("energy {e} is outside the band along M-Γ")));
    }
    let (k, k_ref) = (c.acos(), c_ref.acos());
    Ok((k - k_ref).abs() / k_ref)
}

/// Transverse eigenmodes of a 1D cross-section.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet<T> {
    /// Ascending, with the free infinite-chain band bottom at 0.
    pub energies: Vec<T>,
    pub modes: Vec<Vec<T>>,
    pub cross_section: Vec<T>,
}

impl<T: Real> ModeSet<T> {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn bound_count(&self) -> usize {
        self.energies.iter().filter(|e| **e < T::zero()).count()
    }

    /// Lowest mode, with the sign fixed so its largest component is positive.
    pub fn ground(&self) -> Result<(T, Vec<T>)> {
        if self.energies.is_empty() || !(self.energies[0] < T::zero()) {
            return Err(MagnonError::Unbound(
                "cross-section has no bound transverse mode".into(),
            ));
        }
        Ok((self.energies[0], self.modes[0].clone()))
    }
}

fn fix_sign<T: Real>(v: &mut [T]) {
    let big = v.iter().copied().fold(T::zero(), |m, x| if x.abs() > m.abs() { x } else { m });
    if big < T::zero() {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Eigenmodes of the chain `−J` hopping, on-site `2J + ε(x)`.
///
/// The slice is treated as a window on an infinite chain, so every site gets
/// the bulk diagonal `2J`; this keeps "bound ⇔ E < 0" exact.
pub fn transverse_modes<T: Real>(slice: &[T], j: T) -> Result<ModeSet<T>> {
    if slice.len() < 3 {
        return Err(MagnonError::config("slice", "cross-section needs at least 3 sites"));
    }
    if let Some(k) = slice.iter().position(|e| !e.is_finite()) {
        return Err(MagnonError::Validation(format!("non-finite on-site energy at x = {k}")));
    }
    let n = slice.len();
    let diag: Vec<T> = slice.iter().map(|&e| T::lit(2.0) * j + e).collect();
    let off = vec![-j; n - 1];
    let eig = tridiagonal_eigen(&diag, &off).map_err(|e| match e {
        MagnonError::Numeric { message, residual } => MagnonError::Numeric {
            message: format!("{message}; slice = {slice:?}"),
            residual,
        },
        other => other,
    })?;
    let modes = (0..n)
        .map(|k| {
            let mut v = eig.vector(k).to_vec();
            fix_sign(&mut v);
            v
        })
        .collect();
    Ok(ModeSet {
        energies: eig.values,
        modes,
        cross_section: slice.to_vec(),
    })
}

/// Weight of `mode` within `|x − center| ≤ wg`.
pub fn confinement_factor<T: Real>(mode: &[T], center: T, wg: T) -> T {
    let cf: T = mode
        .iter()
        .enumerate()
        .filter(|(x, _)| (T::from_usize_lossy(*x) - center).abs() <= wg)
        .map(|(_, a)| *a * *a)
        .sum();
    cf.min(T::one())
}

pub fn count_confined_modes<T: Real>(ms: &ModeSet<T>, center: T, wg: T, threshold: T) -> usize {
    ms.modes
        .iter()
        .filter(|m| confinement_factor(m, center, wg) >= threshold)
        .count()
}

/// Cross-section of a wire-pair guide centred at `center` on an `n`-site chain.
pub fn guide_slice<T: Real>(n: usize, center: T, p: &WirePairProfile<T>) -> Result<Vec<T>> {
    (0..n).map(|x| wire_profile(T::from_usize_lossy(x) - center, p)).collect()
}

/// Cross-sections for two identical guides a centre-to-centre distance `sep`
/// apart, symmetric about the middle of an `n`-site chain: (left, right, both).
pub fn coupler_slices<T: Real>(
    n: usize,
    sep: T,
    p: &WirePairProfile<T>,
) -> Result<(Vec<T>, Vec<T>, Vec<T>)> {
    let mid = T::from_usize_lossy(n - 1) / T::lit(2.0);
    let half = sep / T::lit(2.0);
    let l = guide_slice(n, mid - half, p)?;
    let r = guide_slice(n, mid + half, p)?;
    let both = l.iter().zip(&r).map(|(a, b)| *a + *b).collect();
    Ok((l, r, both))
}

fn check_slices<T>(l: &[T], r: &[T], both: &[T]) -> Result<()> {
    if l.len() != r.len() || l.len() != both.len() {
        return Err(MagnonError::DimensionMismatch {
            expected: l.len(),
            found: if r.len() != l.len() { r.len() } else { both.len() },
        });
    }
    Ok(())
}

fn chain_apply<T: Real>(slice: &[T], j: T, v: &[T]) -> Vec<T> {
    let n = v.len();
    (0..n)
        .map(|x| {
            let mut y = (T::lit(2.0) * j + slice[x]) * v[x];
            if x > 0 {
                y = y - j * v[x - 1];
            }
            if x + 1 < n {
                y = y - j * v[x + 1];
            }
            y
        })
        .collect()
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

fn unbound(which: &str) -> MagnonError {
    MagnonError::Unbound(format!("{which} guide has no bound transverse mode"))
}

/// `|⟨L|H_both|R⟩|` with `|L⟩`, `|R⟩` the ground modes of each guide alone.
pub fn coupling_energy<T: Real>(l: &[T], r: &[T], both: &[T], j: T) -> Result<T> {
    check_slices(l, r, both)?;
    let (_, ml) = transverse_modes(l, j)?.ground().map_err(|_| unbound("left"))?;
    let (_, mr) = transverse_modes(r, j)?.ground().map_err(|_| unbound("right"))?;
    Ok(dot(&ml, &chain_apply(both, j, &mr)).abs())
}

/// Splitting of the two coupled-guide supermodes.
///
/// The joint cross-section is diagonalised exactly; the two eigenmodes with
/// the largest weight in `span{|L⟩, |R⟩}` are the even/odd pair. Population
/// launched in one guide transfers as `sin²(Δ·t/2)`, so `Δ` is the quantity
/// that sets the half-transfer length.
pub fn coupling_splitting<T: Real>(l: &[T], r: &[T], both: &[T], j: T) -> Result<T> {
    check_slices(l, r, both)?;
    let (_, ml) = transverse_modes(l, j)?.ground().map_err(|_| unbound("left"))?;
    let (_, mr) = transverse_modes(r, j)?.ground().map_err(|_| unbound("right"))?;
    // orthonormal basis of span{L, R}
    let s = dot(&ml, &mr);
    let norm = (T::one() - s * s).sqrt();
    if !(norm > T::lit(1e-6)) {
        return Err(MagnonError::Validation("guides overlap completely".into()));
    }
    let q: Vec<T> = mr.iter().zip(&ml).map(|(r, l)| (*r - s * *l) / norm).collect();
    let ms = transverse_modes(both, j)?;
    let mut w: Vec<(T, T)> = ms
        .modes
        .iter()
        .zip(&ms.energies)
        .map(|(m, e)| (dot(m, &ml).powi(2) + dot(m, &q).powi(2), *e))
        .collect();
    w.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    Ok((w[0].1 - w[1].1).abs())
}

/// `l½ = π·v / (2·J_ω)`.
pub fn half_transfer_length<T: Real>(v: T, j_omega: T) -> Result<T> {
    if !(j_omega > T::zero()) {
        return Err(MagnonError::Domain(format!("coupling energy must be > 0, got {j_omega}")));
    }
    Ok(T::PI() * v / (T::lit(2.0) * j_omega))
}
