use num_complex::Complex;

use crate::error::{MagnonError, Result};
use crate::lattice::{LatticeSpec, SpinState};
use crate::scalar::Real;

/// Gaussian wavepacket `exp(−Δx²/2φx² − Δy²/2φy²) · e^{i(kx·x + ky·y)}`.
///
/// `phi_x`, `phi_y` are amplitude standard deviations. With the `+i` carrier a
/// positive `ky` moves the packet towards larger `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct WavepacketParams<T> {
    pub x0: T,
    pub y0: T,
    pub phi_x: T,
    pub phi_y: T,
    pub kx: T,
    pub ky: T,
    /// Replaces the Gaussian x-factor, e.g. by a bound guide mode (length `nx`).
    pub transverse: Option<Vec<T>>,
}

impl<T: Real> WavepacketParams<T> {
    pub fn gaussian(x0: T, y0: T, phi: T, kx: T, ky: T) -> Self {
        Self {
            x0,
            y0,
            phi_x: phi,
            phi_y: phi,
            kx,
            ky,
            transverse: None,
        }
    }

    pub fn with_transverse(mut self, mode: Vec<T>) -> Self {
        self.transverse = Some(mode);
        self
    }

    fn validate(&self, lattice: &LatticeSpec<T>) -> Result<()> {
        if !(self.phi_x > T::zero() && self.phi_x.is_finite()) {
            return Err(MagnonError::config("packet.phi_x", "must be finite and > 0"));
        }
        if !(self.phi_y > T::zero() && self.phi_y.is_finite()) {
            return Err(MagnonError::config("packet.phi_y", "must be finite and > 0"));
        }
        for (name, v) in [("packet.x0", self.x0), ("packet.y0", self.y0), ("packet.kx", self.kx), ("packet.ky", self.ky)] {
            if !v.is_finite() {
                return Err(MagnonError::config(name, "must be finite"));
            }
        }
        if let Some(m) = &self.transverse {
            if m.len() != lattice.nx {
                return Err(MagnonError::DimensionMismatch {
                    expected: lattice.nx,
                    found: m.len(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Packet<T> {
    pub state: SpinState<T>,
    /// Fraction of the untruncated Gaussian weight that fell outside the lattice.
    pub clipped: T,
}

impl<T: Real> Packet<T> {
    pub fn warning(&self) -> Option<String> {
        (self.clipped > T::lit(1e-6)).then(|| {
            format!("packet clipped by the lattice boundary: {:.3e} of its weight lost", self.clipped)
        })
    }
}

fn gauss<T: Real>(u: T, c: T, phi: T) -> T {
    let d = (u - c) / phi;
    (-(d * d) / T::lit(2.0)).exp()
}

/// Weight of the sampled Gaussian inside `[0, n)` relative to all integers.
fn inside_fraction<T: Real>(n: usize, c: T, phi: T) -> T {
    let reach = (T::lit(12.0) * phi).ceil().to_i64().unwrap_or(0);
    let c0 = c.round().to_i64().unwrap_or(0);
    let (mut all, mut inside) = (T::zero(), T::zero());
    for k in (c0 - reach)..=(c0 + reach) {
        let g = gauss(T::lit(k as f64), c, phi);
        all = all + g * g;
        if k >= 0 && (k as usize) < n {
            inside = inside + g * g;
        }
    }
    if all > T::zero() {
        inside / all
    } else {
        T::zero()
    }
}

pub fn make_packet<T: Real>(p: &WavepacketParams<T>, lattice: &LatticeSpec<T>) -> Result<Packet<T>> {
    p.validate(lattice)?;
    let (nx, ny) = (lattice.nx, lattice.ny);
    let fx: Vec<Complex<T>> = (0..nx)
        .map(|i| {
            let x = T::from_usize_lossy(i);
            let env = match &p.transverse {
                Some(m) => m[i],
                None => gauss(x, p.x0, p.phi_x),
            };
            Complex::from_polar(env, p.kx * x)
        })
        .collect();
    let fy: Vec<Complex<T>> = (0..ny)
        .map(|j| {
            let y = T::from_usize_lossy(j);
            Complex::from_polar(gauss(y, p.y0, p.phi_y), p.ky * y)
        })
        .collect();
    let mut amps = Vec::with_capacity(nx * ny);
    for b in &fy {
        amps.extend(fx.iter().map(|a| a * b));
    }
    let state = SpinState::from_amplitudes(nx, ny, amps)?;
    let fx_in = match p.transverse {
        Some(_) => T::one(),
        None => inside_fraction(nx, p.x0, p.phi_x),
    };
    let clipped = T::one() - fx_in * inside_fraction(ny, p.y0, p.phi_y);
    Ok(Packet {
        state,
        clipped: clipped.max(T::zero()),
    })
}
