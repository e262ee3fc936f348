//! Wavepackets, time evolution and measurements.

mod observe;
mod packet;
mod propagate;

pub use observe::{
    centroid, masked_population, region_population, relative_phase, row_populations, spread, Region,
};
pub use packet::{make_packet, Packet, WavepacketParams};
pub use propagate::{evolve, Method, Propagator, PropagatorConfig, EXACT_MAX_SITES};

use crate::error::{MagnonError, Result};
use crate::lattice::{SparseHamiltonian, SpinState};
use crate::scalar::Real;

/// Reflection and transmission of a packet travelling along +y through a
/// scatterer occupying rows `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scattering<T> {
    pub reflected: T,
    pub transmitted: T,
    /// Population left between `lo` and `hi` at the end of the run.
    pub residual: T,
}

/// Runs the packet for `t_run` and splits the population at the scatterer.
/// Fails if the packet never reached the scatterer or has not cleared it.
pub fn scattering_rt<T: Real>(
    h: &SparseHamiltonian<T>,
    packet: &SpinState<T>,
    lo: T,
    hi: T,
    t_run: T,
    cfg: &PropagatorConfig<T>,
) -> Result<Scattering<T>> {
    if !(lo <= hi) {
        return Err(MagnonError::config("scatterer", "lower edge must not exceed upper edge"));
    }
    let window = Region::rows(lo, hi);
    let mask = window.mask(packet.nx, packet.ny);
    let mut prop = Propagator::new(h, cfg)?;
    let steps = (t_run / cfg.t_step).ceil().to_usize().unwrap_or(0).max(1);
    let dt = t_run / T::from_usize_lossy(steps);
    let mut s = packet.clone();
    let mut peak = masked_population(&s, &mask);
    for _ in 0..steps {
        s = prop.advance(&s, dt)?;
        peak = peak.max(masked_population(&s, &mask));
    }
    let residual = masked_population(&s, &mask);
    if peak < T::lit(0.05) {
        return Err(MagnonError::InconclusiveScattering(format!(
            "packet never reached the scatterer (peak window population {peak:.3e})"
        )));
    }
    if residual > T::lit(0.01) {
        return Err(MagnonError::InconclusiveScattering(format!(
            "packet has not cleared the scatterer by t = {t_run} (window population {residual:.3e})"
        )));
    }
    let rows = row_populations(&s);
    let (mut reflected, mut transmitted) = (T::zero(), T::zero());
    for (j, p) in rows.into_iter().enumerate() {
        let y = T::from_usize_lossy(j);
        if y < lo {
            reflected = reflected + p;
        } else if y > hi {
            transmitted = transmitted + p;
        }
    }
    Ok(Scattering {
        reflected,
        transmitted,
        residual,
    })
}
