//! Helpers shared by the runners.

use magnon_core::dynamics::masked_population;
use magnon_core::spectral::{group_velocity, guide_slice, transverse_modes};
use magnon_core::{
    build_hamiltonian, layout_to_field, Boundary, CouplingSpec, Field, Hamiltonian, Lattice, Layout, Propagator,
    PropagatorConfig, State, WirePairProfile,
};

use crate::config::{ExperimentConfig, Transverse};
use crate::error::{ExpError, Result};
use crate::record::RunRecord;

pub(crate) fn lattice(nx: usize, ny: usize, cfg: &ExperimentConfig) -> Result<Lattice> {
    let c = CouplingSpec::new(cfg.lattice.je, cfg.lattice.jd)?;
    Ok(Lattice::new(nx, ny, c, Boundary::HardWall)?)
}

/// Rasterises `layout`, keeping layout warnings in the record.
pub(crate) fn hamiltonian(lat: &Lattice, layout: &Layout<f64>, rec: &mut RunRecord) -> Result<(Field, Hamiltonian)> {
    let (f, warnings) = layout_to_field(layout, lat)?;
    for w in warnings {
        rec.warn(format!("{}: {}", w.element, w.message));
    }
    let h = build_hamiltonian(lat, &f)?;
    Ok((f, h))
}

/// Longitudinal group velocity of the configured carrier.
pub(crate) fn speed(cfg: &ExperimentConfig) -> f64 {
    group_velocity(cfg.packet.kx, cfg.packet.ky, cfg.lattice.je).1
}

/// Transverse profile across an `n`-site row for a guide centred at `center`.
pub(crate) fn guide_mode(
    n: usize,
    center: f64,
    p: &WirePairProfile<f64>,
    which: Transverse,
    je: f64,
) -> Result<Option<Vec<f64>>> {
    if which == Transverse::Gaussian {
        return Ok(None);
    }
    let ms = transverse_modes(&guide_slice(n, center, p)?, je)?;
    let k = match which {
        Transverse::Ground => 0,
        _ => 1,
    };
    if ms.bound_count() <= k {
        return Err(ExpError::Core(magnon_core::MagnonError::Unbound(format!(
            "unbound guide: eps_min = {} has {} bound transverse mode(s), mode {k} requested",
            p.eps_min,
            ms.bound_count()
        ))));
    }
    Ok(Some(ms.modes[k].clone()))
}

/// Population within `band` sites of the lattice edge.
pub(crate) fn edge_population(s: &State, band: usize) -> f64 {
    let (nx, ny) = (s.nx, s.ny);
    let mask: Vec<bool> = (0..nx * ny)
        .map(|k| {
            let (i, j) = (k % nx, k / nx);
            i < band || j < band || i + band >= nx || j + band >= ny
        })
        .collect();
    masked_population(s, &mask)
}

/// Steps `s` forward to `t_end` in increments of at most `dt`, calling
/// `observe` at t = 0 and after every step.
pub(crate) fn run(
    h: &Hamiltonian,
    s: State,
    t_end: f64,
    pcfg: &PropagatorConfig<f64>,
    mut observe: impl FnMut(f64, &State) -> Result<()>,
) -> Result<State> {
    let mut prop = Propagator::new(h, pcfg)?;
    let steps = ((t_end / pcfg.t_step).ceil() as usize).max(1);
    let dt = t_end / steps as f64;
    let mut s = s;
    observe(0.0, &s)?;
    for k in 1..=steps {
        s = prop.advance(&s, dt)?;
        observe(k as f64 * dt, &s)?;
    }
    Ok(s)
}

/// Records a frame when `t` crosses a multiple of the configured spacing.
pub(crate) struct FrameClock {
    every: Option<f64>,
    next: f64,
    cutoff: f64,
}

impl FrameClock {
    pub(crate) fn new(cfg: &ExperimentConfig) -> Self {
        Self {
            every: cfg.run.frame_every,
            next: 0.0,
            cutoff: cfg.run.frame_cutoff,
        }
    }

    pub(crate) fn tick(&mut self, t: f64, s: &State, rec: &mut RunRecord) {
        if let Some(e) = self.every {
            if t + 1e-9 >= self.next {
                rec.frame(t, s, self.cutoff);
                while self.next <= t + 1e-9 {
                    self.next += e;
                }
            }
        }
    }
}
