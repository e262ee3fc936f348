//! Crystal phase shift and reflection in a hard-wall channel.
//!
//! The channel is `dmc.width` sites wide and the packet is uniform across
//! it, so the problem is effectively one-dimensional. For the phase
//! measurement the crystal ends at the top wall: the packet passes it,
//! reflects, passes it again and is compared with a run without crystal.

use std::time::Instant;

use magnon_core::dynamics::{region_population, relative_phase, scattering_rt, Scattering};
use magnon_core::{make_packet, DmcSpec, Layout, MagnonError, Region, State, WavepacketParams};
use rayon::prelude::*;

use crate::common;
use crate::config::ExperimentConfig;
use crate::error::{ExpError, Result};
use crate::fit::{linear_fit, unwrap_phase};
use crate::record::{RunRecord, Table};

/// First-order phase picked up in one pass over the rows `[lo, hi]`:
/// `−(1/v)·Σ ε(y)`. Double it for a round trip.
pub fn predict_dmc_phase(spec: &DmcSpec<f64>, v: f64, lo: f64, hi: f64) -> Result<f64> {
    if !(v > 0.0) {
        return Err(MagnonError::Domain(format!("group velocity must be > 0, got {v}")).into());
    }
    Ok(-spec.profile()?.integral(lo, hi) / v)
}

/// Geometry of the reflection measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseGeometry {
    pub nx: usize,
    pub ny: usize,
    pub y0: f64,
    pub start: f64,
    /// Readout rows `[0, window_hi]`.
    pub window_hi: f64,
    pub t_end: f64,
}

pub fn phase_geometry(cfg: &ExperimentConfig) -> Result<PhaseGeometry> {
    let d = &cfg.dmc;
    let p = &cfg.packet;
    let v = common::speed(cfg);
    if !(v > 0.0) {
        return Err(ExpError::Config {
            field: "packet.ky".into(),
            reason: "crystal runs need a packet moving along +y".into(),
        });
    }
    let y0 = p.y0.unwrap_or((5.0 * p.phi_y).ceil() + 2.0);
    let last = (2 * d.n_periods - 1) as f64 * d.period / 2.0;
    let gap = (4.0 * p.phi_y + 4.0 * d.height()).ceil();
    let ny = cfg.lattice.ny.unwrap_or((y0 + gap + last).ceil() as usize + 1);
    let start = (ny - 1) as f64 - last;
    if start - 2.0 * d.height() < y0 + 3.0 * p.phi_y {
        return Err(ExpError::Config {
            field: "lattice.ny".into(),
            reason: format!("{ny} rows leave no room between the launch point and the crystal"),
        });
    }
    Ok(PhaseGeometry {
        nx: cfg.lattice.nx.unwrap_or(d.width),
        ny,
        y0,
        start,
        window_hi: y0 + 3.0 * p.phi_y,
        t_end: 2.0 * ((ny - 1) as f64 - y0) / v,
    })
}

fn crystal(cfg: &ExperimentConfig, eps: f64, start: f64) -> Result<DmcSpec<f64>> {
    let d = &cfg.dmc;
    let mut s = DmcSpec::along_y(d.n_periods, d.period, eps, start)?;
    s.height = d.height();
    s.validate()?;
    Ok(s)
}

fn channel_packet(cfg: &ExperimentConfig, nx: usize, ny: usize, y0: f64) -> Result<State> {
    let lat = common::lattice(nx, ny, cfg)?;
    let p = &cfg.packet;
    let mut w = WavepacketParams::gaussian((nx - 1) as f64 / 2.0, y0, p.phi_x, 0.0, p.ky);
    w.phi_y = p.phi_y;
    w.transverse = Some(vec![1.0; nx]);
    Ok(make_packet(&w, &lat)?.state)
}

/// Final state of the reflection run with crystal depth `eps`.
pub fn reflection_run(cfg: &ExperimentConfig, g: &PhaseGeometry, eps: f64) -> Result<State> {
    let lat = common::lattice(g.nx, g.ny, cfg)?;
    let mut scratch = RunRecord::new("dmc", cfg);
    let layout = Layout::new().with_dmc(crystal(cfg, eps, g.start)?);
    let (_, h) = common::hamiltonian(&lat, &layout, &mut scratch)?;
    let s = channel_packet(cfg, g.nx, g.ny, g.y0)?;
    common::run(&h, s, g.t_end, &cfg.propagator.to_core(), |_, _| Ok(()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub eps: f64,
    /// Unwrapped phase relative to the crystal-free run.
    pub phase: f64,
    pub predicted: f64,
    pub window_population: f64,
}

/// Phase of the returning packet for every depth in `dmc.eps_values`.
pub fn phase_sweep(cfg: &ExperimentConfig) -> Result<(PhaseGeometry, Vec<PhasePoint>)> {
    let g = phase_geometry(cfg)?;
    let window = Region::rows(0.0, g.window_hi);
    let reference = reflection_run(cfg, &g, 0.0)?;
    let v = common::speed(cfg);
    let raw: Vec<(f64, f64, f64)> = cfg
        .dmc
        .eps_values
        .par_iter()
        .map(|&eps| {
            let s = reflection_run(cfg, &g, eps)?;
            let ph = relative_phase(&reference, &s, &window)?;
            Ok((eps, ph, region_population(&s, &window)))
        })
        .collect::<Result<_>>()?;
    let unwrapped = unwrap_phase(&raw.iter().map(|r| r.1).collect::<Vec<_>>());
    raw.iter()
        .zip(unwrapped)
        .map(|(&(eps, _, pop), phase)| {
            let spec = crystal(cfg, eps, g.start)?;
            Ok(PhasePoint {
                eps,
                phase,
                predicted: 2.0 * predict_dmc_phase(&spec, v, g.y0, (g.ny - 1) as f64)?,
                window_population: pop,
            })
        })
        .collect::<Result<_>>()
        .map(|pts| (g, pts))
}

/// Reflection and transmission through a crystal in the middle of a long channel.
pub fn transmission_run(cfg: &ExperimentConfig, eps: f64) -> Result<Scattering<f64>> {
    let d = &cfg.dmc;
    let p = &cfg.packet;
    let v = common::speed(cfg);
    if !(v > 0.0) {
        return Err(ExpError::Config {
            field: "packet.ky".into(),
            reason: "crystal runs need a packet moving along +y".into(),
        });
    }
    let y0 = (5.0 * p.phi_y).ceil() + 2.0;
    let start = y0 + (4.0 * p.phi_y + 3.0 * d.height()).ceil();
    let spec = crystal(cfg, eps, start)?;
    let (lo, hi) = (start - 2.0 * d.height(), spec.end() + 2.0 * d.height());
    let t_run = (hi - y0 + 6.0 * p.phi_y) / v;
    let ny = (hi + 10.0 * p.phi_y).ceil() as usize + 1;
    let nx = d.width;
    let lat = common::lattice(nx, ny, cfg)?;
    let mut scratch = RunRecord::new("dmc", cfg);
    let (_, h) = common::hamiltonian(&lat, &Layout::new().with_dmc(spec), &mut scratch)?;
    let s = channel_packet(cfg, nx, ny, y0)?;
    Ok(scattering_rt(&h, &s, lo, hi, t_run, &cfg.propagator.to_core())?)
}

/// Phase sweep with a linear fit, plus reflection/transmission for `dmc.rt_values`.
pub fn run_dmc(cfg: &ExperimentConfig) -> Result<RunRecord> {
    let clock = Instant::now();
    let mut rec = RunRecord::new("dmc", cfg);
    let (g, pts) = phase_sweep(cfg)?;
    let mut t = Table::new(&["eps_dmc", "phase", "phase_predicted", "window_population"]);
    for p in &pts {
        t.push(vec![p.eps, p.phase, p.predicted, p.window_population]);
        rec.track(p.eps, "phase", p.phase);
        rec.track(p.eps, "phase_predicted", p.predicted);
        rec.track(p.eps, "pop_window", p.window_population.min(1.0));
    }
    let x: Vec<f64> = pts.iter().map(|p| p.eps).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.phase).collect();
    let fit = linear_fit(&x, &y)?;
    rec.set("phase_slope", fit.slope);
    rec.set("phase_intercept", fit.intercept);
    rec.set("phase_r2", fit.r2);
    rec.set("ny", g.ny);
    rec.set("crystal_start", g.start);
    let mut rt = Table::new(&["eps_dmc", "reflected", "transmitted", "residual"]);
    for &eps in &cfg.dmc.rt_values {
        match transmission_run(cfg, eps) {
            Ok(s) => {
                rt.push(vec![eps, s.reflected, s.transmitted, s.residual]);
                rec.track(eps, "pop_reflected", s.reflected.min(1.0));
                rec.track(eps, "pop_transmitted", s.transmitted.min(1.0));
            }
            Err(ExpError::Core(MagnonError::InconclusiveScattering(m))) => {
                rec.warn(format!("eps_dmc = {eps}: {m}"));
            }
            Err(e) => return Err(e),
        }
    }
    rec.extra.push(("scattering.csv".into(), rt.to_csv()));
    rec.table = Some(t);
    rec.wall_time_s = clock.elapsed().as_secs_f64();
    Ok(rec)
}
