//! Bend loss versus radius of curvature.

use std::f64::consts::FRAC_PI_2;
use std::time::Instant;

use magnon_core::dynamics::masked_population;
use magnon_core::{make_packet, GuidePath, GuideSpec, Layout, PathBuilder, Point, WavepacketParams, WirePairProfile};
use rayon::prelude::*;

use crate::common::{self, FrameClock};
use crate::config::ExperimentConfig;
use crate::error::{ExpError, Result};
use crate::record::{RunRecord, Table};

#[derive(Debug, Clone)]
pub struct BendResult {
    pub radius: f64,
    pub loss: f64,
    pub pop_before: f64,
    pub pop_after: f64,
    pub nx: usize,
    pub ny: usize,
    /// (t, population in the tube past the end of the arc)
    pub track: Vec<(f64, f64)>,
    pub tube_track: Vec<(f64, f64)>,
    pub warnings: Vec<String>,
    pub record: Option<RunRecord>,
}

/// Lead-in straight, a right-hand arc of `radius` turning by `bend.angle_deg`,
/// lead-out straight. Returns the path (shifted onto the lattice) and the
/// arc-length position of the end of the arc.
pub fn bend_path(cfg: &ExperimentConfig, radius: f64, x_shift: f64) -> Result<(GuidePath<f64>, f64)> {
    let b = &cfg.bend;
    let sweep = -b.angle_deg.to_radians();
    let path = PathBuilder::new(Point::new(x_shift, 0.0), FRAC_PI_2)
        .straight(b.lead_in)
        .arc(radius, sweep)
        .straight(b.lead_out)
        .build()?;
    Ok((path, b.lead_in + radius * sweep.abs()))
}

fn lattice_size(cfg: &ExperimentConfig, radius: f64) -> Result<(usize, usize, f64)> {
    let (probe, _) = bend_path(cfg, radius, 0.0)?;
    let pts = probe.sample(1.0);
    let (mut x0, mut x1, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in &pts {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    let m = cfg.bend.margin;
    let shift = m - x0;
    let need_x = (x1 - x0 + 2.0 * m).ceil() as usize + 1;
    let need_y = (y1 + m).ceil() as usize + 1;
    let reach = cfg.guide.wg + cfg.guide.d;
    match (cfg.lattice.nx, cfg.lattice.ny) {
        (None, None) => Ok((need_x, need_y, shift)),
        (nx, ny) => {
            let nx = nx.unwrap_or(need_x);
            let ny = ny.unwrap_or(need_y);
            if (nx as f64) < x1 - x0 + 2.0 * reach || (ny as f64) < y1 + reach {
                return Err(ExpError::Config {
                    field: "lattice".into(),
                    reason: format!(
                        "bend of radius {radius} needs at least {:.0} x {:.0} sites, lattice is {nx} x {ny}",
                        x1 - x0 + 2.0 * reach,
                        y1 + reach
                    ),
                });
            }
            Ok((nx, ny, (nx as f64 - (x1 - x0)) / 2.0 - x0))
        }
    }
}

/// One bend; with `keep_record` the snapshots are returned in `record`.
pub fn run_single_bend(cfg: &ExperimentConfig, radius: f64, keep_record: bool) -> Result<BendResult> {
    let g = &cfg.guide;
    let p = &cfg.packet;
    let profile = WirePairProfile::new(g.wg, g.d, g.eps_min)?;
    let (nx, ny, shift) = lattice_size(cfg, radius)?;
    let (path, arc_end) = bend_path(cfg, radius, shift)?;
    let lat = common::lattice(nx, ny, cfg)?;
    let mut rec = RunRecord::new("bend", cfg);
    let (_, h) = common::hamiltonian(&lat, &Layout::new().with_guide(GuideSpec::new(path.clone(), profile)), &mut rec)?;
    let y0 = p.y0.unwrap_or((5.0 * p.phi_y).ceil() + 2.0);
    if y0 + 2.0 * p.phi_y > cfg.bend.lead_in + radius {
        rec.warn("packet starts close to the bend; loss is measured against the launch population");
    }
    let mode = common::guide_mode(nx, shift, &profile, p.transverse, cfg.lattice.je)?;
    let mut w = WavepacketParams::gaussian(shift, y0, p.phi_x, p.kx, p.ky);
    w.phi_y = p.phi_y;
    if let Some(m) = mode {
        w = w.with_transverse(m);
    }
    let packet = make_packet(&w, &lat)?;
    if let Some(m) = packet.warning() {
        rec.warn(m);
    }
    let v = common::speed(cfg);
    if !(v > 0.0) {
        return Err(ExpError::Config {
            field: "packet.ky".into(),
            reason: "bend study needs a packet moving along +y".into(),
        });
    }
    let t_end = (arc_end - y0 + cfg.bend.lag) / v;
    let mut tube = vec![false; nx * ny];
    let mut past = vec![false; nx * ny];
    for (k, (a, b)) in tube.iter_mut().zip(past.iter_mut()).enumerate() {
        let q = path.project(Point::new((k % nx) as f64, (k / nx) as f64));
        *a = q.distance <= g.wg;
        *b = *a && q.along > arc_end;
    }
    let mut track = Vec::new();
    let mut tube_track = Vec::new();
    let mut frames = FrameClock::new(cfg);
    let mut pop_before = 0.0;
    let last = common::run(&h, packet.state, t_end, &cfg.propagator.to_core(), |t, s| {
        let pt = masked_population(s, &tube).min(1.0);
        if t == 0.0 {
            pop_before = pt;
        }
        tube_track.push((t, pt));
        track.push((t, masked_population(s, &past).min(1.0)));
        if keep_record {
            frames.tick(t, s, &mut rec);
        }
        Ok(())
    })?;
    let pop_after = masked_population(&last, &past).min(1.0);
    Ok(BendResult {
        radius,
        loss: 1.0 - pop_after / pop_before,
        pop_before,
        pop_after,
        nx,
        ny,
        track,
        tube_track,
        warnings: rec.warnings.clone(),
        record: keep_record.then_some(rec),
    })
}

/// Bend loss for every radius in `bend.radii`.
pub fn run_bend_study(cfg: &ExperimentConfig) -> Result<RunRecord> {
    let clock = Instant::now();
    let mut rec = RunRecord::new("bend", cfg);
    // frames.csv has no radius column, so snapshots are kept for single-radius runs only
    let keep_frames = cfg.run.frame_every.is_some() && cfg.bend.radii.len() == 1;
    if cfg.run.frame_every.is_some() && !keep_frames {
        rec.warn("frames are only written when bend.radii has a single entry");
    }
    let results: Vec<BendResult> = cfg
        .bend
        .radii
        .par_iter()
        .map(|r| run_single_bend(cfg, *r, keep_frames))
        .collect::<Result<_>>()?;
    let mut t = Table::new(&["radius", "loss", "pop_before", "pop_after", "nx", "ny"]);
    for b in &results {
        t.push(vec![b.radius, b.loss, b.pop_before, b.pop_after, b.nx as f64, b.ny as f64]);
        for (tt, v) in &b.tube_track {
            rec.track(*tt, format!("pop_tube_r{}", b.radius), *v);
        }
        for (tt, v) in &b.track {
            rec.track(*tt, format!("pop_past_bend_r{}", b.radius), *v);
        }
        for w in &b.warnings {
            rec.warn(format!("radius {}: {w}", b.radius));
        }
        if let Some(r) = &b.record {
            rec.frames.extend(r.frames.iter().cloned());
            rec.tracks.extend(r.tracks.iter().cloned());
        }
        rec.set(&format!("loss_r{}", b.radius), b.loss);
    }
    rec.table = Some(t);
    rec.wall_time_s = clock.elapsed().as_secs_f64();
    Ok(rec)
}
