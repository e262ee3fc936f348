//! Free and guided packet propagation.

use std::f64::consts::{FRAC_PI_2, SQRT_2};
use std::time::Instant;

use magnon_core::dynamics::{centroid, masked_population, spread};
use magnon_core::{make_packet, GuidePath, GuideSpec, Layout, Point, Region, WavepacketParams, WirePairProfile};

use crate::common::{self, FrameClock};
use crate::config::{ExperimentConfig, Transverse};
use crate::error::Result;
use crate::fit::linear_fit;
use crate::record::RunRecord;

/// Probability std of a Gaussian packet after time `t` along an axis where
/// the band curvature is `2J·cos k`.
fn spread_after(phi: f64, k: f64, j: f64, t: f64) -> f64 {
    let s0 = phi / SQRT_2;
    (s0 * s0 + (j * k.cos() * t / s0).powi(2)).sqrt()
}

fn travel_time(cfg: &ExperimentConfig) -> f64 {
    let v = common::speed(cfg).abs();
    // a resting packet is run for the time a fast one needs
    cfg.run.distance / if v > 1e-3 { v } else { 2.0 * cfg.lattice.je }
}

/// Packet released on an empty sheet.
pub fn run_free_propagation(cfg: &ExperimentConfig) -> Result<RunRecord> {
    let clock = Instant::now();
    let mut rec = RunRecord::new("free", cfg);
    let p = &cfg.packet;
    let j = cfg.lattice.je;
    let t_end = travel_time(cfg);
    let sx = spread_after(p.phi_x, p.kx, j, t_end);
    let sy = spread_after(p.phi_y, p.ky, j, t_end);
    let nx = cfg.lattice.nx.unwrap_or(((14.0 * sx).ceil() as usize + 2).max(32));
    let y0 = p.y0.unwrap_or((5.0 * p.phi_y).ceil() + 2.0);
    let ny = cfg
        .lattice
        .ny
        .unwrap_or((y0 + cfg.run.distance + 7.0 * sy).ceil() as usize + 2);
    let lat = common::lattice(nx, ny, cfg)?;
    let (_, h) = common::hamiltonian(&lat, &Layout::new(), &mut rec)?;
    let mut w = WavepacketParams::gaussian(p.x0.unwrap_or((nx - 1) as f64 / 2.0), y0, p.phi_x, p.kx, p.ky);
    w.phi_y = p.phi_y;
    let packet = make_packet(&w, &lat)?;
    if let Some(m) = packet.warning() {
        rec.warn(m);
    }
    let mut frames = FrameClock::new(cfg);
    let mut ts = Vec::new();
    let mut ys = Vec::new();
    let mut edge_max: f64 = 0.0;
    common::run(&h, packet.state, t_end, &cfg.propagator.to_core(), |t, s| {
        let (cx, cy) = centroid(s);
        let (sx, sy) = spread(s);
        rec.track(t, "centroid_x", cx);
        rec.track(t, "centroid_y", cy);
        rec.track(t, "sigma_x", sx);
        rec.track(t, "sigma_y", sy);
        rec.track(t, "pop_total", s.norm().powi(2).min(1.0));
        edge_max = edge_max.max(common::edge_population(s, 3));
        ts.push(t);
        ys.push(cy);
        frames.tick(t, s, &mut rec);
        Ok(())
    })?;
    if edge_max > 1e-4 {
        rec.warn(format!("packet hits boundary: up to {edge_max:.3e} of the population within 3 sites of the edge"));
    }
    let fit = linear_fit(&ts, &ys)?;
    let sx: Vec<f64> = rec.series("sigma_x").iter().map(|v| v.1).collect();
    let sy: Vec<f64> = rec.series("sigma_y").iter().map(|v| v.1).collect();
    let half = ts.len() / 2;
    let rate_x = linear_fit(&ts[half..], &sx[half..]).map(|f| f.slope).unwrap_or(0.0);
    let rate_y = linear_fit(&ts[half..], &sy[half..]).map(|f| f.slope).unwrap_or(0.0);
    rec.set("nx", nx);
    rec.set("ny", ny);
    rec.set("t_end", t_end);
    rec.set("speed", fit.slope);
    rec.set("speed_r2", fit.r2);
    rec.set("expected_speed", common::speed(cfg));
    rec.set("sigma_x0", sx[0]);
    rec.set("sigma_y0", sy[0]);
    rec.set("sigma_x_growth", sx[sx.len() - 1] / sx[0]);
    rec.set("sigma_y_growth", sy[sy.len() - 1] / sy[0]);
    rec.set("sigma_x_rate", rate_x);
    rec.set("sigma_y_rate", rate_y);
    rec.set("edge_population_max", edge_max);
    rec.wall_time_s = clock.elapsed().as_secs_f64();
    Ok(rec)
}

/// Straight vertical guide through the middle of the lattice.
pub(crate) fn straight_guide(nx: usize, ny: usize, p: WirePairProfile<f64>) -> Result<GuideSpec<f64>> {
    let xc = (nx - 1) as f64 / 2.0;
    Ok(GuideSpec::new(
        GuidePath::straight(Point::new(xc, 0.0), FRAC_PI_2, (ny - 1) as f64)?,
        p,
    ))
}

/// Packet launched into one straight guide.
pub fn run_guided_propagation(cfg: &ExperimentConfig) -> Result<RunRecord> {
    let clock = Instant::now();
    let mut rec = RunRecord::new("guide", cfg);
    let p = &cfg.packet;
    let g = &cfg.guide;
    let j = cfg.lattice.je;
    let t_end = travel_time(cfg);
    let profile = WirePairProfile::new(g.wg, g.d, g.eps_min)?;
    let nx = cfg.lattice.nx.unwrap_or(2 * (3.0 * (g.wg + g.d)).ceil() as usize + 1);
    let y0 = p.y0.unwrap_or((5.0 * p.phi_y).ceil() + 2.0);
    let sy = spread_after(p.phi_y, p.ky, j, t_end);
    let ny = cfg
        .lattice
        .ny
        .unwrap_or((y0 + cfg.run.distance + 7.0 * sy).ceil() as usize + 2);
    let lat = common::lattice(nx, ny, cfg)?;
    let guide = straight_guide(nx, ny, profile)?;
    let xc = (nx - 1) as f64 / 2.0;
    let (_, h) = common::hamiltonian(&lat, &Layout::new().with_guide(guide.clone()), &mut rec)?;
    let which = if g.eps_min == 0.0 && p.transverse != Transverse::Gaussian {
        rec.warn("eps_min = 0: no guide, launching a Gaussian packet");
        Transverse::Gaussian
    } else {
        p.transverse
    };
    let mut w = WavepacketParams::gaussian(p.x0.unwrap_or(xc), y0, p.phi_x, p.kx, p.ky);
    w.phi_y = p.phi_y;
    if let Some(m) = common::guide_mode(nx, xc, &profile, which, j)? {
        w = w.with_transverse(m);
    }
    let packet = make_packet(&w, &lat)?;
    if let Some(m) = packet.warning() {
        rec.warn(m);
    }
    let tube = Region::tube(guide.path.clone(), g.wg).mask(nx, ny);
    let mut frames = FrameClock::new(cfg);
    let mut min_tube: f64 = 1.0;
    let mut widths = Vec::new();
    let mut ts = Vec::new();
    let mut ys = Vec::new();
    common::run(&h, packet.state, t_end, &cfg.propagator.to_core(), |t, s| {
        let pt = masked_population(s, &tube).min(1.0);
        let (_, cy) = centroid(s);
        let (sx, _) = spread(s);
        rec.track(t, "pop_tube", pt);
        rec.track(t, "centroid_y", cy);
        rec.track(t, "sigma_x", sx);
        rec.track(t, "pop_total", s.norm().powi(2).min(1.0));
        min_tube = min_tube.min(pt);
        widths.push(sx);
        ts.push(t);
        ys.push(cy);
        frames.tick(t, s, &mut rec);
        Ok(())
    })?;
    let w0 = widths[0];
    let width_change = widths.iter().map(|w| (w / w0 - 1.0).abs()).fold(0.0, f64::max);
    rec.set("nx", nx);
    rec.set("ny", ny);
    rec.set("t_end", t_end);
    rec.set("distance", cfg.run.distance);
    rec.set("min_tube_population", min_tube);
    rec.set("sigma_x0", w0);
    rec.set("sigma_x_growth", widths[widths.len() - 1] / w0);
    rec.set("width_change_max", width_change);
    rec.set("speed", linear_fit(&ts, &ys)?.slope);
    rec.wall_time_s = clock.elapsed().as_secs_f64();
    Ok(rec)
}
