//! Michelson interferometer: a directional coupler splits the packet into two
//! arms that end at the top edge of the sheet; a crystal in the right arm
//! shifts the phase of that arm, and the reflected halves recombine in the
//! coupler on the way back.

use std::f64::consts::PI;
use std::time::Instant;

use magnon_core::dynamics::masked_population;
use magnon_core::spectral::{coupler_slices, coupling_splitting};
use magnon_core::{
    make_packet, Axis, DmcSpec, GuidePath, GuideSpec, Layout, Point, Region, State, WavepacketParams,
    WirePairProfile,
};
use rayon::prelude::*;

use crate::common::{self, FrameClock};
use crate::config::{ExperimentConfig, Transverse};
use crate::dmc::predict_dmc_phase;
use crate::error::{ExpError, Result};
use crate::fit::{sine_fit, SineFit};
use crate::record::{RunRecord, Table};

/// Resolved device geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct MichelsonDesign {
    pub nx: usize,
    pub ny: usize,
    /// Device midline.
    pub xc: f64,
    pub y0: f64,
    pub wg: f64,
    pub d: f64,
    pub eps_min: f64,
    pub sep_far: f64,
    pub sep_near: f64,
    pub lead: f64,
    pub taper: f64,
    pub parallel: f64,
    pub arm: f64,
    /// First wire of the crystal; its last wire sits on the top row.
    pub crystal_start: f64,
    /// Splitter phase `∫Δ/(2v) dy` for one pass; π/4 for a 50/50 split.
    pub splitter_phase: f64,
    pub t_end: f64,
}

impl MichelsonDesign {
    fn y_taper_in(&self) -> f64 {
        self.lead
    }

    fn y_parallel(&self) -> f64 {
        self.lead + self.taper
    }

    fn y_taper_out(&self) -> f64 {
        self.y_parallel() + self.parallel
    }

    fn y_arms(&self) -> f64 {
        self.y_taper_out() + self.taper
    }

    /// Centre-to-centre separation at height `y`.
    pub fn separation(&self, y: f64) -> f64 {
        let (a, b, c, e) = (self.y_taper_in(), self.y_parallel(), self.y_taper_out(), self.y_arms());
        let span = self.sep_far - self.sep_near;
        if y <= a || y >= e {
            self.sep_far
        } else if y < b {
            self.sep_far - span * (y - a) / self.taper
        } else if y <= c {
            self.sep_near
        } else {
            self.sep_near + span * (y - c) / self.taper
        }
    }

    /// Centreline of the left (`side = -1`) or right (`side = 1`) guide.
    pub fn path(&self, side: f64) -> Result<GuidePath<f64>> {
        let x = |s: f64| self.xc + side * s / 2.0;
        let top = (self.ny - 1) as f64;
        let pts = [
            Point::new(x(self.sep_far), 0.0),
            Point::new(x(self.sep_far), self.y_taper_in()),
            Point::new(x(self.sep_near), self.y_parallel()),
            Point::new(x(self.sep_near), self.y_taper_out()),
            Point::new(x(self.sep_far), self.y_arms()),
            Point::new(x(self.sep_far), top),
        ];
        // a zero-length parallel section collapses two corners into one
        let mut uniq: Vec<Point<f64>> = Vec::new();
        for p in pts {
            if uniq.last().is_none_or(|q| q.dist(p) > 1e-9) {
                uniq.push(p);
            }
        }
        Ok(GuidePath::polyline(&uniq)?)
    }

    pub fn crystal(&self, cfg: &ExperimentConfig, eps: f64, side: f64) -> Result<DmcSpec<f64>> {
        let d = &cfg.dmc;
        let mut s = DmcSpec::along_y(d.n_periods, d.period, eps, self.crystal_start)?;
        s.height = d.height();
        s.span = Some(if side > 0.0 {
            (self.xc, f64::INFINITY)
        } else {
            (f64::NEG_INFINITY, self.xc)
        });
        s.validate()?;
        Ok(s)
    }

    /// Round-trip phase per unit crystal depth, first order, counted from the
    /// middle of the coupler. The crystal field has long tails, so the
    /// stretch below the arms matters.
    pub fn phase_per_depth(&self, cfg: &ExperimentConfig) -> Result<f64> {
        let spec = self.crystal(cfg, 1.0, 1.0)?;
        let lo = self.y_parallel() + self.parallel / 2.0;
        Ok(2.0 * predict_dmc_phase(&spec, common::speed(cfg), lo, (self.ny - 1) as f64)?)
    }
}

/// Fixes the lattice and, unless given, the parallel length that makes one
/// pass through the coupler a 50/50 splitter.
pub fn design(cfg: &ExperimentConfig) -> Result<MichelsonDesign> {
    let m = &cfg.michelson;
    let (wg, d, eps_min, sep_far, sep_near, taper) = if cfg.full_scale {
        (10.0, 10.0, 1.0, 35.0, 23.0, 400.0)
    } else {
        (m.wg, m.d, m.eps_min, m.sep_far, m.sep_near, m.taper)
    };
    let v = common::speed(cfg);
    if !(v > 0.0) {
        return Err(ExpError::Config {
            field: "packet.ky".into(),
            reason: "interferometer needs a packet moving along +y".into(),
        });
    }
    let p = &cfg.packet;
    let y0 = p.y0.unwrap_or((5.0 * p.phi_y).ceil() + 2.0);
    if y0 + 2.0 * p.phi_y > m.lead {
        return Err(ExpError::Config {
            field: "michelson.lead".into(),
            reason: format!("lead {} is too short for a packet launched at y = {y0}", m.lead),
        });
    }
    let profile = WirePairProfile::new(wg, d, eps_min)?;
    let slice_n = (sep_far + 8.0 * (wg + d)).ceil() as usize | 1;
    let splitting = |sep: f64| -> Result<f64> {
        let (l, r, both) = coupler_slices(slice_n, sep, &profile)?;
        Ok(coupling_splitting(&l, &r, &both, cfg.lattice.je)?)
    };
    // ∫Δ dy over both tapers (midpoint rule, unit steps)
    let n = taper.ceil() as usize;
    let h = taper / n as f64;
    let taper_int: f64 = (0..n)
        .into_par_iter()
        .map(|k| {
            let u = (k as f64 + 0.5) / n as f64;
            splitting(sep_far - (sep_far - sep_near) * u).map(|s| s * h)
        })
        .sum::<Result<f64>>()?;
    let d_near = splitting(sep_near)?;
    let d_far = splitting(sep_far)?;
    let target = PI * v / 2.0;
    let dm = &cfg.dmc;
    let last = (2 * dm.n_periods - 1) as f64 * dm.period / 2.0;
    // the widely separated stretches still couple a little
    let far_int = (m.lead + m.arm + last) * d_far;
    let parallel = match m.parallel {
        Some(l) => l,
        None => {
            let l = (target - 2.0 * taper_int - far_int) / d_near;
            if l < 0.0 {
                return Err(ExpError::Config {
                    field: "michelson.taper".into(),
                    reason: "the tapers alone couple more than a 50/50 splitter; shorten them or widen sep_near".into(),
                });
            }
            l
        }
    };
    let top_needed = m.lead + 2.0 * taper + parallel + m.arm + last;
    let ny = cfg.lattice.ny.unwrap_or(top_needed.ceil() as usize + 1);
    if (ny as f64) < top_needed {
        return Err(ExpError::Config {
            field: "lattice.ny".into(),
            reason: format!("device needs {top_needed:.0} rows, lattice has {ny}"),
        });
    }
    let nx = cfg.lattice.nx.unwrap_or((sep_far + 4.0 * (wg + d)).ceil() as usize + 1);
    let arm = (ny - 1) as f64 - last - (m.lead + 2.0 * taper + parallel);
    let far_int = (m.lead + arm + last) * d_far;
    Ok(MichelsonDesign {
        nx,
        ny,
        xc: (nx - 1) as f64 / 2.0,
        y0,
        wg,
        d,
        eps_min,
        sep_far,
        sep_near,
        lead: m.lead,
        taper,
        parallel,
        arm,
        crystal_start: (ny - 1) as f64 - last,
        splitter_phase: (2.0 * taper_int + parallel * d_near + far_int) / (2.0 * v),
        t_end: 2.0 * ((ny - 1) as f64 - y0) / v,
    })
}

/// Arm populations at the end of one run (half-plane split at the midline).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MichelsonOutput {
    pub eps: f64,
    pub left: f64,
    pub right: f64,
}

pub fn run_michelson_point(
    cfg: &ExperimentConfig,
    des: &MichelsonDesign,
    eps: f64,
    mut rec: Option<&mut RunRecord>,
) -> Result<(MichelsonOutput, State)> {
    let profile = WirePairProfile::new(des.wg, des.d, des.eps_min)?;
    let mut layout = Layout::new()
        .with_guide(GuideSpec::new(des.path(-1.0)?, profile))
        .with_guide(GuideSpec::new(des.path(1.0)?, profile));
    if eps > 0.0 {
        layout = layout.with_dmc(des.crystal(cfg, eps, 1.0)?);
        if cfg.michelson.crystal_in_both_arms {
            layout = layout.with_dmc(des.crystal(cfg, eps, -1.0)?);
        }
    }
    let lat = common::lattice(des.nx, des.ny, cfg)?;
    let mut scratch = RunRecord::new("michelson", cfg);
    let (_, h) = common::hamiltonian(&lat, &layout, rec.as_deref_mut().unwrap_or(&mut scratch))?;
    let p = &cfg.packet;
    let xl = des.xc - des.sep_far / 2.0;
    let which = if p.transverse == Transverse::Gaussian {
        Transverse::Ground
    } else {
        p.transverse
    };
    let mode = common::guide_mode(des.nx, xl, &profile, which, cfg.lattice.je)?.expect("guided launch");
    let mut w = WavepacketParams::gaussian(xl, des.y0, p.phi_x, p.kx, p.ky).with_transverse(mode);
    w.phi_y = p.phi_y;
    let packet = make_packet(&w, &lat)?;
    let left = Region::HalfPlane {
        axis: Axis::X,
        at: des.xc,
        upper: false,
    }
    .mask(des.nx, des.ny);
    let mut frames = FrameClock::new(cfg);
    let last = common::run(&h, packet.state, des.t_end, &cfg.propagator.to_core(), |t, s| {
        if let Some(r) = rec.as_deref_mut() {
            let pl = masked_population(s, &left).min(1.0);
            r.track(t, "pop_left", pl);
            r.track(t, "pop_right", (s.norm().powi(2) - pl).clamp(0.0, 1.0));
            frames.tick(t, s, r);
        }
        Ok(())
    })?;
    let pl = masked_population(&last, &left);
    let total = last.norm().powi(2);
    Ok((
        MichelsonOutput {
            eps,
            left: pl.min(1.0),
            right: (total - pl).clamp(0.0, 1.0),
        },
        last,
    ))
}

/// Sweep summary.
#[derive(Debug, Clone, PartialEq)]
pub struct MichelsonSweep {
    pub design: MichelsonDesign,
    pub outputs: Vec<MichelsonOutput>,
    pub fit: SineFit,
    /// Depth of the first equal split on the fitted curve.
    pub equal_split: Option<f64>,
    pub predicted_cycle: f64,
}

impl MichelsonSweep {
    pub fn quarter_ratio(&self) -> Option<f64> {
        self.equal_split.map(|e| e / self.fit.period())
    }
}

/// The depths swept: `michelson.eps_values`, or an even grid over
/// `michelson.cycles` predicted cycles.
pub fn sweep_values(cfg: &ExperimentConfig, des: &MichelsonDesign) -> Result<(Vec<f64>, f64)> {
    let cycle = 2.0 * PI / des.phase_per_depth(cfg)?.abs();
    let m = &cfg.michelson;
    if !m.eps_values.is_empty() {
        return Ok((m.eps_values.clone(), cycle));
    }
    let top = m.cycles * cycle;
    Ok(((0..m.points).map(|k| top * k as f64 / (m.points - 1) as f64).collect(), cycle))
}

pub fn michelson_sweep(cfg: &ExperimentConfig) -> Result<MichelsonSweep> {
    let des = design(cfg)?;
    let (eps, cycle) = sweep_values(cfg, &des)?;
    let outputs: Vec<MichelsonOutput> = eps
        .par_iter()
        .map(|e| run_michelson_point(cfg, &des, *e, None).map(|r| r.0))
        .collect::<Result<_>>()?;
    let x: Vec<f64> = outputs.iter().map(|o| o.eps).collect();
    let y: Vec<f64> = outputs.iter().map(|o| o.left).collect();
    let w0 = 2.0 * PI / cycle;
    let fit = sine_fit(&x, &y, 0.25 * w0, 4.0 * w0)?;
    Ok(MichelsonSweep {
        equal_split: fit.first_crossing(0.5),
        design: des,
        outputs,
        fit,
        predicted_cycle: cycle,
    })
}

pub fn run_michelson(cfg: &ExperimentConfig) -> Result<RunRecord> {
    let clock = Instant::now();
    let mut rec = RunRecord::new("michelson", cfg);
    let sw = michelson_sweep(cfg)?;
    let des = &sw.design;
    if cfg.full_scale {
        rec.warn("full-scale geometry: expect a very long coupler and run time");
    }
    let (pl, pr) = (des.path(-1.0)?, des.path(1.0)?);
    if (pl.length() - pr.length()).abs() > 1e-6 {
        rec.warn(format!(
            "arms differ in length by {:.3e} sites: expect a static phase",
            (pl.length() - pr.length()).abs()
        ));
    }
    if (des.splitter_phase - PI / 4.0).abs() > 0.05 {
        rec.warn(format!(
            "splitter phase {:.4} differs from pi/4: the coupler is not 50/50",
            des.splitter_phase
        ));
    }
    let mut t = Table::new(&["eps_dmc", "pop_left", "pop_right", "fit_left"]);
    for o in &sw.outputs {
        t.push(vec![o.eps, o.left, o.right, sw.fit.eval(o.eps)]);
        rec.track(o.eps, "pop_left", o.left);
        rec.track(o.eps, "pop_right", o.right);
    }
    if let Some(zero) = sw.outputs.iter().find(|o| o.eps == 0.0) {
        rec.set("static_right_population", zero.right);
        if zero.right < 0.95 {
            rec.warn(format!(
                "without crystal only {:.3} of the population leaves in the right guide (not corrected)",
                zero.right
            ));
        }
    }
    rec.set("nx", des.nx);
    rec.set("ny", des.ny);
    rec.set("parallel_length", des.parallel);
    rec.set("splitter_phase", des.splitter_phase);
    rec.set("crystal_start", des.crystal_start);
    rec.set("predicted_cycle", sw.predicted_cycle);
    rec.set("fit_period", sw.fit.period());
    rec.set("fit_r2", sw.fit.r2);
    rec.set("fit_offset", sw.fit.offset);
    rec.set("fit_amplitude", sw.fit.amplitude());
    if let Some(e) = sw.equal_split {
        rec.set("equal_split", e);
        rec.set("equal_split_over_period", e / sw.fit.period());
    }
    rec.table = Some(t);
    rec.wall_time_s = clock.elapsed().as_secs_f64();
    Ok(rec)
}

/// Single run with tracks and snapshots, used for the crystal-free picture.
pub fn run_michelson_single(cfg: &ExperimentConfig, eps: f64) -> Result<RunRecord> {
    let clock = Instant::now();
    let mut rec = RunRecord::new("michelson", cfg);
    let des = design(cfg)?;
    let (out, _) = run_michelson_point(cfg, &des, eps, Some(&mut rec))?;
    rec.set("eps_dmc", eps);
    rec.set("pop_left_final", out.left);
    rec.set("pop_right_final", out.right);
    rec.set("splitter_phase", des.splitter_phase);
    rec.set("parallel_length", des.parallel);
    rec.wall_time_s = clock.elapsed().as_secs_f64();
    Ok(rec)
}
