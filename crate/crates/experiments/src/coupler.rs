//! Directional coupler: two parallel guides exchanging population.

use std::f64::consts::FRAC_PI_2;
use std::time::Instant;

use magnon_core::dynamics::{centroid, masked_population};
use magnon_core::spectral::{coupler_slices, coupling_energy, coupling_splitting, half_transfer_length};
use magnon_core::{make_packet, Axis, GuidePath, GuideSpec, Layout, Point, Region, WavepacketParams, WirePairProfile};

use crate::common::{self, FrameClock};
use crate::config::ExperimentConfig;
use crate::error::{ExpError, Result};
use crate::fit::linear_fit;
use crate::record::{RunRecord, Table};
use crate::spectra::{coupling_grid, coupling_row, coupling_table, CouplingRow};

/// Dynamic half-transfer measurement for one (depth, separation) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplerPoint {
    pub spectral: CouplingRow,
    /// Time at which the far guide first holds half the population.
    pub t_half: f64,
    pub speed: f64,
    pub l_half_measured: f64,
    /// Far-guide population after `2·l½` of travel.
    pub far_at_double: f64,
    pub far_max: f64,
    pub nx: usize,
    pub ny: usize,
    pub track: Vec<(f64, f64)>,
}

impl CouplerPoint {
    pub fn relative_error(&self) -> f64 {
        (self.l_half_measured - self.spectral.half_transfer).abs() / self.spectral.half_transfer
    }
}

/// Linear interpolation of the first upward crossing of `level`.
fn first_crossing(track: &[(f64, f64)], level: f64) -> Option<f64> {
    track.windows(2).find_map(|w| {
        let ((t0, a), (t1, b)) = (w[0], w[1]);
        (a < level && b >= level).then(|| t0 + (level - a) / (b - a) * (t1 - t0))
    })
}

fn interpolate(track: &[(f64, f64)], t: f64) -> Option<f64> {
    track.windows(2).find_map(|w| {
        let ((t0, a), (t1, b)) = (w[0], w[1]);
        (t >= t0 && t <= t1).then(|| a + (b - a) * (t - t0) / (t1 - t0))
    })
}

/// Launches into the left guide of a straight parallel pair and follows the
/// population on the right of the midline.
pub fn run_coupler_point(cfg: &ExperimentConfig, eps: f64, sep: f64, rec: Option<&mut RunRecord>) -> Result<CouplerPoint> {
    let c = &cfg.coupler;
    let p = &cfg.packet;
    if sep < 2.0 * c.wg {
        return Err(ExpError::Config {
            field: "coupler.points".into(),
            reason: format!("separation {sep} is below 2·wg = {}: guides overlap", 2.0 * c.wg),
        });
    }
    let v = common::speed(cfg);
    if !(v > 0.0) {
        return Err(ExpError::Config {
            field: "packet.ky".into(),
            reason: "coupler needs a packet moving along +y".into(),
        });
    }
    let spectral = coupling_row(cfg, eps, sep, v)?;
    let profile = WirePairProfile::new(c.wg, c.d, eps)?;
    let pad = (3.0 * (c.wg + c.d)).ceil();
    let nx = cfg.lattice.nx.unwrap_or((sep + 2.0 * pad).ceil() as usize + 1);
    let xc = (nx - 1) as f64 / 2.0;
    let (xl, xr) = (xc - sep / 2.0, xc + sep / 2.0);
    let y0 = p.y0.unwrap_or((5.0 * p.phi_y).ceil() + 2.0);
    let t_end = c.length_factor * spectral.half_transfer / v;
    let ny = cfg
        .lattice
        .ny
        .unwrap_or((y0 + v * t_end + 5.0 * p.phi_y).ceil() as usize + 2);
    let lat = common::lattice(nx, ny, cfg)?;
    let guide = |x: f64| -> Result<GuideSpec<f64>> {
        Ok(GuideSpec::new(GuidePath::straight(Point::new(x, 0.0), FRAC_PI_2, (ny - 1) as f64)?, profile))
    };
    let layout = Layout::new().with_guide(guide(xl)?).with_guide(guide(xr)?);
    let mut scratch = RunRecord::new("coupler", cfg);
    let rec = match rec {
        Some(r) => r,
        None => &mut scratch,
    };
    let (_, h) = common::hamiltonian(&lat, &layout, rec)?;
    let mode = common::guide_mode(nx, xl, &profile, p.transverse, cfg.lattice.je)?;
    let mut w = WavepacketParams::gaussian(xl, y0, p.phi_x, p.kx, p.ky);
    w.phi_y = p.phi_y;
    if let Some(m) = mode {
        w = w.with_transverse(m);
    }
    let packet = make_packet(&w, &lat)?;
    if let Some(m) = packet.warning() {
        rec.warn(m);
    }
    let right = Region::HalfPlane {
        axis: Axis::X,
        at: xc,
        upper: true,
    }
    .mask(nx, ny);
    let mut track = Vec::new();
    let mut ts = Vec::new();
    let mut ys = Vec::new();
    let mut frames = FrameClock::new(cfg);
    let label = format!("eps{eps}_sep{sep}");
    let pcfg = cfg.propagator.to_core();
    let pcfg = magnon_core::PropagatorConfig {
        t_step: pcfg.t_step.min(2.0),
        ..pcfg
    };
    common::run(&h, packet.state, t_end, &pcfg, |t, s| {
        let pr = masked_population(s, &right).min(1.0);
        track.push((t, pr));
        rec.track(t, format!("pop_right_{label}"), pr);
        rec.track(t, format!("pop_left_{label}"), (s.norm().powi(2) - pr).clamp(0.0, 1.0));
        ts.push(t);
        ys.push(centroid(s).1);
        frames.tick(t, s, rec);
        Ok(())
    })?;
    let speed = linear_fit(&ts, &ys)?.slope;
    let t_half = first_crossing(&track, 0.5).ok_or_else(|| {
        ExpError::Fit(format!(
            "far-guide population never reached 0.5 (max {:.3})",
            track.iter().map(|x| x.1).fold(0.0, f64::max)
        ))
    })?;
    let far_at_double = interpolate(&track, 2.0 * t_half).unwrap_or(f64::NAN);
    Ok(CouplerPoint {
        spectral,
        t_half,
        speed,
        l_half_measured: speed * t_half,
        far_at_double,
        far_max: track.iter().map(|x| x.1).fold(0.0, f64::max),
        nx,
        ny,
        track,
    })
}

/// Spectral check of the quoted device: guides 20 sites wide
/// (`wg = d = 10`), centre separation 23, depth 1 J.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuotedDeviceCheck {
    pub coupling_raw: f64,
    pub splitting: f64,
    pub half_transfer: f64,
}

pub const QUOTED_COUPLING: f64 = 0.0048;
pub const QUOTED_HALF_TRANSFER: f64 = 650.0;

pub fn quoted_device_check(je: f64) -> Result<QuotedDeviceCheck> {
    let p = WirePairProfile::new(10.0, 10.0, 1.0)?;
    let (l, r, both) = coupler_slices(241, 23.0, &p)?;
    let splitting = coupling_splitting(&l, &r, &both, je)?;
    Ok(QuotedDeviceCheck {
        coupling_raw: coupling_energy(&l, &r, &both, je)?,
        splitting,
        half_transfer: half_transfer_length(2.0 * je, splitting)?,
    })
}

/// Spectral grid, dynamic points and the quoted-device check.
pub fn run_coupler(cfg: &ExperimentConfig) -> Result<RunRecord> {
    let clock = Instant::now();
    let mut rec = RunRecord::new("coupler", cfg);
    let grid = coupling_grid(cfg)?;
    rec.extra.push(("coupling_grid.csv".into(), coupling_table(&grid).to_csv()));
    let mut t = Table::new(&[
        "eps_min",
        "sep",
        "splitting",
        "l_half_predicted",
        "l_half_measured",
        "relative_error",
        "far_at_double",
    ]);
    for [eps, sep] in &cfg.coupler.points {
        let pt = run_coupler_point(cfg, *eps, *sep, Some(&mut rec))?;
        t.push(vec![
            *eps,
            *sep,
            pt.spectral.splitting,
            pt.spectral.half_transfer,
            pt.l_half_measured,
            pt.relative_error(),
            pt.far_at_double,
        ]);
    }
    let quoted = quoted_device_check(cfg.lattice.je)?;
    rec.set("quoted_device_coupling_raw", quoted.coupling_raw);
    rec.set("quoted_device_splitting", quoted.splitting);
    rec.set("quoted_device_half_transfer", quoted.half_transfer);
    rec.warn(format!(
        "quoted device (width 20, separation 23, depth 1 J): splitting {:.3e} J and l½ {:.0} sites, against the quoted {QUOTED_COUPLING} J and {QUOTED_HALF_TRANSFER} sites",
        quoted.splitting, quoted.half_transfer
    ));
    rec.table = Some(t);
    rec.wall_time_s = clock.elapsed().as_secs_f64();
    Ok(rec)
}
