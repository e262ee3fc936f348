//! Tables that need no time evolution: band structure, transverse modes,
//! coupler splittings and unit conversions.

use std::time::Instant;

use magnon_core::spectral::{
    bz_path, confinement_factor, count_confined_modes, coupler_slices, coupling_energy, coupling_splitting,
    dispersion_diagonal, guide_slice, half_transfer_length, transverse_modes,
};
use magnon_core::units::{conversion_table, MaterialParams, ELECTRON_VOLT};
use magnon_core::WirePairProfile;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::record::{RunRecord, Table};

/// Γ → X → M → Γ samples, `points` per arm.
pub fn run_dispersion(cfg: &ExperimentConfig, points: usize) -> Result<RunRecord> {
    let clock = Instant::now();
    let mut rec = RunRecord::new("dispersion", cfg);
    let (je, jd) = (cfg.lattice.je, cfg.lattice.jd);
    let path = bz_path(points, je)?;
    let mut t = Table::new(&["s", "kx", "ky", "omega", "omega_diagonal"]);
    for ((s, (kx, ky)), w) in path.s.iter().zip(&path.points).zip(&path.omega) {
        t.push(vec![*s, *kx, *ky, *w, dispersion_diagonal(*kx, *ky, je, jd)]);
    }
    rec.set("samples", t.rows.len());
    rec.table = Some(t);
    rec.wall_time_s = clock.elapsed().as_secs_f64();
    Ok(rec)
}

/// One row of the mode sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeRow {
    pub wg: f64,
    pub eps_min: f64,
    pub ground_energy: f64,
    pub bound: usize,
    pub ground_cf: f64,
    pub confined: usize,
}

pub fn mode_rows(cfg: &ExperimentConfig) -> Result<Vec<ModeRow>> {
    let m = &cfg.modes;
    let center = (m.width - 1) as f64 / 2.0;
    let cells: Vec<(f64, f64)> = m
        .wg_values
        .iter()
        .flat_map(|w| m.eps_values.iter().map(move |e| (*w, *e)))
        .collect();
    cells
        .par_iter()
        .map(|&(wg, eps)| {
            let p = WirePairProfile::new(wg, cfg.guide.d, eps)?;
            let ms = transverse_modes(&guide_slice(m.width, center, &p)?, cfg.lattice.je)?;
            Ok(ModeRow {
                wg,
                eps_min: eps,
                ground_energy: ms.energies[0],
                bound: ms.bound_count(),
                ground_cf: confinement_factor(&ms.modes[0], center, wg),
                confined: count_confined_modes(&ms, center, wg, m.threshold),
            })
        })
        .collect()
}

/// Transverse mode sweep over `modes.wg_values × modes.eps_values`; also
/// writes the lowest `modes.count` energies per cell as tracks.
pub fn run_modes(cfg: &ExperimentConfig) -> Result<RunRecord> {
    let clock = Instant::now();
    let mut rec = RunRecord::new("modes", cfg);
    let rows = mode_rows(cfg)?;
    let mut t = Table::new(&["wg", "eps_min", "ground_energy", "bound_modes", "ground_cf", "confined_modes"]);
    for r in &rows {
        t.push(vec![r.wg, r.eps_min, r.ground_energy, r.bound as f64, r.ground_cf, r.confined as f64]);
    }
    let center = (cfg.modes.width - 1) as f64 / 2.0;
    for r in &rows {
        let p = WirePairProfile::new(r.wg, cfg.guide.d, r.eps_min)?;
        let ms = transverse_modes(&guide_slice(cfg.modes.width, center, &p)?, cfg.lattice.je)?;
        for (k, e) in ms.energies.iter().take(cfg.modes.count).enumerate() {
            rec.track(r.eps_min, format!("energy_wg{}_mode{k}", r.wg), *e);
        }
    }
    rec.set("cells", rows.len());
    rec.table = Some(t);
    rec.wall_time_s = clock.elapsed().as_secs_f64();
    Ok(rec)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingRow {
    pub eps_min: f64,
    pub sep: f64,
    pub raw: f64,
    pub splitting: f64,
    pub half_transfer: f64,
}

/// Spectral coupling of two parallel guides (`coupler.wg`, `coupler.d`).
pub fn coupling_row(cfg: &ExperimentConfig, eps: f64, sep: f64, v: f64) -> Result<CouplingRow> {
    let c = &cfg.coupler;
    let p = WirePairProfile::new(c.wg, c.d, eps)?;
    let (l, r, both) = coupler_slices(c.slice_width, sep, &p)?;
    let j = cfg.lattice.je;
    let splitting = coupling_splitting(&l, &r, &both, j)?;
    Ok(CouplingRow {
        eps_min: eps,
        sep,
        raw: coupling_energy(&l, &r, &both, j)?,
        splitting,
        half_transfer: half_transfer_length(v, splitting)?,
    })
}

pub fn coupling_grid(cfg: &ExperimentConfig) -> Result<Vec<CouplingRow>> {
    let v = crate::common::speed(cfg);
    let c = &cfg.coupler;
    let cells: Vec<(f64, f64)> = c
        .grid_eps
        .iter()
        .flat_map(|e| c.grid_sep.iter().map(move |s| (*e, *s)))
        .collect();
    cells.par_iter().map(|&(e, s)| coupling_row(cfg, e, s, v)).collect()
}

pub fn coupling_table(rows: &[CouplingRow]) -> Table {
    let mut t = Table::new(&["eps_min", "sep", "coupling_raw", "splitting", "half_transfer_length"]);
    for r in rows {
        t.push(vec![r.eps_min, r.sep, r.raw, r.splitting, r.half_transfer]);
    }
    t
}

pub fn material(cfg: &ExperimentConfig) -> Result<MaterialParams> {
    let u = &cfg.units;
    Ok(MaterialParams::new(
        u.j_uev * 1e-6 * ELECTRON_VOLT,
        u.a_nm * 1e-9,
        u.gamma,
        u.mu,
    )?)
}

/// Conversion table; the notes column states how the chosen constants
/// compare with the reference current and speed.
pub fn run_units(cfg: &ExperimentConfig) -> Result<(RunRecord, Vec<magnon_core::units::ConversionRow>)> {
    let clock = Instant::now();
    let mut rec = RunRecord::new("units", cfg);
    let rows = conversion_table(&material(cfg)?, cfg.units.device_length_um * 1e-6)?;
    for r in &rows {
        rec.set(&r.quantity, r.si);
        // notes that compare against the reference values flag the constant ambiguity
        if r.note.contains("reference value") {
            rec.warn(format!("{}: {}", r.quantity, r.note));
        }
    }
    rec.extra.push(("units.csv".into(), units_csv(&rows)));
    rec.extra.push(("units.txt".into(), units_text(&rows)));
    rec.wall_time_s = clock.elapsed().as_secs_f64();
    Ok((rec, rows))
}

/// Units table as CSV with quoted text columns.
pub fn units_csv(rows: &[magnon_core::units::ConversionRow]) -> String {
    let q = |s: &str| format!("\"{}\"", s.replace('"', "\"\""));
    let mut out = String::from("quantity,lattice,lattice_unit,si,si_unit,note\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            q(&r.quantity),
            crate::record::fmt_e(r.lattice),
            q(&r.lattice_unit),
            crate::record::fmt_e(r.si),
            q(&r.si_unit),
            q(&r.note)
        ));
    }
    out
}

/// Aligned text rendering of the units table.
pub fn units_text(rows: &[magnon_core::units::ConversionRow]) -> String {
    let w = rows.iter().map(|r| r.quantity.len()).max().unwrap_or(0);
    let mut out = String::new();
    for r in rows {
        out.push_str(&format!(
            "{:<w$}  {:>14.6e} {:<8} {:>14.6e} {:<8} {}\n",
            r.quantity, r.lattice, r.lattice_unit, r.si, r.si_unit, r.note
        ));
    }
    out
}
