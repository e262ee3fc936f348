//! Experiment configuration: TOML or JSON, unknown keys rejected.

use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use magnon_core::{Method, PropagatorConfig};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{ExpError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub lattice: LatticeConfig,
    pub guide: GuideConfig,
    pub packet: PacketConfig,
    pub propagator: PropagatorSection,
    pub run: RunConfig,
    pub modes: ModesConfig,
    pub bend: BendConfig,
    pub coupler: CouplerConfig,
    pub dmc: DmcConfig,
    pub michelson: MichelsonConfig,
    pub units: UnitsConfig,
    pub sweep: Option<SweepConfig>,
    /// Use the full-size device geometry instead of the desk-scale one.
    pub full_scale: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            lattice: LatticeConfig::default(),
            guide: GuideConfig::default(),
            packet: PacketConfig::default(),
            propagator: PropagatorSection::default(),
            run: RunConfig::default(),
            modes: ModesConfig::default(),
            bend: BendConfig::default(),
            coupler: CouplerConfig::default(),
            dmc: DmcConfig::default(),
            michelson: MichelsonConfig::default(),
            units: UnitsConfig::default(),
            sweep: None,
            full_scale: false,
        }
    }
}

/// Lattice size; runners choose a size when `nx`/`ny` are absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LatticeConfig {
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub je: f64,
    pub jd: f64,
}

impl Default for LatticeConfig {
    fn default() -> Self {
        Self {
            nx: None,
            ny: None,
            je: 1.0,
            jd: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GuideConfig {
    pub wg: f64,
    pub d: f64,
    pub eps_min: f64,
}

impl Default for GuideConfig {
    fn default() -> Self {
        Self {
            wg: 20.0,
            d: 20.0,
            eps_min: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transverse {
    Gaussian,
    /// Ground mode of the guide cross-section.
    Ground,
    /// First excited bound mode.
    FirstExcited,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PacketConfig {
    pub x0: Option<f64>,
    pub y0: Option<f64>,
    pub phi_x: f64,
    pub phi_y: f64,
    pub kx: f64,
    pub ky: f64,
    pub transverse: Transverse,
}

impl Default for PacketConfig {
    fn default() -> Self {
        Self {
            x0: None,
            y0: None,
            phi_x: 10.0,
            phi_y: 20.0,
            kx: 0.0,
            ky: FRAC_PI_2,
            transverse: Transverse::Ground,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    Chebyshev,
    Krylov,
    ExactSmall,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagatorSection {
    pub method: MethodName,
    pub t_step: f64,
    pub tol: f64,
}

impl Default for PropagatorSection {
    fn default() -> Self {
        Self {
            method: MethodName::Chebyshev,
            t_step: 5.0,
            tol: 1e-10,
        }
    }
}

impl PropagatorSection {
    pub fn to_core(&self) -> PropagatorConfig<f64> {
        PropagatorConfig {
            method: match self.method {
                MethodName::Chebyshev => Method::Chebyshev,
                MethodName::Krylov => Method::Krylov,
                MethodName::ExactSmall => Method::ExactSmall,
            },
            t_step: self.t_step,
            tol: self.tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Longitudinal distance the packet should travel (units a).
    pub distance: f64,
    /// Snapshot spacing for frames.csv; no frames when absent.
    pub frame_every: Option<f64>,
    /// Sites below this fraction of the frame peak are omitted from frames.csv.
    pub frame_cutoff: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            distance: 400.0,
            frame_every: None,
            frame_cutoff: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModesConfig {
    /// Cross-section length in sites.
    pub width: usize,
    pub eps_values: Vec<f64>,
    pub wg_values: Vec<f64>,
    pub count: usize,
    pub threshold: f64,
}

impl Default for ModesConfig {
    fn default() -> Self {
        Self {
            width: 301,
            eps_values: (1..=20).map(|k| 0.01 * k as f64).collect(),
            wg_values: vec![20.0],
            count: 10,
            threshold: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BendConfig {
    pub radii: Vec<f64>,
    pub angle_deg: f64,
    pub lead_in: f64,
    pub lead_out: f64,
    /// Extra distance travelled past the end of the arc before reading out.
    pub lag: f64,
    pub margin: f64,
}

impl Default for BendConfig {
    fn default() -> Self {
        Self {
            radii: vec![50.0, 500.0, 1000.0, 2000.0],
            angle_deg: 30.0,
            lead_in: 160.0,
            lead_out: 260.0,
            lag: 120.0,
            margin: 80.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CouplerConfig {
    /// (eps_min, centre separation) pairs for the dynamic measurement.
    pub points: Vec<[f64; 2]>,
    /// Grid for the spectral coupling table.
    pub grid_eps: Vec<f64>,
    pub grid_sep: Vec<f64>,
    /// Cross-section length for the spectral calculation.
    pub slice_width: usize,
    /// Guide geometry for the coupler (the guide section is used elsewhere).
    pub wg: f64,
    pub d: f64,
    /// Propagation length as a multiple of the predicted l½.
    pub length_factor: f64,
}

impl Default for CouplerConfig {
    fn default() -> Self {
        Self {
            points: vec![[0.3, 18.0], [0.4, 18.0], [0.2, 19.0], [0.3, 19.0]],
            grid_eps: vec![0.2, 0.3, 0.4, 0.5],
            grid_sep: vec![17.0, 18.0, 19.0, 20.0, 22.0],
            slice_width: 201,
            wg: 8.0,
            d: 8.0,
            length_factor: 2.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DmcConfig {
    pub n_periods: usize,
    pub period: f64,
    pub eps_dmc: f64,
    /// Wire height; half a period when absent.
    pub height: Option<f64>,
    /// Depths for the phase sweep.
    pub eps_values: Vec<f64>,
    /// Depths for the reflection/transmission measurement.
    pub rt_values: Vec<f64>,
    /// Width of the hard-wall channel used for the crystal measurements.
    pub width: usize,
}

impl Default for DmcConfig {
    fn default() -> Self {
        Self {
            n_periods: 10,
            period: 20.0,
            eps_dmc: 0.05,
            height: None,
            eps_values: (0..=10).map(|k| 0.01 * k as f64).collect(),
            rt_values: vec![0.0, 0.01, 0.05, 0.5, 1.0, 2.0],
            width: 8,
        }
    }
}

impl DmcConfig {
    pub fn height(&self) -> f64 {
        self.height.unwrap_or(self.period / 2.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MichelsonConfig {
    pub wg: f64,
    pub d: f64,
    pub eps_min: f64,
    pub sep_far: f64,
    pub sep_near: f64,
    pub taper: f64,
    /// Parallel coupling length; chosen for a 50/50 split when absent.
    pub parallel: Option<f64>,
    /// Straight guide between the splitter and the crystal.
    pub arm: f64,
    /// Straight guide from the bottom edge to the splitter.
    pub lead: f64,
    /// Put an identical crystal in the left arm as well.
    pub crystal_in_both_arms: bool,
    pub eps_values: Vec<f64>,
    /// Number of sweep points when `eps_values` is empty.
    pub points: usize,
    /// Sweep span in predicted full cycles when `eps_values` is empty.
    pub cycles: f64,
}

impl Default for MichelsonConfig {
    fn default() -> Self {
        Self {
            wg: 8.0,
            d: 8.0,
            eps_min: 0.3,
            sep_far: 30.0,
            sep_near: 18.0,
            taper: 120.0,
            parallel: None,
            arm: 60.0,
            lead: 160.0,
            crystal_in_both_arms: false,
            eps_values: Vec::new(),
            points: 21,
            cycles: 1.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UnitsConfig {
    pub j_uev: f64,
    pub a_nm: f64,
    pub gamma: f64,
    pub mu: f64,
    pub device_length_um: f64,
}

impl Default for UnitsConfig {
    fn default() -> Self {
        Self {
            j_uev: 40.0,
            a_nm: 10.0,
            gamma: magnon_core::units::GAMMA_ELECTRON,
            mu: magnon_core::units::MU0,
            device_length_um: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Dotted config path (or a short alias such as `eps_dmc`).
    pub key: String,
    pub values: Vec<f64>,
}

const ALIASES: &[(&str, &str)] = &[
    ("eps_dmc", "michelson.eps_values"),
    ("eps_min", "guide.eps_min"),
    ("rc", "bend.radii"),
    ("radius", "bend.radii"),
];

fn fail(field: &str, reason: impl Into<String>) -> ExpError {
    ExpError::Config {
        field: field.to_string(),
        reason: reason.into(),
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(fail(field, format!("must be finite and > 0, got {v}")))
    }
}

fn non_negative(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(fail(field, format!("must be finite and >= 0, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(nx) = self.lattice.nx {
            if nx < 2 {
                return Err(fail("lattice.nx", "must be >= 2"));
            }
        }
        if let Some(ny) = self.lattice.ny {
            if ny < 2 {
                return Err(fail("lattice.ny", "must be >= 2"));
            }
        }
        positive("lattice.je", self.lattice.je)?;
        non_negative("lattice.jd", self.lattice.jd)?;
        positive("guide.wg", self.guide.wg)?;
        positive("guide.d", self.guide.d)?;
        non_negative("guide.eps_min", self.guide.eps_min)?;
        positive("packet.phi_x", self.packet.phi_x)?;
        positive("packet.phi_y", self.packet.phi_y)?;
        for (f, v) in [("packet.kx", self.packet.kx), ("packet.ky", self.packet.ky)] {
            if !v.is_finite() {
                return Err(fail(f, "must be finite"));
            }
        }
        positive("propagator.t_step", self.propagator.t_step)?;
        if !(self.propagator.tol > 0.0 && self.propagator.tol <= 1e-8) {
            return Err(fail("propagator.tol", format!("must lie in (0, 1e-8], got {}", self.propagator.tol)));
        }
        positive("run.distance", self.run.distance)?;
        if let Some(f) = self.run.frame_every {
            positive("run.frame_every", f)?;
        }
        non_negative("run.frame_cutoff", self.run.frame_cutoff)?;
        if self.modes.width < 3 {
            return Err(fail("modes.width", "must be >= 3"));
        }
        if self.modes.eps_values.is_empty() {
            return Err(fail("modes.eps_values", "must not be empty"));
        }
        for v in &self.modes.eps_values {
            non_negative("modes.eps_values", *v)?;
        }
        if self.modes.wg_values.is_empty() {
            return Err(fail("modes.wg_values", "must not be empty"));
        }
        for v in &self.modes.wg_values {
            positive("modes.wg_values", *v)?;
        }
        if !(0.0..=1.0).contains(&self.modes.threshold) {
            return Err(fail("modes.threshold", "must lie in [0, 1]"));
        }
        if self.bend.radii.is_empty() {
            return Err(fail("bend.radii", "must not be empty"));
        }
        for r in &self.bend.radii {
            positive("bend.radii", *r)?;
        }
        if !(self.bend.angle_deg > 0.0 && self.bend.angle_deg <= 180.0) {
            return Err(fail("bend.angle_deg", "must lie in (0, 180]"));
        }
        for (f, v) in [
            ("bend.lead_in", self.bend.lead_in),
            ("bend.lead_out", self.bend.lead_out),
            ("bend.margin", self.bend.margin),
        ] {
            positive(f, v)?;
        }
        non_negative("bend.lag", self.bend.lag)?;
        if self.coupler.points.is_empty() {
            return Err(fail("coupler.points", "must not be empty"));
        }
        positive("coupler.wg", self.coupler.wg)?;
        positive("coupler.d", self.coupler.d)?;
        for [e, s] in &self.coupler.points {
            positive("coupler.points", *e)?;
            if !(*s >= 2.0 * self.coupler.wg) {
                return Err(fail("coupler.points", format!("separation {s} is below 2·wg: guides overlap")));
            }
        }
        if self.coupler.grid_eps.is_empty() || self.coupler.grid_sep.is_empty() {
            return Err(fail("coupler.grid_eps", "coupling grid must not be empty"));
        }
        positive("coupler.length_factor", self.coupler.length_factor)?;
        if self.coupler.slice_width < 3 {
            return Err(fail("coupler.slice_width", "must be >= 3"));
        }
        if self.dmc.n_periods == 0 {
            return Err(fail("dmc.n_periods", "must be >= 1"));
        }
        positive("dmc.period", self.dmc.period)?;
        non_negative("dmc.eps_dmc", self.dmc.eps_dmc)?;
        if let Some(h) = self.dmc.height {
            positive("dmc.height", h)?;
        }
        if self.dmc.width == 0 {
            return Err(fail("dmc.width", "must be >= 1"));
        }
        if self.dmc.eps_values.is_empty() {
            return Err(fail("dmc.eps_values", "must not be empty"));
        }
        for v in self.dmc.eps_values.iter().chain(&self.dmc.rt_values) {
            non_negative("dmc.eps_values", *v)?;
        }
        let m = &self.michelson;
        positive("michelson.wg", m.wg)?;
        positive("michelson.d", m.d)?;
        positive("michelson.eps_min", m.eps_min)?;
        positive("michelson.taper", m.taper)?;
        positive("michelson.arm", m.arm)?;
        positive("michelson.lead", m.lead)?;
        if !(m.sep_near >= 2.0 * m.wg) {
            return Err(fail("michelson.sep_near", "must be >= 2·wg"));
        }
        if !(m.sep_far > m.sep_near) {
            return Err(fail("michelson.sep_far", "must exceed sep_near"));
        }
        if let Some(p) = m.parallel {
            non_negative("michelson.parallel", p)?;
        }
        for v in &m.eps_values {
            non_negative("michelson.eps_values", *v)?;
        }
        if m.eps_values.is_empty() && m.points < 2 {
            return Err(fail("michelson.points", "need at least 2 sweep points"));
        }
        positive("michelson.cycles", m.cycles)?;
        for (f, v) in [
            ("units.j_uev", self.units.j_uev),
            ("units.a_nm", self.units.a_nm),
            ("units.gamma", self.units.gamma),
            ("units.mu", self.units.mu),
        ] {
            positive(f, v)?;
        }
        non_negative("units.device_length_um", self.units.device_length_um)?;
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(fail("sweep.values", "must not be empty"));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// Applies a sweep by writing `values` into the keyed field. Array fields
    /// receive the whole list; scalar fields yield one config per value.
    pub fn expand_sweep(&self) -> Result<Vec<(Option<f64>, ExperimentConfig)>> {
        let Some(sweep) = &self.sweep else {
            return Ok(vec![(None, self.clone())]);
        };
        let path = ALIASES
            .iter()
            .find(|(a, _)| *a == sweep.key)
            .map(|(_, p)| *p)
            .unwrap_or(sweep.key.as_str());
        let mut base = self.clone();
        base.sweep = None;
        let root = serde_json::to_value(&base).expect("config serialises");
        let target = lookup(&root, path).ok_or_else(|| fail("sweep.key", format!("unknown config key `{}`", sweep.key)))?;
        if target.is_array() {
            let mut v = root.clone();
            *lookup_mut(&mut v, path).expect("looked up above") = serde_json::json!(sweep.values);
            return Ok(vec![(None, from_value(v)?)]);
        }
        sweep
            .values
            .iter()
            .map(|x| {
                let mut v = root.clone();
                *lookup_mut(&mut v, path).expect("looked up above") = serde_json::json!(x);
                Ok((Some(*x), from_value(v)?))
            })
            .collect()
    }
}

fn lookup<'a>(v: &'a Value, path: &str) -> Option<&'a Value> {
    path.split('.').try_fold(v, |v, k| v.get(k))
}

fn lookup_mut<'a>(v: &'a mut Value, path: &str) -> Option<&'a mut Value> {
    path.split('.').try_fold(v, |v, k| v.get_mut(k))
}

fn from_value(v: Value) -> Result<ExperimentConfig> {
    let c: ExperimentConfig = serde_json::from_value(v).map_err(|e| fail("sweep", e.to_string()))?;
    c.validate()?;
    Ok(c)
}

/// Parses `START:STOP:STEP` into an inclusive list of values.
pub fn parse_range(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || fail("sweep", format!("expected START:STOP:STEP, got `{spec}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if !(step > 0.0) || !(stop >= start) {
        return Err(fail("sweep", "need STEP > 0 and STOP >= START"));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| start + step * k as f64).collect())
}

/// Parses a config from TOML or JSON text; `hint` is the file extension.
pub fn parse_config_str(text: &str, hint: Option<&str>) -> Result<ExperimentConfig> {
    let as_json = match hint {
        Some("json") => true,
        Some("toml") => false,
        _ => text.trim_start().starts_with('{'),
    };
    let cfg: ExperimentConfig = if as_json {
        serde_json::from_str(text).map_err(|e| ExpError::Parse(e.to_string()))?
    } else {
        toml::from_str(text).map_err(|e| ExpError::Parse(e.to_string()))?
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| ExpError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_config_str(&text, path.extension().and_then(|e| e.to_str()))
}
