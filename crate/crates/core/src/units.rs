//! Conversions between lattice units (J, a, ħ/J) and SI.

use crate::error::{MagnonError, Result};

/// Reduced Planck constant, J·s (CODATA 2018, exact in SI).
pub const HBAR: f64 = 1.054_571_817e-34;
pub const ELECTRON_VOLT: f64 = 1.602_176_634e-19;
/// Free-electron gyromagnetic ratio, rad·s⁻¹·T⁻¹.
pub const GAMMA_ELECTRON: f64 = 1.760_859_630_23e11;
/// Vacuum permeability, T·m/A.
pub const MU0: f64 = 1.256_637_062_12e-6;

/// Reference current for a 1e-4 J deep guide with 1 μm wires in P:Si.
pub const REFERENCE_CURRENT_A: f64 = 2.74e-6;
/// Reference magnon top speed in P:Si.
pub const REFERENCE_SPEED_M_PER_S: f64 = 607.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    /// Exchange coupling, joules.
    pub j_phys: f64,
    /// Spin spacing, metres.
    pub a_phys: f64,
    pub gamma: f64,
    pub mu: f64,
}

impl MaterialParams {
    pub fn new(j_phys: f64, a_phys: f64, gamma: f64, mu: f64) -> Result<Self> {
        for (name, v) in [("j_phys", j_phys), ("a_phys", a_phys), ("gamma", gamma), ("mu", mu)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(MagnonError::config(name, "must be finite and > 0"));
            }
        }
        Ok(Self { j_phys, a_phys, gamma, mu })
    }

    /// Phosphorus donors in silicon: a = 10 nm, J = 40 μeV.
    pub fn phosphorus_in_silicon() -> Self {
        Self {
            j_phys: 40e-6 * ELECTRON_VOLT,
            a_phys: 10e-9,
            gamma: GAMMA_ELECTRON,
            mu: MU0,
        }
    }

    /// `κ = 2π / (γħμ)` in A/(J·m).
    pub fn kappa(&self) -> f64 {
        2.0 * std::f64::consts::PI / (self.gamma * HBAR * self.mu)
    }

    pub fn time_unit(&self) -> f64 {
        HBAR / self.j_phys
    }

    pub fn length_to_si(&self, l: f64) -> f64 {
        l * self.a_phys
    }

    pub fn length_from_si(&self, l: f64) -> f64 {
        l / self.a_phys
    }

    pub fn time_to_si(&self, t: f64) -> f64 {
        t * self.time_unit()
    }

    pub fn time_from_si(&self, t: f64) -> f64 {
        t / self.time_unit()
    }

    /// Speed in units of `aJ/ħ` to m/s.
    pub fn speed_to_si(&self, v: f64) -> f64 {
        v * self.a_phys / self.time_unit()
    }

    pub fn speed_from_si(&self, v: f64) -> f64 {
        v * self.time_unit() / self.a_phys
    }

    pub fn energy_to_si(&self, e: f64) -> f64 {
        e * self.j_phys
    }

    pub fn energy_from_si(&self, e: f64) -> f64 {
        e / self.j_phys
    }
}

/// Wire current giving a well of depth `eps_min` (units J) with wires at
/// height `d` (units a): `I = ε·J·κ·d`.
pub fn current_for_depth(eps_min: f64, d: f64, m: &MaterialParams) -> Result<f64> {
    if !(eps_min > 0.0 && eps_min.is_finite()) {
        return Err(MagnonError::config("eps_min", "must be finite and > 0"));
    }
    if !(d > 0.0 && d.is_finite()) {
        return Err(MagnonError::config("d", "must be finite and > 0"));
    }
    Ok(eps_min * m.j_phys * m.kappa() * m.length_to_si(d))
}

/// `2Ja/ħ`.
pub fn max_speed(m: &MaterialParams) -> f64 {
    m.speed_to_si(2.0)
}

pub fn traversal_time(length: f64, v: f64, round_trip: bool) -> Result<f64> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(MagnonError::config("speed", "must be finite and > 0"));
    }
    if !(length >= 0.0 && length.is_finite()) {
        return Err(MagnonError::config("length", "must be finite and >= 0"));
    }
    Ok(if round_trip { 2.0 } else { 1.0 } * length / v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConversionRow {
    pub quantity: String,
    pub lattice: f64,
    pub lattice_unit: String,
    pub si: f64,
    pub si_unit: String,
    pub note: String,
}

fn row(quantity: &str, lattice: f64, lu: &str, si: f64, su: &str, note: String) -> ConversionRow {
    ConversionRow {
        quantity: quantity.into(),
        lattice,
        lattice_unit: lu.into(),
        si,
        si_unit: su.into(),
        note,
    }
}

/// Conversion table, including how the chosen γ and μ compare with the
/// reference current and speed values.
pub fn conversion_table(m: &MaterialParams, device_length_m: f64) -> Result<Vec<ConversionRow>> {
    let i4 = current_for_depth(1e-4, m.length_from_si(1e-6), m)?;
    let i3 = current_for_depth(1e-3, m.length_from_si(1e-6), m)?;
    let vmax = max_speed(m);
    let v1 = m.speed_to_si(1.0);
    Ok(vec![
        row("J", 1.0, "J", m.j_phys, "J", format!("{:.6e} eV", m.j_phys / ELECTRON_VOLT)),
        row("a", 1.0, "a", m.a_phys, "m", String::new()),
        row("time unit", 1.0, "hbar/J", m.time_unit(), "s", String::new()),
        row("kappa", 1.0, "", m.kappa(), "A/(J m)", format!("gamma = {:.6e} rad/(s T), mu = {:.6e} T m/A", m.gamma, m.mu)),
        row(
            "current (eps 1e-4 J, d 1 um)",
            1e-4,
            "J",
            i4,
            "A",
            format!(
                "reference value {:.3e} A; ratio {:.3} (the reference implies gamma*mu = {:.6e})",
                REFERENCE_CURRENT_A,
                i4 / REFERENCE_CURRENT_A,
                m.gamma * m.mu * i4 / REFERENCE_CURRENT_A
            ),
        ),
        row("current (eps 1e-3 J, d 1 um)", 1e-3, "J", i3, "A", String::new()),
        row(
            "max speed 2aJ/hbar",
            2.0,
            "aJ/hbar",
            vmax,
            "m/s",
            format!(
                "reference value {REFERENCE_SPEED_M_PER_S} m/s matches aJ/hbar = {v1:.1} m/s (factor {:.3})",
                vmax / REFERENCE_SPEED_M_PER_S
            ),
        ),
        row(
            "round trip at max speed",
            2.0 * m.length_from_si(device_length_m) / 2.0,
            "hbar/J",
            traversal_time(device_length_m, vmax, true)?,
            "s",
            format!("device length {device_length_m:.3e} m"),
        ),
        row(
            "round trip at reference speed",
            2.0 * m.length_from_si(device_length_m) / m.speed_from_si(REFERENCE_SPEED_M_PER_S),
            "hbar/J",
            traversal_time(device_length_m, REFERENCE_SPEED_M_PER_S, true)?,
            "s",
            String::new(),
        ),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn current_is_bilinear() {
        let m = MaterialParams::phosphorus_in_silicon();
        let i = current_for_depth(1e-4, 100.0, &m).unwrap();
        assert_eq!(current_for_depth(2e-4, 100.0, &m).unwrap(), 2.0 * i);
        assert_eq!(current_for_depth(1e-4, 200.0, &m).unwrap(), 2.0 * i);
        assert!(current_for_depth(0.0, 1.0, &m).is_err());
    }

    #[test]
    fn current_matches_field_formula() {
        // ε = γħ·μI/(2πd)
        let m = MaterialParams::phosphorus_in_silicon();
        let i = current_for_depth(1e-4, 100.0, &m).unwrap();
        let eps = m.gamma * HBAR * m.mu * i / (2.0 * std::f64::consts::PI * 1e-6);
        assert!((eps / m.j_phys - 1e-4).abs() < 1e-16);
    }

    #[test]
    fn speed_and_time_units() {
        let m = MaterialParams::phosphorus_in_silicon();
        let v = max_speed(&m);
        assert!((v - 2.0 * m.j_phys * m.a_phys / HBAR).abs() < 1e-9 * v);
        assert!((v - 1215.0).abs() < 1.0);
        let mut m2 = m;
        m2.j_phys *= 2.0;
        assert!((max_speed(&m2) - 2.0 * v).abs() < 1e-9 * v);
        assert_eq!(traversal_time(0.0, v, true).unwrap(), 0.0);
        let one = traversal_time(5e-6, 607.0, false).unwrap();
        assert_eq!(traversal_time(5e-6, 607.0, true).unwrap(), 2.0 * one);
    }

    #[test]
    fn round_trips() {
        let m = MaterialParams::phosphorus_in_silicon();
        for x in [1e-3, 0.7, 42.0, 1e5] {
            assert!((m.length_from_si(m.length_to_si(x)) - x).abs() < 1e-12 * x);
            assert!((m.time_from_si(m.time_to_si(x)) - x).abs() < 1e-12 * x);
            assert!((m.speed_from_si(m.speed_to_si(x)) - x).abs() < 1e-12 * x);
            assert!((m.energy_from_si(m.energy_to_si(x)) - x).abs() < 1e-12 * x);
        }
    }

    #[test]
    fn invalid_material_rejected() {
        assert!(MaterialParams::new(1.0, 0.0, 1.0, 1.0).is_err());
        assert!(MaterialParams::new(1.0, 1.0, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn table_surfaces_constant_choice() {
        let t = conversion_table(&MaterialParams::phosphorus_in_silicon(), 5e-6).unwrap();
        assert!(t.iter().any(|r| r.note.contains("reference value") && r.si_unit == "A"));
    }
}
