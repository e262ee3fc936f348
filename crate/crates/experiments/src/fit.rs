//! Small least-squares fits used by the runners.

use std::f64::consts::PI;

use crate::error::{ExpError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

fn r_squared(y: &[f64], pred: impl Fn(usize) -> f64) -> f64 {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res: f64 = y.iter().enumerate().map(|(k, v)| (v - pred(k)).powi(2)).sum();
    if ss_tot == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - ss_res / ss_tot
    }
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(ExpError::Fit("linear fit needs at least two paired points".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(ExpError::Fit("all abscissae are equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = r_squared(y, |k| intercept + slope * x[k]);
    Ok(LinearFit { slope, intercept, r2 })
}

/// Removes 2π jumps between consecutive phases.
pub fn unwrap_phase(p: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(p.len());
    let mut shift = 0.0;
    for (k, &v) in p.iter().enumerate() {
        if k > 0 {
            let d = v - p[k - 1];
            if d > PI {
                shift -= 2.0 * PI;
            } else if d < -PI {
                shift += 2.0 * PI;
            }
        }
        out.push(v + shift);
    }
    out
}

/// `y = offset + a·cos(ωx) + b·sin(ωx)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SineFit {
    pub offset: f64,
    pub a: f64,
    pub b: f64,
    pub omega: f64,
    pub r2: f64,
}

impl SineFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.offset + self.a * (self.omega * x).cos() + self.b * (self.omega * x).sin()
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    pub fn amplitude(&self) -> f64 {
        self.a.hypot(self.b)
    }

    /// Smallest `x ≥ 0` with `eval(x) = level`, if the curve reaches it.
    pub fn first_crossing(&self, level: f64) -> Option<f64> {
        // a cos + b sin = R cos(ωx − θ)
        let r = self.amplitude();
        let c = (level - self.offset) / r;
        if !(c.abs() <= 1.0) {
            return None;
        }
        let theta = self.b.atan2(self.a);
        let base = c.acos();
        [theta + base, theta - base]
            .iter()
            .map(|u| {
                let mut u = *u;
                while u < 0.0 {
                    u += 2.0 * PI;
                }
                while u >= 2.0 * PI {
                    u -= 2.0 * PI;
                }
                u / self.omega
            })
            .min_by(|a, b| a.partial_cmp(b).expect("finite"))
    }
}

fn solve3(m: [[f64; 3]; 3], r: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(m);
    if d.abs() < 1e-300 {
        return None;
    }
    let mut out = [0.0; 3];
    for (c, o) in out.iter_mut().enumerate() {
        let mut mc = m;
        for k in 0..3 {
            mc[k][c] = r[k];
        }
        *o = det(mc) / d;
    }
    Some(out)
}

fn fit_at(x: &[f64], y: &[f64], omega: f64) -> Option<SineFit> {
    let mut m = [[0.0; 3]; 3];
    let mut r = [0.0; 3];
    for (xi, yi) in x.iter().zip(y) {
        let f = [1.0, (omega * xi).cos(), (omega * xi).sin()];
        for a in 0..3 {
            r[a] += f[a] * yi;
            for b in 0..3 {
                m[a][b] += f[a] * f[b];
            }
        }
    }
    let [offset, a, b] = solve3(m, r)?;
    let s = SineFit { offset, a, b, omega, r2: 0.0 };
    Some(SineFit {
        r2: r_squared(y, |k| s.eval(x[k])),
        ..s
    })
}

/// Least-squares sinusoid with the frequency searched in `[omega_lo, omega_hi]`.
pub fn sine_fit(x: &[f64], y: &[f64], omega_lo: f64, omega_hi: f64) -> Result<SineFit> {
    if x.len() != y.len() || x.len() < 4 {
        return Err(ExpError::Fit("sinusoid fit needs at least four paired points".into()));
    }
    if !(omega_lo > 0.0 && omega_hi > omega_lo) {
        return Err(ExpError::Fit("invalid frequency bracket".into()));
    }
    let n = 2000;
    let mut best: Option<SineFit> = None;
    let mut best_k: usize = 0;
    for k in 0..=n {
        let w = omega_lo + (omega_hi - omega_lo) * k as f64 / n as f64;
        if let Some(f) = fit_at(x, y, w) {
            if best.is_none_or(|b| f.r2 > b.r2) {
                best = Some(f);
                best_k = k;
            }
        }
    }
    let step = (omega_hi - omega_lo) / n as f64;
    let (mut lo, mut hi) = (
        omega_lo + step * best_k.saturating_sub(1) as f64,
        omega_lo + step * (best_k + 1).min(n) as f64,
    );
    // golden-section refinement of the residual
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let score = |w: f64| fit_at(x, y, w).map_or(f64::NEG_INFINITY, |f| f.r2);
    for _ in 0..80 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if score(a) > score(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let refined = fit_at(x, y, 0.5 * (lo + hi));
    match (best, refined) {
        (Some(b), Some(r)) => Ok(if r.r2 >= b.r2 { r } else { b }),
        (Some(b), None) => Ok(b),
        _ => Err(ExpError::Fit("singular sinusoid design".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v - 1.0).collect();
        let f = linear_fit(&x, &y).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14 && (f.intercept + 1.0).abs() < 1e-14);
        assert!((f.r2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn unwrap_recovers_ramp() {
        let ramp: Vec<f64> = (0..50).map(|k| 0.4 * k as f64).collect();
        let wrapped: Vec<f64> = ramp.iter().map(|v| (v + PI).rem_euclid(2.0 * PI) - PI).collect();
        let u = unwrap_phase(&wrapped);
        for (a, b) in u.iter().zip(&ramp) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn recovers_sinusoid() {
        let x: Vec<f64> = (0..30).map(|k| 0.003 * k as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.5 - 0.5 * (2.0 * PI * v / 0.07).cos()).collect();
        let f = sine_fit(&x, &y, 10.0, 300.0).unwrap();
        assert!((f.period() - 0.07).abs() < 1e-8);
        assert!(f.r2 > 1.0 - 1e-12);
        assert!((f.first_crossing(0.5).unwrap() - 0.0175).abs() < 1e-8);
    }
}
