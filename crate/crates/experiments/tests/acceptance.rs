//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion outside `KNOWN_UNATTAINABLE` fails, or if a
//! known-unattainable one unexpectedly passes.

use std::f64::consts::PI;
use std::time::Instant;

use magnon_core::spectral::{dispersion, dispersion_diagonal};
use magnon_core::units::{
    conversion_table, current_for_depth, max_speed, traversal_time, MaterialParams, REFERENCE_SPEED_M_PER_S,
};
use magnon_core::{
    build_hamiltonian, evolve, Boundary, CouplingSpec, Field, Lattice, Propagator, PropagatorConfig, State, C64,
};
use magnon_experiments::bend::run_bend_study;
use magnon_experiments::coupler::{quoted_device_check, run_coupler_point, QUOTED_COUPLING, QUOTED_HALF_TRANSFER};
use magnon_experiments::dmc::{phase_sweep, transmission_run};
use magnon_experiments::fit::linear_fit;
use magnon_experiments::michelson::michelson_sweep;
use magnon_experiments::spectra::{coupling_grid, mode_rows, run_units};
use magnon_experiments::{run_free_propagation, run_guided_propagation, ExperimentConfig};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria expected to fail, with the reason.
const KNOWN_UNATTAINABLE: &[(&str, &str)] = &[(
    "7b",
    "the quoted coupler (width 20, separation 23, depth 1 J) has a supermode gap near 2e-4 J, \
     about 25x below the quoted 0.0048 J, so l½ is ~1.6e4 sites instead of 650; \
     the quoted numbers match a well about ten times shallower",
)];

type Outcome = (bool, String);

fn eigs(h: &magnon_core::Hamiltonian) -> Vec<f64> {
    let n = h.dim();
    let mut e: Vec<f64> = SymmetricEigen::new(DMatrix::from_row_slice(n, n, &h.to_dense()))
        .eigenvalues
        .iter()
        .copied()
        .collect();
    e.sort_by(f64::total_cmp);
    e
}

fn grid(nx: usize, ny: usize, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let mut w: Vec<f64> = (0..nx * ny)
        .map(|k| f(2.0 * PI * (k % nx) as f64 / nx as f64, 2.0 * PI * (k / nx) as f64 / ny as f64))
        .collect();
    w.sort_by(f64::total_cmp);
    w
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn c1() -> Outcome {
    let mut worst: f64 = 0.0;
    for (nx, ny) in [(4, 4), (9, 6), (17, 12), (32, 32)] {
        let h = build_hamiltonian(&Lattice::periodic(nx, ny, 1.3).unwrap(), &Field::zeros(nx, ny)).unwrap();
        worst = worst.max(max_diff(&eigs(&h), &grid(nx, ny, |a, b| dispersion(a, b, 1.3))));
    }
    let mut worst_d: f64 = 0.0;
    for (nx, ny, jd) in [(8, 8, 0.2), (15, 10, 0.5), (24, 24, 0.35)] {
        let lat = Lattice::new(nx, ny, CouplingSpec::new(1.0, jd).unwrap(), Boundary::Periodic).unwrap();
        let h = build_hamiltonian(&lat, &Field::zeros(nx, ny)).unwrap();
        worst_d = worst_d.max(max_diff(&eigs(&h), &grid(nx, ny, |a, b| dispersion_diagonal(a, b, 1.0, jd))));
    }
    let mut cut: f64 = 0.0;
    for i in 0..200 {
        let k = -PI + 2.0 * PI * i as f64 / 199.0;
        for (je, jd) in [(1.0, 0.0), (1.0, 0.3), (0.7, 1.1)] {
            cut = cut.max((dispersion_diagonal(k, 0.0, je, jd) - dispersion(k, 0.0, je + 2.0 * jd)).abs());
        }
    }
    (
        worst < 1e-10 && worst_d < 1e-10 && cut < 1e-13,
        format!("nearest {worst:.1e}, diagonal {worst_d:.1e}, axis cut {cut:.1e}"),
    )
}

fn dense_propagate(h: &magnon_core::Hamiltonian, s: &State, t: f64) -> Vec<C64> {
    let n = h.dim();
    let eig = SymmetricEigen::new(DMatrix::from_row_slice(n, n, &h.to_dense()));
    let v = &eig.eigenvectors;
    let mut out = vec![C64::new(0.0, 0.0); n];
    for k in 0..n {
        let proj: C64 = (0..n).map(|i| s.amplitudes()[i] * v[(i, k)]).sum();
        let c = proj * C64::from_polar(1.0, -eig.eigenvalues[k] * t);
        for (i, o) in out.iter_mut().enumerate() {
            *o += c * v[(i, k)];
        }
    }
    out
}

fn c2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut amp_err: f64 = 0.0;
    let mut drift: f64 = 0.0;
    for (n, t) in [(6, 3.0), (11, 17.0), (16, 40.0)] {
        let lat = Lattice::hard_wall(n, n, 1.0).unwrap();
        let mut f = Field::zeros(n, n);
        f.eps.iter_mut().for_each(|e| *e = rng.random_range(-1.0..1.0));
        let h = build_hamiltonian(&lat, &f).unwrap();
        let amps = (0..n * n)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let s = State::from_amplitudes(n, n, amps).unwrap();
        let got = evolve(&h, &s, t, &PropagatorConfig::default()).unwrap();
        let want = dense_propagate(&h, &s, t);
        amp_err = amp_err.max(got.amplitudes().iter().zip(&want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max));
        let mut p = Propagator::new(&h, &PropagatorConfig::default()).unwrap();
        let mut cur = s;
        for _ in 0..20 {
            cur = p.advance(&cur, 5.0).unwrap();
        }
        drift = drift.max((cur.norm() - 1.0).abs());
    }
    (
        amp_err < 1e-8 && drift < 1e-9,
        format!("max amplitude error {amp_err:.1e}, norm drift over t = 100: {drift:.1e}"),
    )
}

fn c3() -> Outcome {
    let mut c = ExperimentConfig::default();
    c.packet.phi_x = 6.0;
    c.packet.phi_y = 6.0;
    c.run.distance = 40.0;
    let r = run_free_propagation(&c).unwrap();
    let v = r.get_f64("speed").unwrap();
    ((v - 2.0).abs() < 0.02, format!("centroid speed {v:.5} aJ"))
}

fn c4() -> Outcome {
    let mut c = ExperimentConfig::default();
    let g = run_guided_propagation(&c).unwrap();
    let tube = g.get_f64("min_tube_population").unwrap();
    // free packet with the same initial transverse width
    c.packet.phi_x = g.get_f64("sigma_x0").unwrap() * 2f64.sqrt();
    c.packet.transverse = magnon_experiments::config::Transverse::Gaussian;
    let f = run_free_propagation(&c).unwrap();
    let growth = f.get_f64("sigma_x_growth").unwrap();
    (
        tube >= 0.99 && growth > 2.0,
        format!("guided tube population >= {tube:.5} over {} a, free sigma_x grows {growth:.2}x", c.run.distance),
    )
}

fn c5() -> Outcome {
    let c = ExperimentConfig::default();
    let rows = mode_rows(&c).unwrap();
    let cf_ok = rows.iter().all(|r| (0.0..=1.0).contains(&r.ground_cf));
    let mono = rows.windows(2).all(|w| {
        w[0].wg != w[1].wg || (w[1].ground_cf >= w[0].ground_cf && w[1].confined >= w[0].confined)
    });
    let bound = rows.iter().filter(|r| r.eps_min > 0.0).all(|r| r.bound >= 1 && r.ground_energy < 0.0);
    let first = &rows[0];
    let last = &rows[rows.len() - 1];
    (
        cf_ok && mono && bound,
        format!(
            "{} depths; ground CF {:.3} -> {:.3}, confined {} -> {}, bound at every depth: {bound}",
            rows.len(),
            first.ground_cf,
            last.ground_cf,
            first.confined,
            last.confined
        ),
    )
}

fn c6() -> Outcome {
    let c = ExperimentConfig::default();
    let r = run_bend_study(&c).unwrap();
    let t = r.table.unwrap();
    let loss = t.column("loss").unwrap();
    let ordered = loss.windows(2).all(|w| w[1] < w[0]);
    let last = loss[loss.len() - 1];
    let text: Vec<String> = c.bend.radii.iter().zip(&loss).map(|(r, l)| format!("R={r}: {l:.2e}")).collect();
    (ordered && last < 0.01, text.join(", "))
}

fn c7a() -> Outcome {
    let c = ExperimentConfig::default();
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for [eps, sep] in &c.coupler.points {
        let p = run_coupler_point(&c, *eps, *sep, None).unwrap();
        worst = worst.max(p.relative_error());
        n += 1;
    }
    let g = coupling_grid(&c).unwrap();
    let at = |e: f64, s: f64| g.iter().find(|r| r.eps_min == e && r.sep == s).unwrap().splitting;
    let (es, ss) = (&c.coupler.grid_eps, &c.coupler.grid_sep);
    let mut mono = true;
    for e in es {
        mono &= ss.windows(2).all(|w| at(*e, w[1]) < at(*e, w[0]));
    }
    for s in ss {
        mono &= es.windows(2).all(|w| at(w[1], *s) < at(w[0], *s));
    }
    (
        worst < 0.10 && n >= 3 && mono,
        format!("{n} points, worst l½ error {:.2}%, splitting monotone in depth and separation: {mono}", 100.0 * worst),
    )
}

fn c7b() -> Outcome {
    let p = quoted_device_check(1.0).unwrap();
    let ej = (p.splitting - QUOTED_COUPLING).abs() / QUOTED_COUPLING;
    let el = (p.half_transfer - QUOTED_HALF_TRANSFER).abs() / QUOTED_HALF_TRANSFER;
    (
        ej < 0.25 && el < 0.15,
        format!(
            "splitting {:.3e} J vs {QUOTED_COUPLING} (raw {:.3e}), l½ {:.0} vs {QUOTED_HALF_TRANSFER}",
            p.splitting, p.coupling_raw, p.half_transfer
        ),
    )
}

fn c8() -> Outcome {
    let c = ExperimentConfig::default();
    let (_, pts) = phase_sweep(&c).unwrap();
    let x: Vec<f64> = pts.iter().map(|p| p.eps).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.phase).collect();
    let fit = linear_fit(&x, &y).unwrap();
    let mut r_small: f64 = 0.0;
    for eps in [0.01, 0.03, 0.05] {
        r_small = r_small.max(transmission_run(&c, eps).unwrap().reflected);
    }
    let r_big = transmission_run(&c, 2.0).unwrap().reflected;
    (
        fit.r2 > 0.99 && r_small < 0.01 && r_big > 0.1,
        format!(
            "phase slope {:.2} rad/J with R² {:.6}; R <= {r_small:.1e} for depth <= 0.05 J; R = {r_big:.3} at 2 J",
            fit.slope, fit.r2
        ),
    )
}

fn c9() -> Outcome {
    let c = ExperimentConfig::default();
    let sw = michelson_sweep(&c).unwrap();
    let p0 = sw.outputs.iter().find(|o| o.eps == 0.0).unwrap().right;
    let q = sw.quarter_ratio().unwrap_or(f64::NAN);
    (
        p0 > 0.95 && sw.fit.r2 > 0.98 && (q - 0.25).abs() <= 0.15 * 0.25,
        format!(
            "right output {p0:.4} without crystal, sine R² {:.6}, equal split at {q:.4} of the cycle ({:.4} J of {:.4} J)",
            sw.fit.r2,
            sw.equal_split.unwrap_or(f64::NAN),
            sw.fit.period()
        ),
    )
}

fn c10() -> Outcome {
    let m = MaterialParams::phosphorus_in_silicon();
    let i1 = current_for_depth(1e-4, 100.0, &m).unwrap();
    let linear = [2.0, 3.0, 10.0].iter().all(|k| current_for_depth(k * 1e-4, 100.0, &m).unwrap() == k * i1);
    // the quoted speed is aJ/ħ; the quoted round trip uses it
    let v1 = max_speed(&m) / 2.0;
    let speed_ok = (v1 - REFERENCE_SPEED_M_PER_S).abs() / REFERENCE_SPEED_M_PER_S < 0.02;
    let rt = traversal_time(5e-6, REFERENCE_SPEED_M_PER_S, true).unwrap();
    let rt_ok = rt >= 16.5e-9 * 0.98 && rt <= 16.7e-9 * 1.02;
    let table = conversion_table(&m, 5e-6).unwrap();
    let surfaced = table.iter().any(|r| r.note.contains("reference value") && r.note.contains("gamma*mu"));
    let c = ExperimentConfig::default();
    let (rec, _) = run_units(&c).unwrap();
    let warned = !rec.warnings.is_empty();
    (
        linear && speed_ok && rt_ok && surfaced && warned,
        format!(
            "current linear: {linear}; aJ/ħ = {v1:.1} m/s, 2aJ/ħ = {:.1} m/s; 5 um round trip at 607 m/s = {:.2} ns; constants note in output: {}",
            max_speed(&m),
            rt * 1e9,
            surfaced && warned
        ),
    )
}

fn main() {
    let checks: [(&str, fn() -> Outcome); 11] = [
        ("1", c1),
        ("2", c2),
        ("3", c3),
        ("4", c4),
        ("5", c5),
        ("6", c6),
        ("7a", c7a),
        ("7b", c7b),
        ("8", c8),
        ("9", c9),
        ("10", c10),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut bad = Vec::new();
    for (id, f) in checks {
        if !only.is_empty() && !only.iter().any(|o| o == id) {
            continue;
        }
        let clock = Instant::now();
        let (pass, detail) = f();
        let secs = clock.elapsed().as_secs_f64();
        let known = KNOWN_UNATTAINABLE.iter().find(|k| k.0 == id);
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("criterion {id:>3}: {tag}  {detail}  [{secs:.1} s]");
        match (pass, known) {
            (false, Some((_, why))) => println!("               expected failure: {why}"),
            (false, None) => bad.push(format!("criterion {id} failed")),
            (true, Some(_)) => bad.push(format!("criterion {id} passed but is listed as unattainable")),
            (true, None) => {}
        }
    }
    if !bad.is_empty() {
        eprintln!("{}", bad.join("\n"));
        std::process::exit(1);
    }
}
