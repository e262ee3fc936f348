use magnon_core::dynamics::{centroid, region_population, relative_phase, scattering_rt, spread};
use magnon_core::{
    build_hamiltonian, evolve, make_packet, DmcSpec, Field, Lattice, Layout, MagnonError, Method, Propagator,
    PropagatorConfig, Region, State, WavepacketParams, C64,
};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::FRAC_PI_2;

fn random_system(n: usize, seed: u64) -> (magnon_core::Hamiltonian, State) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lat = Lattice::hard_wall(n, n, 1.0).unwrap();
    let mut f = Field::zeros(n, n);
    f.eps.iter_mut().for_each(|e| *e = rng.random_range(-1.0..1.0));
    let h = build_hamiltonian(&lat, &f).unwrap();
    let amps = (0..n * n)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    (h, State::from_amplitudes(n, n, amps).unwrap())
}

fn dense_propagate(h: &magnon_core::Hamiltonian, s: &State, t: f64) -> Vec<C64> {
    let n = h.dim();
    let eig = SymmetricEigen::new(DMatrix::from_row_slice(n, n, &h.to_dense()));
    let v = &eig.eigenvectors;
    let mut out = vec![C64::new(0.0, 0.0); n];
    for k in 0..n {
        let proj: C64 = (0..n).map(|i| s.amplitudes()[i] * v[(i, k)]).sum();
        let c = proj * C64::from_polar(1.0, -eig.eigenvalues[k] * t);
        for i in 0..n {
            out[i] += c * v[(i, k)];
        }
    }
    out
}

fn max_err(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn chebyshev_matches_dense_oracle() {
    let (h, s) = random_system(12, 1);
    let got = evolve(&h, &s, 7.0, &PropagatorConfig::default()).unwrap();
    assert!(max_err(got.amplitudes(), &dense_propagate(&h, &s, 7.0)) < 1e-8);
}

#[test]
fn krylov_and_exact_match_dense_oracle() {
    let (h, s) = random_system(10, 2);
    let want = dense_propagate(&h, &s, 5.5);
    for method in [Method::Krylov, Method::ExactSmall] {
        let cfg = PropagatorConfig { method, ..PropagatorConfig::default() };
        let got = evolve(&h, &s, 5.5, &cfg).unwrap();
        assert!(max_err(got.amplitudes(), &want) < 1e-8, "{method:?}");
    }
}

#[test]
fn zero_time_is_identity() {
    let (h, s) = random_system(5, 3);
    assert_eq!(evolve(&h, &s, 0.0, &PropagatorConfig::default()).unwrap(), s);
}

#[test]
fn long_run_keeps_norm() {
    let (h, s) = random_system(16, 4);
    let mut p = Propagator::new(&h, &PropagatorConfig::default()).unwrap();
    let mut cur = s;
    for _ in 0..10 {
        cur = p.advance(&cur, 10.0).unwrap();
    }
    assert!((cur.norm() - 1.0).abs() < 1e-9);
}

#[test]
fn composition_and_reversal() {
    let (h, s) = random_system(11, 5);
    let cfg = PropagatorConfig::default();
    let a = evolve(&h, &evolve(&h, &s, 2.5, &cfg).unwrap(), 4.0, &cfg).unwrap();
    let b = evolve(&h, &s, 6.5, &cfg).unwrap();
    assert!(max_err(a.amplitudes(), b.amplitudes()) < 1e-8);
    let back = evolve(&h, &b, -6.5, &cfg).unwrap();
    assert!(max_err(back.amplitudes(), s.amplitudes()) < 1e-8);
}

#[test]
fn energy_is_conserved() {
    let (h, s) = random_system(13, 6);
    let e0 = h.expectation(&s).unwrap();
    let mut p = Propagator::new(&h, &PropagatorConfig::default()).unwrap();
    let mut cur = s;
    for _ in 0..5 {
        cur = p.advance(&cur, 9.0).unwrap();
        assert!((h.expectation(&cur).unwrap() - e0).abs() < 1e-8);
    }
}

#[test]
fn single_precision_propagation() {
    let lat = magnon_core::Lattice32::hard_wall(8, 8, 1.0).unwrap();
    let h = build_hamiltonian(&lat, &magnon_core::Field32::zeros(8, 8)).unwrap();
    let s = magnon_core::State32::localized(8, 8, 3, 4).unwrap();
    let t = evolve(&h, &s, 3.0f32, &PropagatorConfig { tol: 1e-9f32, ..PropagatorConfig::default() }).unwrap();
    assert!((t.norm() - 1.0).abs() < 1e-5);
    let h64 = build_hamiltonian(&Lattice::hard_wall(8, 8, 1.0).unwrap(), &Field::zeros(8, 8)).unwrap();
    let t64 = evolve(&h64, &State::localized(8, 8, 3, 4).unwrap(), 3.0, &PropagatorConfig::default()).unwrap();
    for (a, b) in t.amplitudes().iter().zip(t64.amplitudes()) {
        assert!((a.re as f64 - b.re).abs() < 1e-5 && (a.im as f64 - b.im).abs() < 1e-5);
    }
}

#[test]
fn bad_tolerance_rejected() {
    let (h, _) = random_system(4, 0);
    let cfg = PropagatorConfig { tol: 1e-6, ..PropagatorConfig::default() };
    assert!(matches!(Propagator::new(&h, &cfg), Err(MagnonError::Config { .. })));
}

#[test]
fn resting_packet_is_real_symmetric_and_centred() {
    let lat = Lattice::hard_wall(41, 41, 1.0).unwrap();
    let p = make_packet(&WavepacketParams::gaussian(20.0, 20.0, 5.0, 0.0, 0.0), &lat).unwrap();
    assert!(p.warning().is_none());
    for j in 0..41 {
        for i in 0..41 {
            let a = p.state.amplitude(i, j);
            assert!(a.im == 0.0 && a.re > 0.0);
            assert!((a.re - p.state.amplitude(40 - i, j).re).abs() < 1e-15);
        }
    }
    let (cx, cy) = centroid(&p.state);
    assert!((cx - 20.0).abs() < 0.1 && (cy - 20.0).abs() < 0.1);
}

#[test]
fn clipped_packet_warns() {
    let lat = Lattice::hard_wall(30, 30, 1.0).unwrap();
    let p = make_packet(&WavepacketParams::gaussian(2.0, 15.0, 5.0, 0.0, 0.0), &lat).unwrap();
    assert!(p.warning().is_some());
}

#[test]
fn launch_energy_near_two() {
    let lat = Lattice::hard_wall(80, 160, 1.0).unwrap();
    let h = build_hamiltonian(&lat, &Field::zeros(80, 160)).unwrap();
    let mut w = WavepacketParams::gaussian(40.0, 80.0, 20.0, 0.0, FRAC_PI_2);
    w.phi_x = 20.0;
    let p = make_packet(&w, &lat).unwrap();
    // ⟨ω⟩ = 4 - 2(e^{-1/4φ²} cos kx + e^{-1/4φ²} cos ky) for a Gaussian in k
    assert!((h.expectation(&p.state).unwrap() - (4.0 - 2.0 * (-1.0f64 / 1600.0).exp())).abs() < 1e-3);
}

#[test]
fn k_zero_packet_spreads_isotropically() {
    let lat = Lattice::hard_wall(81, 81, 1.0).unwrap();
    let h = build_hamiltonian(&lat, &Field::zeros(81, 81)).unwrap();
    let p = make_packet(&WavepacketParams::gaussian(40.0, 40.0, 4.0, 0.0, 0.0), &lat).unwrap();
    let s = evolve(&h, &p.state, 8.0, &PropagatorConfig::default()).unwrap();
    let (sx, sy) = spread(&s);
    assert!((sx - sy).abs() < 0.01 * sx);
}

#[test]
fn populations_and_phase() {
    let lat = Lattice::hard_wall(20, 20, 1.0).unwrap();
    let s = make_packet(&WavepacketParams::gaussian(10.0, 10.0, 3.0, 0.3, 0.0), &lat).unwrap().state;
    assert!((region_population(&s, &Region::All) - 1.0).abs() < 1e-12);
    let a = Region::Rect { x0: 0.0, x1: 9.0, y0: 0.0, y1: 19.0 };
    let b = Region::Rect { x0: 10.0, x1: 19.0, y0: 0.0, y1: 19.0 };
    let ab = Region::Union(vec![a.clone(), b.clone()]);
    let sum = region_population(&s, &a) + region_population(&s, &b);
    assert!((region_population(&s, &ab) - sum).abs() < 1e-12);
    assert_eq!(relative_phase(&s, &s, &Region::All).unwrap(), 0.0);
    let rot = s.with_global_phase(1.234);
    assert!((relative_phase(&s, &rot, &Region::All).unwrap() - 1.234).abs() < 1e-12);
    let empty = Region::Rect { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 };
    assert!(matches!(relative_phase(&s, &s, &empty), Err(MagnonError::InsufficientOverlap { .. })));
}

fn dmc_run(eps: f64, ky: f64, t_run: f64) -> magnon_core::Result<magnon_core::dynamics::Scattering<f64>> {
    let (nx, ny) = (8, 700);
    let lat = Lattice::hard_wall(nx, ny, 1.0).unwrap();
    let layout = Layout::new().with_dmc(DmcSpec::along_y(10, 20.0, eps, 250.0).unwrap());
    let (f, _) = magnon_core::layout_to_field(&layout, &lat).unwrap();
    let h = build_hamiltonian(&lat, &f).unwrap();
    // uniform across x (k_x = 0 plane wave on the strip)
    let mut w = WavepacketParams::gaussian(3.5, 150.0, 15.0, 0.0, ky);
    w.transverse = Some(vec![1.0; nx]);
    let p = make_packet(&w, &lat).unwrap();
    let cfg = PropagatorConfig { t_step: 10.0, ..PropagatorConfig::default() };
    scattering_rt(&h, &p.state, 210.0, 490.0, t_run, &cfg)
}

#[test]
fn dmc_scattering_regimes() {
    let free = dmc_run(0.0, FRAC_PI_2, 220.0).unwrap();
    assert!(free.transmitted > 0.99 && free.reflected < 1e-3);
    let weak = dmc_run(0.05, FRAC_PI_2, 220.0).unwrap();
    assert!(weak.reflected < 0.01);
    let strong = dmc_run(2.0, FRAC_PI_2, 220.0).unwrap();
    assert!(strong.reflected > 0.2, "{strong:?}");
    assert!(matches!(dmc_run(0.0, FRAC_PI_2, 20.0), Err(MagnonError::InconclusiveScattering(_))));
}

#[test]
fn slower_packets_reflect_from_weaker_crystals() {
    // the slow packet is timed to clear the crystal before reaching the far wall
    let fast = dmc_run(0.2, FRAC_PI_2, 205.0).unwrap();
    let slow = dmc_run(0.2, 0.5, 430.0).unwrap();
    assert!(fast.reflected < 0.01 && slow.reflected > 0.5, "{slow:?} {fast:?}");
}

