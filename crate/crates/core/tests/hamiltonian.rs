use std::f64::consts::PI;

use magnon_core::spectral::{dispersion, dispersion_diagonal};
use magnon_core::{apply_hamiltonian, build_hamiltonian, Boundary, CouplingSpec, Field, Lattice, State, C64};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dense(h: &magnon_core::Hamiltonian) -> DMatrix<f64> {
    let n = h.dim();
    DMatrix::from_row_slice(n, n, &h.to_dense())
}

fn sorted_grid(nx: usize, ny: usize, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let mut w: Vec<f64> = (0..nx)
        .flat_map(|a| (0..ny).map(move |b| (a, b)))
        .map(|(a, b)| f(2.0 * PI * a as f64 / nx as f64, 2.0 * PI * b as f64 / ny as f64))
        .collect();
    w.sort_by(|a, b| a.partial_cmp(b).unwrap());
    w
}

fn sorted_eigs(h: &magnon_core::Hamiltonian) -> Vec<f64> {
    let mut e: Vec<f64> = SymmetricEigen::new(dense(h)).eigenvalues.iter().copied().collect();
    e.sort_by(|a, b| a.partial_cmp(b).unwrap());
    e
}

#[test]
fn periodic_16x16_spectrum_is_free_dispersion() {
    let lat = Lattice::periodic(16, 16, 1.0).unwrap();
    let h = build_hamiltonian(&lat, &Field::zeros(16, 16)).unwrap();
    let want = sorted_grid(16, 16, |kx, ky| dispersion(kx, ky, 1.0));
    let got = sorted_eigs(&h);
    let err = want.iter().zip(&got).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err < 1e-12, "{err}");
}

#[test]
fn periodic_with_diagonal_coupling_matches_band() {
    let lat = Lattice::new(12, 10, CouplingSpec::new(1.0, 0.3).unwrap(), Boundary::Periodic).unwrap();
    let h = build_hamiltonian(&lat, &Field::zeros(12, 10)).unwrap();
    let want = sorted_grid(12, 10, |kx, ky| dispersion_diagonal(kx, ky, 1.0, 0.3));
    let got = sorted_eigs(&h);
    let err = want.iter().zip(&got).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err < 1e-12, "{err}");
}

#[test]
fn plane_waves_are_eigenvectors() {
    let lat = Lattice::periodic(8, 8, 1.0).unwrap();
    let h = build_hamiltonian(&lat, &Field::zeros(8, 8)).unwrap();
    for (a, b) in [(0, 0), (1, 3), (4, 4), (7, 2)] {
        let (kx, ky) = (2.0 * PI * a as f64 / 8.0, 2.0 * PI * b as f64 / 8.0);
        let amps: Vec<C64> = (0..64)
            .map(|k| C64::from_polar(1.0, kx * (k % 8) as f64 + ky * (k / 8) as f64))
            .collect();
        let s = State::from_amplitudes(8, 8, amps).unwrap();
        let hs = apply_hamiltonian(&h, &s).unwrap();
        let w = dispersion(kx, ky, 1.0);
        let err = hs
            .iter()
            .zip(s.amplitudes())
            .map(|(x, y)| (x - y * w).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12);
    }
}

#[test]
fn hermitian_on_random_vectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let lat = Lattice::hard_wall(9, 7, 1.0).unwrap();
    let mut f = Field::zeros(9, 7);
    f.eps.iter_mut().for_each(|e| *e = rng.random_range(-0.5..0.5));
    let h = build_hamiltonian(&lat, &f).unwrap();
    let rand_state = |rng: &mut ChaCha8Rng| {
        let a = (0..63)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        State::from_amplitudes(9, 7, a).unwrap()
    };
    let dot = |a: &[C64], b: &[C64]| a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C64>();
    for _ in 0..10 {
        let (u, v) = (rand_state(&mut rng), rand_state(&mut rng));
        let hu = apply_hamiltonian(&h, &u).unwrap();
        let hv = apply_hamiltonian(&h, &v).unwrap();
        let a = dot(u.amplitudes(), &hv);
        let b = dot(v.amplitudes(), &hu).conj();
        assert!((a - b).norm() < 1e-12);
    }
}

#[test]
fn matvec_independent_of_thread_count() {
    let lat = Lattice::hard_wall(90, 70, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut f = Field::zeros(90, 70);
    f.eps.iter_mut().for_each(|e| *e = rng.random_range(-0.3..0.3));
    let h = build_hamiltonian(&lat, &f).unwrap();
    let x: Vec<C64> = (0..6300).map(|_| C64::new(rng.random(), rng.random())).collect();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let mut y = vec![C64::new(0.0, 0.0); 6300];
        pool.install(|| h.matvec(&x, &mut y).unwrap());
        y
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn constant_offset_shifts_spectrum() {
    let lat = Lattice::hard_wall(6, 5, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut f = Field::zeros(6, 5);
    f.eps.iter_mut().for_each(|e| *e = rng.random_range(-1.0..1.0));
    let e0 = sorted_eigs(&build_hamiltonian(&lat, &f).unwrap());
    let e1 = sorted_eigs(&build_hamiltonian(&lat, &f.offset(0.37)).unwrap());
    for (a, b) in e0.iter().zip(&e1) {
        assert!((b - a - 0.37).abs() < 1e-12);
    }
}

#[test]
fn free_hard_wall_spectrum_inside_band() {
    let lat = Lattice::hard_wall(14, 11, 1.0).unwrap();
    let e = sorted_eigs(&build_hamiltonian(&lat, &Field::zeros(14, 11)).unwrap());
    // the free hard-wall operator is a graph Laplacian: the uniform state sits at 0
    assert!(e[0].abs() < 1e-12 && *e.last().unwrap() < 8.0);
}
