use std::f64::consts::{FRAC_PI_2, PI};

use magnon_core::potentials::wire_profile;
use magnon_core::spectral::{
    confinement_factor, dispersion, dispersion_diagonal, group_velocity, guide_slice, half_transfer_length,
    transverse_modes, wavevector_for_speed,
};
use magnon_core::units::{current_for_depth, MaterialParams};
use magnon_core::{
    build_hamiltonian, evolve, layout_to_field, Field, GuidePath, GuideSpec, Lattice, Layout, Point,
    PropagatorConfig, State, WirePairProfile, C64,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flatten_is_a_bijection(nx in 2usize..40, ny in 2usize..40, seed in 0usize..10_000) {
        let lat = Lattice::hard_wall(nx, ny, 1.0).unwrap();
        let k = seed % (nx * ny);
        let (i, j) = lat.unflatten(k);
        prop_assert_eq!(lat.flatten(i, j), k);
        prop_assert_eq!(lat.unflatten(lat.flatten(i, j)), (i, j));
    }

    #[test]
    fn dispersion_symmetries(kx in -PI..PI, ky in -PI..PI, j in 0.1f64..3.0) {
        let w = dispersion(kx, ky, j);
        prop_assert!((w - dispersion(ky, kx, j)).abs() < 1e-12);
        prop_assert!((w - dispersion(-kx, ky, j)).abs() < 1e-12);
        prop_assert!(w >= -1e-12 && w <= 8.0 * j + 1e-12);
    }

    #[test]
    fn axis_cut(kx in -PI..PI, je in 0.1f64..2.0, jd in 0.0f64..1.0) {
        let a = dispersion_diagonal(kx, 0.0, je, jd);
        let b = dispersion(kx, 0.0, je + 2.0 * jd);
        // a few ulps of the largest term; the terms cancel near kx = 0
        let scale = 8.0 * (je + jd);
        prop_assert!((a - b).abs() <= 4.0 * f64::EPSILON * scale);
        prop_assert!((dispersion_diagonal(kx, 0.7, je, 0.0) - dispersion(kx, 0.7, je)).abs() < 1e-12);
    }

    #[test]
    fn group_velocity_is_gradient(kx in -PI..PI, ky in -PI..PI) {
        let h = 1e-6;
        let (vx, vy) = group_velocity(kx, ky, 1.0);
        let fx = (dispersion(kx + h, ky, 1.0) - dispersion(kx - h, ky, 1.0)) / (2.0 * h);
        let fy = (dispersion(kx, ky + h, 1.0) - dispersion(kx, ky - h, 1.0)) / (2.0 * h);
        prop_assert!((vx - fx).abs() < 1e-6 && (vy - fy).abs() < 1e-6);
    }

    #[test]
    fn speed_inverse(v in 0.0f64..2.0) {
        let k = wavevector_for_speed(v, 1.0).unwrap();
        prop_assert!((0.0..=FRAC_PI_2).contains(&k));
        prop_assert!((group_velocity(0.0, k, 1.0).1 - v).abs() < 1e-12);
    }

    #[test]
    fn wire_profile_even_and_normalised(wg in 1.0f64..100.0, d in 1.0f64..100.0, eps in 0.0f64..2.0, x in 0.0f64..300.0) {
        let p = WirePairProfile::new(wg, d, eps).unwrap();
        prop_assert!((wire_profile(x, &p).unwrap() - wire_profile(-x, &p).unwrap()).abs() < 1e-15);
        prop_assert!((wire_profile(0.0, &p).unwrap() + eps).abs() < 1e-15);
    }

    #[test]
    fn confinement_factor_bounds(eps in 0.0f64..0.5, w1 in 0.0f64..40.0, dw in 0.0f64..40.0, m in 0usize..5) {
        let p = WirePairProfile::new(8.0, 8.0, eps).unwrap();
        let ms = transverse_modes(&guide_slice(81, 40.0, &p).unwrap(), 1.0).unwrap();
        let a = confinement_factor(&ms.modes[m], 40.0, w1);
        let b = confinement_factor(&ms.modes[m], 40.0, w1 + dw);
        prop_assert!((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b));
        prop_assert!(b >= a - 1e-15);
    }

    #[test]
    fn layout_additive_and_linear(x1 in 5.0f64..25.0, x2 in 15.0f64..35.0, e1 in 0.0f64..1.0, e2 in 0.0f64..1.0) {
        let lat = Lattice::hard_wall(40, 12, 1.0).unwrap();
        let g = |x: f64, e: f64| GuideSpec::new(
            GuidePath::straight(Point::new(x, 0.0), FRAC_PI_2, 11.0).unwrap(),
            WirePairProfile::new(4.0, 3.0, e).unwrap(),
        );
        let a = Layout::new().with_guide(g(x1, e1));
        let b = Layout::new().with_guide(g(x2, e2));
        let (fa, _) = layout_to_field(&a, &lat).unwrap();
        let (fb, _) = layout_to_field(&b, &lat).unwrap();
        let (fab, _) = layout_to_field(&a.union(&b), &lat).unwrap();
        let sum = fa.add(&fb).unwrap();
        for (p, q) in fab.eps.iter().zip(&sum.eps) {
            prop_assert!((p - q).abs() < 1e-15);
        }
        let (f2, _) = layout_to_field(&Layout::new().with_guide(g(x1, 2.0 * e1)), &lat).unwrap();
        for (p, q) in f2.eps.iter().zip(&fa.eps) {
            prop_assert!((p - 2.0 * q).abs() < 1e-15);
        }
    }

    #[test]
    fn evolution_is_unitary(seed in 0u64..1000, t in 0.0f64..50.0) {
        let n = 6;
        let lat = Lattice::hard_wall(n, n, 1.0).unwrap();
        let mut f = Field::zeros(n, n);
        for (k, e) in f.eps.iter_mut().enumerate() {
            *e = ((seed as f64 + 1.0) * (k as f64 + 0.5)).sin();
        }
        let h = build_hamiltonian(&lat, &f).unwrap();
        let amps = (0..n * n).map(|k| C64::new((k as f64 + seed as f64).cos(), (k as f64 * 0.3).sin())).collect();
        let s = State::from_amplitudes(n, n, amps).unwrap();
        let out = evolve(&h, &s, t, &PropagatorConfig::default()).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn constant_shift_is_a_global_phase(c in -2.0f64..2.0, t in 0.0f64..20.0) {
        let lat = Lattice::hard_wall(7, 6, 1.0).unwrap();
        let f = Field::from_fn(7, 6, |i, j| 0.1 * (i as f64 - j as f64));
        let s = State::localized(7, 6, 3, 2).unwrap();
        let cfg = PropagatorConfig::default();
        let a = evolve(&build_hamiltonian(&lat, &f).unwrap(), &s, t, &cfg).unwrap();
        let b = evolve(&build_hamiltonian(&lat, &f.offset(c)).unwrap(), &s, t, &cfg).unwrap();
        for (x, y) in a.probabilities().iter().zip(b.probabilities()) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn half_transfer_scaling(v in 0.1f64..2.0, j in 1e-4f64..0.1) {
        let l = half_transfer_length(v, j).unwrap();
        prop_assert!((half_transfer_length(v, 2.0 * j).unwrap() - l / 2.0).abs() < 1e-9 * l);
    }

    #[test]
    fn current_linear(eps in 1e-6f64..1.0, d in 1.0f64..1000.0) {
        let m = MaterialParams::phosphorus_in_silicon();
        let i = current_for_depth(eps, d, &m).unwrap();
        prop_assert!((current_for_depth(2.0 * eps, d, &m).unwrap() - 2.0 * i).abs() <= 1e-15 * i);
        // non-power-of-two factors round differently through the product
        prop_assert!((current_for_depth(eps, 3.0 * d, &m).unwrap() - 3.0 * i).abs() <= 8.0 * f64::EPSILON * i);
    }
}
