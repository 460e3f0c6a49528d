use num_complex::Complex64;
use proptest::prelude::*;

use bec_teleport::channel::collide;
use bec_teleport::corrections::{p_even_analytic, total_efficiency, AuxiliaryKind, AuxiliaryPrep};
use bec_teleport::dynamics::*;
use bec_teleport::fock::*;
use bec_teleport::lattice::{bands, potential_at_phase, LatticeParams};

fn state_strategy(modes: usize, n_max: usize) -> impl Strategy<Value = StateVector> {
    let cutoff = FockCutoff::new(n_max).unwrap();
    let dim = cutoff.dim().pow(modes as u32);
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim)
        .prop_filter("nonzero", |v| v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3))
        .prop_map(move |v| {
            let amps = v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect();
            StateVector::from_amplitudes(modes, cutoff, amps).unwrap().normalized().unwrap()
        })
}

fn amp() -> impl Strategy<Value = Complex64> {
    (-1.2f64..1.2, -1.2f64..1.2).prop_map(|(a, b)| Complex64::new(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn propagators_match_dense_oracle(
        s in state_strategy(2, 6),
        e0 in 0.0f64..3.0, kappa in 0.0f64..2.0, omega in 0.0f64..2.0, t in 0.0f64..4.0,
    ) {
        let kp = KerrParams::new(e0, kappa).unwrap();
        let jp = JosephsonParams::new(omega).unwrap();
        let fast = evolve_josephson(&s, (0, 1), jp, kp, t).unwrap();
        let oracle = brute_force_oracle(&s, &josephson_terms((0, 1), jp, kp), t, DEFAULT_ORACLE_CAP).unwrap();
        prop_assert!(max_amplitude_difference(&fast, &oracle).unwrap() < 1e-9);
        let fast = evolve_cross_kerr(&s, (1, 0), kappa, t).unwrap();
        let oracle = brute_force_oracle(&s, &cross_kerr_terms((1, 0), kappa), t, DEFAULT_ORACLE_CAP).unwrap();
        prop_assert!(max_amplitude_difference(&fast, &oracle).unwrap() < 1e-9);
    }

    #[test]
    fn evolution_preserves_norm(s in state_strategy(3, 4), kappa in 0.0f64..2.0, t in 0.0f64..10.0) {
        let kp = KerrParams::new(1.0, kappa).unwrap();
        let out = evolve_self_kerr(&s, 2, kp, t).unwrap();
        let out = evolve_cross_kerr(&out, (0, 2), kappa, t).unwrap();
        let out = evolve_josephson(&out, (1, 2), JosephsonParams::new(0.7).unwrap(), kp, t).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn double_collision_is_joint_parity(a in amp(), b in amp()) {
        // S^2 = P, so two collisions send |a, b> to |-a, -b>
        let cutoff = FockCutoff::new(14).unwrap().with_leakage_bound(1e-4);
        let kp = KerrParams::new(1.0, 1.0).unwrap();
        let s = tensor(&prepare_coherent(CoherentSpec::new(a), cutoff).unwrap(), &prepare_coherent(CoherentSpec::new(b), cutoff).unwrap()).unwrap();
        let twice = collide(&collide(&s, (0, 1), kp).unwrap(), (0, 1), kp).unwrap();
        let flipped = tensor(&prepare_coherent(CoherentSpec::new(-a), cutoff).unwrap(), &prepare_coherent(CoherentSpec::new(-b), cutoff).unwrap()).unwrap();
        prop_assert!(fidelity(&twice, &flipped).unwrap() > 1.0 - 1e-10);
    }

    #[test]
    fn displacements_compose(a in amp(), d1 in -0.6f64..0.6, d2 in -0.6f64..0.6) {
        let cutoff = FockCutoff::new(30).unwrap();
        let s = prepare_coherent(CoherentSpec::new(a), cutoff).unwrap();
        let out = displacement(&displacement(&s, 0, Complex64::new(d1, 0.0)).unwrap(), 0, Complex64::new(d2, 0.0)).unwrap();
        let direct = prepare_coherent(CoherentSpec::new(a + d1 + d2), cutoff).unwrap();
        prop_assert!(fidelity(&out, &direct).unwrap() > 1.0 - 1e-9);
    }

    #[test]
    fn state_json_round_trip(s in state_strategy(2, 3)) {
        let back = StateVector::from_json(&s.to_json().unwrap()).unwrap();
        prop_assert_eq!(back.amplitudes(), s.amplitudes());
    }

    #[test]
    fn efficiency_is_bounded_and_monotone(pe in 0.0f64..=1.0, pd in 0.0f64..=1.0, step in 0.0f64..0.1) {
        let p = total_efficiency(pe, pd).unwrap().p_total;
        prop_assert!((0.25..=1.0).contains(&p));
        prop_assert!(total_efficiency((pe + step).min(1.0), pd).unwrap().p_total >= p);
        prop_assert!(total_efficiency(pe, (pd + step).min(1.0)).unwrap().p_total >= p);
    }

    #[test]
    fn p_even_is_probability(x in 0.0f64..6.0) {
        for kind in [AuxiliaryKind::Coherent, AuxiliaryKind::SqueezedVacuum] {
            let p = p_even_analytic(AuxiliaryPrep::new(kind, x).unwrap());
            prop_assert!((0.5..=1.0).contains(&p));
        }
    }

    #[test]
    fn lattice_bands_are_ordered_and_periodic(
        theta in 0.0f64..7.0, zp in 0.0f64..7.0, bpar in -0.2f64..0.2, bperp in 0.0f64..0.2,
    ) {
        let p = LatticeParams::new(1.0, theta, 1.0, bpar, bperp, 1.0).unwrap();
        let (lo, hi) = bands(&potential_at_phase(zp, &p));
        let (lo2, hi2) = bands(&potential_at_phase(zp + 2.0 * std::f64::consts::PI, &p));
        prop_assert!(lo <= hi);
        prop_assert!(hi - lo >= bperp - 1e-12);
        prop_assert!((lo - lo2).abs() < 1e-9 && (hi - hi2).abs() < 1e-9);
    }
}
