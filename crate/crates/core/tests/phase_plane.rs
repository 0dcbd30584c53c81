use proptest::prelude::*;
use quasiconv::phase_plane::{classify_orbit, hamiltonian, minimal_period, orbit_profile};
use quasiconv::{NonlinearitySpec, OrbitClass, PhasePoint};

fn allen_cahn() -> NonlinearitySpec {
    NonlinearitySpec::cubic_bistable(-1.0, 0.0, 1.0).unwrap()
}

fn focusing() -> NonlinearitySpec {
    NonlinearitySpec::polynomial(vec![0.0, -1.0, 0.0, 1.0]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn hamiltonian_is_conserved_along_profiles(p in 0.05f64..0.95, flip in any::<bool>()) {
        let spec = allen_cahn();
        let p = if flip { -p } else { p };
        let cls = classify_orbit(&spec, PhasePoint::new(p, 0.0));
        prop_assert_eq!(cls.tag(), "periodic");
        let op = orbit_profile(&spec, &cls, (-15.0, 15.0), 0.01).unwrap();
        for j in 0..op.profile.len() {
            let h = hamiltonian(&spec, PhasePoint::new(op.profile.values()[j], op.slope[j]));
            prop_assert!((h - op.level).abs() <= 1e-9);
        }
    }

    #[test]
    fn periodic_and_homoclinic_profiles_are_even_about_the_turning_point(
        p in prop_oneof![0.05f64..0.95, 1.05f64..1.4, Just(std::f64::consts::SQRT_2)],
    ) {
        // under -u + u³ the orbits through (p, 0) with 0 < p < √2 circle the
        // centre u = 1 inside the homoclinic loop; p = √2 is the loop itself
        let spec = focusing();
        let cls = classify_orbit(&spec, PhasePoint::new(p, 0.0));
        let kind_ok = matches!(cls, OrbitClass::Periodic { .. } | OrbitClass::Homoclinic { .. });
        prop_assert!(kind_ok, "{:?}", cls);
        let op = orbit_profile(&spec, &cls, (-8.0, 8.0), 0.01).unwrap();
        let v = op.profile.values();
        let c = op.profile.grid().nearest(0.0).unwrap();
        let half = c.min(v.len() - 1 - c);
        for s in 1..=half {
            prop_assert!((v[c + s] - v[c - s]).abs() <= 1e-8);
        }
    }

    #[test]
    fn time_of_flight_matches_the_period(p in 0.1f64..0.9) {
        let spec = allen_cahn();
        let cls = classify_orbit(&spec, PhasePoint::new(p, 0.0));
        let OrbitClass::Periodic { period, .. } = cls else {
            return Err(TestCaseError::fail("not periodic"));
        };
        prop_assert!((minimal_period(&spec, p).unwrap() - period).abs() <= 1e-12 * period);
        // the profile starts at the maximum q; the next maximum sits one period later
        let dx = 1e-3;
        let op = orbit_profile(&spec, &cls, (-0.1, period + 1.0), dx).unwrap();
        let v = op.profile.values();
        let c = op.profile.grid().nearest(period).unwrap();
        let j = (c - 200..c + 200).max_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap();
        // parabolic vertex through the three nodes around the discrete maximum
        let (l, m, r) = (v[j - 1], v[j], v[j + 1]);
        let x_peak = op.profile.x(j) + 0.5 * dx * (l - r) / (l - 2.0 * m + r);
        let origin = op.profile.x(op.profile.grid().nearest(0.0).unwrap());
        prop_assert!(((x_peak - origin) - period).abs() <= 1e-6 * period);
    }
}

/// Separatrix levels of `u - u³`: the saddle-free case has one, `F(±1) = 1/4`.
#[test]
fn classification_is_exclusive_away_from_separatrices() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for spec in [allen_cahn(), focusing(), allen_cahn().with_kappa(3.0).unwrap()] {
        let seps: Vec<f64> = [-1.0, 0.0, 1.0].iter().map(|&u| spec.antideriv(u)).collect();
        let mut considered = 0;
        let mut unresolved = 0;
        for _ in 0..1000 {
            let pt = PhasePoint::new(rng.gen_range(-1.8..1.8), rng.gen_range(-1.0..1.0));
            let c = hamiltonian(&spec, pt);
            if seps.iter().any(|s| (c - s).abs() <= 1e-6) {
                continue;
            }
            let cls = classify_orbit(&spec, pt);
            if spec.coercion().is_none() {
                // escaping orbits are a legitimate unresolved outcome without coercion
                if let OrbitClass::Unresolved { reason } = &cls {
                    if reason == "unbounded" {
                        continue;
                    }
                }
            }
            considered += 1;
            match cls {
                OrbitClass::Unresolved { .. } => unresolved += 1,
                other => {
                    let (lo, hi) = other.u_extent().unwrap();
                    assert!(lo <= pt.u + 1e-9 && pt.u <= hi + 1e-9, "{other:?} vs {pt:?}");
                }
            }
        }
        assert!(considered > 100);
        assert!((unresolved as f64) < 0.01 * considered as f64, "{unresolved}/{considered}");
    }
}
