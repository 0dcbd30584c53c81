use proptest::prelude::*;
use quasiconv::phase_plane::{classify_orbit, orbit_profile};
use quasiconv::solver::{make_initial, run, InitialFamily, Scheme, SolverConfig};
use quasiconv::{Grid, NonlinearitySpec, PhasePoint, Profile};

fn allen_cahn() -> NonlinearitySpec {
    NonlinearitySpec::cubic_bistable(-1.0, 0.0, 1.0).unwrap()
}

fn wiggly(grid: Grid, amps: &[f64], lo: f64, hi: f64) -> Profile {
    Profile::from_fn(grid, |x| {
        let s: f64 = amps
            .iter()
            .enumerate()
            .map(|(k, a)| a * (0.4 * (k + 1) as f64 * x + k as f64).sin())
            .sum();
        (0.5 * (lo + hi) + 0.5 * (hi - lo) * s.tanh()).clamp(lo, hi)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn comparison_principle(
        amps in prop::collection::vec(-1.5f64..1.5, 1..5),
        lift in 0.0f64..0.5,
        center in -5.0f64..5.0,
        crank in any::<bool>(),
    ) {
        let spec = allen_cahn();
        let grid = Grid::with_spacing(20.0, 0.1).unwrap();
        let u0 = wiggly(grid, &amps, -1.2, 1.2);
        let v0 = Profile::from_fn(grid, |x| {
            let j = grid.nearest(x).unwrap();
            u0.values()[j] + lift * (-(x - center) * (x - center) / 4.0).exp() + 1e-3
        });
        let scheme = if crank { Scheme::CrankNicolsonNewton } else { Scheme::Imex };
        let cfg = SolverConfig::new(0.01, 5.0).every(0.5).with_scheme(scheme);
        let a = run(&spec, &u0, &cfg).unwrap();
        let b = run(&spec, &v0, &cfg).unwrap();
        for (sa, sb) in a.iter().zip(&b) {
            for (x, y) in sa.profile.values().iter().zip(sb.profile.values()) {
                prop_assert!(*x <= *y + 1e-10);
            }
        }
    }

    #[test]
    fn invariant_region(amps in prop::collection::vec(-3.0f64..3.0, 1..5)) {
        // f(-1) = 0 >= 0 and f(1) = 0 <= 0
        let spec = allen_cahn();
        let grid = Grid::with_spacing(20.0, 0.1).unwrap();
        let u0 = wiggly(grid, &amps, -1.0, 1.0);
        let snaps = run(&spec, &u0, &SolverConfig::new(0.01, 5.0).every(0.25)).unwrap();
        for s in &snaps {
            let (lo, hi) = s.profile.min_max();
            prop_assert!(lo >= -1.0 - 1e-8 && hi <= 1.0 + 1e-8);
        }
    }
}

#[test]
fn boundary_values_follow_the_limit_ode_and_the_interior_agrees() {
    let spec = allen_cahn();
    let grid = Grid::with_spacing(40.0, 0.05).unwrap();
    let family = InitialFamily::Front {
        alpha: -0.3,
        beta: 0.6,
        steepness: 1.0,
        center: 0.0,
    };
    let u0 = make_initial(&family, &grid).unwrap();
    let t_end = 40.0 * 40.0 / 16.0;
    // IMEX treats the interior reaction to first order in dt while the pinned
    // values come from RK4, so this truncation check uses the second-order scheme
    let cfg = SolverConfig::new(0.01, t_end)
        .every(1.0)
        .with_scheme(Scheme::CrankNicolsonNewton);
    let snaps = run(&spec, &u0, &cfg).unwrap();
    let left = grid.nearest(-35.0).unwrap();
    let right = grid.nearest(35.0).unwrap();
    for s in &snaps {
        let v = s.profile.values();
        assert_eq!(v[0], s.theta.0);
        assert_eq!(v[v.len() - 1], s.theta.1);
        assert!((v[left] - s.theta.0).abs() <= 1e-4, "t = {}", s.t);
        assert!((v[right] - s.theta.1).abs() <= 1e-4, "t = {}", s.t);
    }
}

#[test]
fn standing_wave_seeded_as_data_barely_moves() {
    let spec = allen_cahn();
    let dx = 1e-3;
    let cls = classify_orbit(&spec, PhasePoint::new(0.0, 0.5f64.sqrt()));
    let op = orbit_profile(&spec, &cls, (-20.0, 20.0), dx).unwrap();
    let cfg = SolverConfig::new(0.01, 10.0).every(1.0);
    let snaps = run(&spec, &op.profile, &cfg).unwrap();
    let drift = snaps
        .iter()
        .map(|s| s.profile.difference(&op.profile).unwrap().sup_norm())
        .fold(0.0f64, f64::max);
    assert!(drift <= 1e-6, "{drift}");
}
