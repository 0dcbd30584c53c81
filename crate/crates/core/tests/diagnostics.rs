use proptest::prelude::*;
use quasiconv::diagnostics::{reflect_diff, zero_history, Companion, ZeroTolerances};
use quasiconv::experiment::{execute, preset};
use quasiconv::solver::{run, SolverConfig};
use quasiconv::{Grid, NonlinearitySpec, Profile};

fn random_profile(grid: Grid, amps: &[f64]) -> Profile {
    Profile::from_fn(grid, |x| {
        amps.iter()
            .enumerate()
            .map(|(k, a)| a * (0.3 * (k + 1) as f64 * x + 0.7 * k as f64).sin())
            .sum::<f64>()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reflection_is_antisymmetric_about_lambda(
        amps in prop::collection::vec(-2.0f64..2.0, 1..6),
        lambda in -7.0f64..7.0,
    ) {
        let grid = Grid::with_spacing(10.0, 0.05).unwrap();
        let p = random_profile(grid, &amps);
        let r = reflect_diff(&p, lambda).unwrap();
        let g = r.profile.grid();
        for j in 0..r.profile.len() {
            let mirror = g.nearest(2.0 * r.lambda - g.x(j)).unwrap();
            prop_assert_eq!(r.profile.values()[mirror], -r.profile.values()[j]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn zero_number_of_a_solution_difference_never_increases(
        a in prop::collection::vec(-1.0f64..1.0, 1..5),
        b in prop::collection::vec(-1.0f64..1.0, 1..5),
    ) {
        let spec = NonlinearitySpec::cubic_bistable(-1.0, 0.0, 1.0).unwrap();
        let grid = Grid::with_spacing(30.0, 0.05).unwrap();
        let envelope = |x: f64| (-x * x / 50.0).exp();
        // keep sup|u0| <= 1 so the explicit step stays inside its dt bound
        let bounded = |amps: &[f64]| {
            let p = random_profile(grid, amps);
            let norm = amps.iter().map(|c| c.abs()).sum::<f64>().max(1.0);
            Profile::from_fn(grid, |x| envelope(x) * p.values()[grid.nearest(x).unwrap()] / norm)
        };
        let u0 = bounded(&a);
        let v0 = bounded(&b);
        let cfg = SolverConfig::new(0.01, 4.0).every(0.1);
        let su = run(&spec, &u0, &cfg).unwrap();
        let sv = run(&spec, &v0, &cfg).unwrap();
        let h = zero_history(&su, Companion::Run(&sv), (-10.0, 10.0), ZeroTolerances::default()).unwrap();
        prop_assert!(h.increases.is_empty(), "{:?}", h.increases);
    }
}

#[test]
fn c2_track_limit_is_a_symmetry_centre() {
    let out = execute(&preset("bump_ground").unwrap()).unwrap();
    let last = out.snapshots.last().unwrap();
    let window = out.diagnostics.case.late_window;
    let track = out
        .diagnostics
        .tracks
        .iter()
        .find(|t| t.spans(window.0, window.1))
        .expect("one persistent track");
    let x1 = track.last().x;
    let p = &last.profile;
    let g = p.grid();
    let scale = p.sup_norm();
    let mut worst: f64 = 0.0;
    for j in g.index_range(-10.0, 10.0).map(|(a, b)| a..=b).unwrap() {
        let mirror = 2.0 * x1 - g.x(j);
        if let Some(v) = p.value_at(mirror) {
            worst = worst.max((v - p.values()[j]).abs());
        }
    }
    assert!(worst <= 5e-3 * scale, "{worst} vs {scale}");
}

#[test]
fn late_zeros_against_the_standing_wave_are_simple() {
    let out = execute(&preset("front_bistable").unwrap()).unwrap();
    let h = out
        .diagnostics
        .zeros
        .iter()
        .find(|h| h.companion.starts_with("orbit"))
        .unwrap();
    let t_end = out.snapshots.last().unwrap().t;
    assert!(h
        .history
        .reports
        .iter()
        .filter(|r| r.t >= 0.8 * t_end)
        .all(|r| !r.has_multiple()));
    assert!(h.history.monotone());
}
