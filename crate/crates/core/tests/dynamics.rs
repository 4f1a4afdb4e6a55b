use proptest::prelude::*;
use wallsim::dynamics::{run_from, simulate, step_with_draws, BottomRule, Geometric, NoiseDraws};
use wallsim::montecarlo::{empirical_level_density, trajectory_rng, EnsembleSpec};
use wallsim::{densely_packed, interlaces, InterlacedState, ModelParams};

fn r_row(q: f64, y: u64) -> f64 {
    let base = (1.0 - q) / (1.0 + q) * 2.0 * q.powi(y as i32);
    if y == 0 {
        base / 2.0
    } else {
        base
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn interlacing_is_preserved(seed in any::<u64>(), levels in 1usize..6, steps in 1usize..12) {
        let params = ModelParams::from_ratio(2, 5).unwrap();
        let mut rng = trajectory_rng(seed, 0);
        let traj = simulate(&params, levels, steps, &mut rng).unwrap();
        prop_assert_eq!(traj.len(), steps + 1);
        for s in &traj {
            for k in 2..=levels {
                prop_assert!(interlaces(s.level(k - 1), s.level(k)).unwrap());
            }
        }
    }

    #[test]
    fn zero_noise_is_identity_from_packed(levels in 1usize..6) {
        let start = densely_packed(levels).unwrap();
        let (_, full) = step_with_draws(&start, &NoiseDraws::zeros(levels), BottomRule::Reflected).unwrap();
        prop_assert_eq!(full.levels(), start.levels());
    }
}

#[test]
fn seeded_runs_repeat() {
    let geo = Geometric::new(0.45).unwrap();
    let start = densely_packed(4).unwrap();
    let a = run_from(
        &start,
        &geo,
        20,
        BottomRule::Reflected,
        &mut trajectory_rng(7, 3),
    )
    .unwrap();
    let b = run_from(
        &start,
        &geo,
        20,
        BottomRule::Reflected,
        &mut trajectory_rng(7, 3),
    )
    .unwrap();
    let c = run_from(
        &start,
        &geo,
        20,
        BottomRule::Reflected,
        &mut trajectory_rng(7, 4),
    )
    .unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn single_level_one_step_density() {
    let params = ModelParams::from_ratio(1, 2).unwrap();
    let spec = EnsembleSpec::new(&params, 1, 1, 200_000, 11).unwrap();
    let sites: Vec<u64> = (0..6).collect();
    let obs = empirical_level_density(&spec, 1, &sites).unwrap();
    for (y, o) in sites.iter().zip(&obs) {
        let z = o.z_score(r_row(0.5, *y));
        assert!(
            z < 5.0,
            "site {y}: {} vs {} (z={z})",
            o.value,
            r_row(0.5, *y)
        );
    }
}

#[test]
fn frozen_model_stays_packed() {
    let params = ModelParams::from_ratio(0, 1).unwrap();
    let mut rng = trajectory_rng(1, 0);
    let traj = simulate(&params, 4, 5, &mut rng).unwrap();
    let packed: InterlacedState = densely_packed(4).unwrap();
    assert!(traj.iter().all(|s| s.levels() == packed.levels()));
}
