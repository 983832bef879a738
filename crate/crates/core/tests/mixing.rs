mod common;

use dpnash_core::game::ActionProfile;
use dpnash_core::graph::{
    backward_product, check_d_strong_connectivity, estimate_mixing, is_strongly_connected, Digraph,
};
use dpnash_core::matrix::Matrix;
use dpnash_core::noise::NoiseMode;
use dpnash_core::schedule::{Schedule, ScheduleSet};
use dpnash_core::seeker::{compact_form_check, run, RunOptions};

#[test]
fn topology_needs_the_whole_period() {
    let s = common::six_player_topology();
    assert!(s.graphs().iter().all(|g| !is_strongly_connected(g)));
    assert!(is_strongly_connected(&Digraph::union(s.graphs()).unwrap()));
    assert!(check_d_strong_connectivity(&s));
}

#[test]
fn backward_product_matches_naive_chain() {
    let s = common::six_player_topology();
    let mut naive = Matrix::identity(6);
    for k in 3..=10 {
        naive = s.weight_at(k).matrix().mul(&naive);
    }
    let p = backward_product(&s, 10, 3).unwrap();
    assert!(p.max_abs_diff(&naive) < 1e-15);
    for c in p.column_sums() {
        assert!((c - 1.0).abs() < 1e-12);
    }
}

#[test]
fn mixing_on_six_player_schedule() {
    let s = common::six_player_topology();
    let est = estimate_mixing(&s, 400).unwrap();
    assert!(
        est.lambda_fit > 0.0 && est.lambda_fit < 1.0,
        "{}",
        est.lambda_fit
    );
    assert!(est.r_squared > 0.95, "{}", est.r_squared);
    assert!(est.delta_bar > 0.0);
    for psi in &est.psi {
        assert!(psi.iter().all(|&x| x >= 0.0));
        assert!((psi.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
    for (l, d) in est.fit_points() {
        assert!(d <= est.bound(l) * (1.0 + 1e-9));
    }
}

#[test]
fn frozen_actions_reach_consensus() {
    let spec = common::six_player_game();
    let g = common::six_player_topology();
    let s = ScheduleSet::uniform(
        6,
        Schedule::Constant { value: 0.0 },
        Schedule::Constant { value: 1.0 },
        0.0,
        Schedule::Constant { value: 1.0 },
    )
    .unwrap();
    let q0: Vec<f64> = (0..6).map(|i| i as f64 - 2.5).collect();
    let sigma = spec.aggregate(&q0).unwrap();
    let opts = RunOptions::new(ActionProfile(q0.clone()), 0).noise_mode(NoiseMode::ZeroNoise);
    let rec = run(&spec, &s, &g, 200, None, &opts).unwrap();
    let dev = rec.snapshots[200]
        .y
        .iter()
        .map(|y| (y - sigma).abs())
        .fold(0.0, f64::max);
    assert!(dev < 1e-8, "{dev}");
    assert!(rec.snapshots.iter().all(|s| s.q == q0));
}

#[test]
fn compact_form_holds_on_noisy_run() {
    let spec = common::six_player_game();
    let g = common::six_player_topology();
    let s = common::six_player_schedules();
    let opts = RunOptions::new(ActionProfile::uniform(6, 0.1), 3).retain_trace(true);
    let rec = run(&spec, &s, &g, 150, None, &opts).unwrap();
    let rep = compact_form_check(rec.trace.as_deref().unwrap(), &g);
    assert_eq!(rep.steps, 150);
    assert!(rep.max_residual() < 1e-9, "{rep:?}");
}
