mod common;

use dpnash_core::game::ActionProfile;
use dpnash_core::graph::{build_weight_matrix, Digraph};
use dpnash_core::noise::{noise_vector, NoiseMode, NoiseStream};
use dpnash_core::seeker::{run, RunOptions};
use proptest::prelude::*;

fn digraph() -> impl Strategy<Value = Digraph> {
    (1usize..9).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n), 0..(n * n + 1))
            .prop_map(move |edges| Digraph::new(n, edges).unwrap())
    })
}

proptest! {
    #[test]
    fn weight_matrix_is_column_stochastic(g in digraph()) {
        let b = build_weight_matrix(&g);
        let n = g.node_count();
        for (j, sum) in b.matrix().column_sums().iter().enumerate() {
            prop_assert!((sum - 1.0).abs() < 1e-12, "column {} sums to {}", j, sum);
            prop_assert!(b.get(j, j) > 0.0);
        }
        for i in 0..n {
            for j in 0..n {
                let linked = i == j || g.edges().any(|e| e == (j, i));
                let v = b.get(i, j);
                prop_assert_eq!(v > 0.0, linked);
                if linked {
                    prop_assert!((v - 1.0 / g.out_degree(j) as f64).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn projection_is_idempotent_and_nonexpansive(
        i in 0usize..6, u in -200.0f64..200.0, v in -200.0f64..200.0,
    ) {
        let spec = common::six_player_game();
        let pu = spec.project(i, u);
        prop_assert_eq!(spec.project(i, pu), pu);
        prop_assert!((pu - spec.project(i, v)).abs() <= (u - v).abs());
        let (lo, hi) = spec.bounds(i);
        prop_assert!(pu >= lo && pu <= hi);
    }

    #[test]
    fn gradient_matches_central_differences(
        raw in prop::collection::vec(-0.95f64..0.95, 6), i in 0usize..6,
    ) {
        let spec = common::six_player_game();
        let q: Vec<f64> = raw.iter().zip(common::BOUND).map(|(r, b)| r * b).collect();
        let sigma = spec.aggregate(&q).unwrap();
        let g = spec.partial_gradient(i, q[i], sigma).unwrap();
        let h = 1e-5;
        let (mut up, mut down) = (q.clone(), q.clone());
        up[i] += h;
        down[i] -= h;
        let fd = (spec.cost(i, &up).unwrap() - spec.cost(i, &down).unwrap()) / (2.0 * h);
        prop_assert!((g - fd).abs() <= 1e-6 * g.abs().max(1.0), "g={} fd={}", g, fd);
    }

    #[test]
    fn noise_is_a_function_of_seed_player_iteration(seed: u64, l in 0usize..10_000) {
        let s = common::six_player_schedules();
        let mut a = NoiseStream::for_players(seed, 6);
        let mut b = NoiseStream::for_players(seed, 6);
        let _ = noise_vector(&mut b, &s, l + 3, NoiseMode::On).unwrap();
        prop_assert_eq!(
            noise_vector(&mut a, &s, l, NoiseMode::On).unwrap(),
            noise_vector(&mut b, &s, l, NoiseMode::On).unwrap()
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn runs_are_reproducible(seed: u64) {
        let spec = common::six_player_game();
        let s = common::six_player_schedules();
        let g = common::six_player_topology();
        let opts = RunOptions::new(ActionProfile::uniform(6, 0.1), seed);
        let a = run(&spec, &s, &g, 40, None, &opts).unwrap();
        let b = run(&spec, &s, &g, 40, None, &opts).unwrap();
        prop_assert_eq!(a, b);
    }
}
