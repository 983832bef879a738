#![allow(dead_code)]

use dpnash_core::game::{AffineMap, GameSpec, Player, QuadraticAggCost};
use dpnash_core::graph::{Digraph, GraphSchedule};
use dpnash_core::schedule::{remark5_step_size, remark5_weakening, Schedule, ScheduleSet};

pub const B2: [f64; 6] = [2.0, 5.0, 8.0, 12.0, 15.0, 18.0];
pub const KAPPA: [f64; 6] = [5.4, 4.86, 4.32, 4.05, 3.69, 4.32];
pub const INTERCEPT: [f64; 6] = [0.6, 0.54, 0.48, 0.45, 0.41, 0.48];
pub const BOUND: [f64; 6] = [20.0, 25.0, 30.0, 35.0, 40.0, 45.0];

pub fn six_player_game() -> GameSpec {
    let players = (0..6)
        .map(|i| {
            let cost =
                QuadraticAggCost::new(0.001, 0.1, 6.0, KAPPA[i], B2[i], INTERCEPT[i]).unwrap();
            Player::quadratic(cost, AffineMap::IDENTITY, -BOUND[i], BOUND[i])
        })
        .collect();
    GameSpec::new(players, None).unwrap()
}

/// Period-4 schedule; no single phase is strongly connected, the union is.
pub fn six_player_topology() -> GraphSchedule {
    let phases: [&[(usize, usize)]; 4] = [
        &[(1, 2), (2, 3), (3, 1), (4, 5)],
        &[(3, 4), (4, 6), (5, 4)],
        &[(6, 5), (5, 1), (2, 6)],
        &[(1, 3), (6, 2), (4, 1)],
    ];
    let graphs = phases
        .iter()
        .map(|es| Digraph::new(6, es.iter().map(|&(j, i)| (j - 1, i - 1))).unwrap())
        .collect();
    GraphSchedule::new(graphs, 4).unwrap()
}

pub fn six_player_schedules() -> ScheduleSet {
    ScheduleSet::uniform(
        6,
        remark5_step_size(0.125),
        remark5_weakening(),
        0.6,
        Schedule::Affine { c: 1.0, d: 2.0 },
    )
    .unwrap()
}
