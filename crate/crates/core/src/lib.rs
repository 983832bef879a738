//! Differentially private distributed Nash-equilibrium seeking for
//! aggregative games over time-varying, unbalanced directed graphs.
//!
//! The crate is `no_std` (it needs `alloc`). Every player keeps a push-sum
//! estimate of the aggregate, perturbs what it transmits with Laplace noise,
//! attenuates received information with a decaying weakening factor and
//! updates its action with a projected heavy-ball step.
//!
//! Modules:
//!
//! * [`graph`]: digraphs, periodic schedules, out-degree weight matrices,
//!   connectivity checks and mixing estimates.
//! * [`game`]: aggregative game model, pseudo-gradient, projection and an
//!   independent Nash-equilibrium oracle.
//! * [`schedule`]: step-size, weakening-factor, momentum and noise-scale
//!   schedules, plus the summation oracle used to check their conditions.
//! * [`noise`]: counter-based Laplace noise streams.
//! * [`seeker`]: the per-iteration update and full runs.
//! * [`privacy`]: sensitivity conventions and the cumulative budget ledger.

#![no_std]
#![deny(unsafe_code)]
// `!(x > 0.0)` style checks are meant to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod error;
pub mod game;
pub mod graph;
pub(crate) mod math;
pub mod matrix;
pub mod noise;
pub mod privacy;
pub mod schedule;
pub mod seeker;

pub use error::{Error, Result};
pub use game::{ActionProfile, AffineMap, AggregativeCost, GameSpec, Player, QuadraticAggCost};
pub use graph::{Digraph, GraphSchedule, MixingEstimate, WeightMatrix};
pub use matrix::Matrix;
pub use noise::{NoiseMode, NoiseStream};
pub use privacy::{PrivacyLedger, SensitivityConvention};
pub use schedule::{Schedule, ScheduleSet, SeriesVerdict, SummationReport};
pub use seeker::{RunOptions, RunRecord, SeekerState};
