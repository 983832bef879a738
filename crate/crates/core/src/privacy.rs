//! Sensitivity bounds and the cumulative privacy budget.
//!
//! The budget spent at iteration `l` is `delta(l) / b_hat(l)`, where
//! `b_hat(l)` is the smallest noise scale used by any player; the
//! cumulative budget over `1..=T` is the sum of these increments.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::game::GameSpec;
use crate::math::abs;
use crate::schedule::{summation_oracle, ScheduleSet, SummationReport};
use crate::seeker::RunRecord;

/// How `delta(l)` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SensitivityConvention {
    /// `L2_max * M3 * rho(l)`: an a-priori bound.
    Theoretical,
    /// `2 * L2_max * max_i |q_i(l) - q_i(l-1)|`, read off the trajectory.
    #[default]
    Empirical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerEntry {
    pub l: usize,
    pub delta: f64,
    pub b_hat: f64,
    pub budget: f64,
    pub epsilon: f64,
}

/// Append-only record of per-iteration budgets.
#[derive(Debug, Clone, PartialEq)]
pub struct PrivacyLedger {
    convention: SensitivityConvention,
    entries: Vec<LedgerEntry>,
}

impl PrivacyLedger {
    pub fn new(convention: SensitivityConvention) -> Self {
        Self {
            convention,
            entries: Vec::new(),
        }
    }

    pub fn convention(&self) -> SensitivityConvention {
        self.convention
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn entry(&self, l: usize) -> Option<&LedgerEntry> {
        self.entries.iter().find(|e| e.l == l)
    }

    /// Cumulative budget so far.
    pub fn epsilon(&self) -> f64 {
        self.entries.last().map_or(0.0, |e| e.epsilon)
    }

    /// Cumulative budget over iterations `<= t`.
    pub fn epsilon_at(&self, t: usize) -> f64 {
        self.entries
            .iter()
            .take_while(|e| e.l <= t)
            .last()
            .map_or(0.0, |e| e.epsilon)
    }

    pub fn accumulate(&mut self, l: usize, delta: f64, b_hat: f64) -> Result<&LedgerEntry> {
        if !(b_hat > 0.0) {
            return Err(Error::InvalidScale(b_hat));
        }
        let budget = delta / b_hat;
        let epsilon = self.epsilon() + budget;
        self.entries.push(LedgerEntry {
            l,
            delta,
            b_hat,
            budget,
            epsilon,
        });
        Ok(self.entries.last().expect("just pushed"))
    }
}

pub fn theoretical_sensitivity(spec: &GameSpec, s: &ScheduleSet, l: usize, m3: f64) -> f64 {
    spec.max_lipschitz_phi() * m3 * s.rho(l)
}

pub fn empirical_sensitivity(spec: &GameSpec, q_now: &[f64], q_prev: &[f64]) -> f64 {
    let max_step = q_now
        .iter()
        .zip(q_prev)
        .map(|(a, b)| abs(a - b))
        .fold(0.0, f64::max);
    2.0 * spec.max_lipschitz_phi() * max_step
}

/// `delta(l)` for a recorded run.
pub fn sensitivity(
    l: usize,
    run: &RunRecord,
    spec: &GameSpec,
    s: &ScheduleSet,
    convention: SensitivityConvention,
    m3: f64,
) -> Result<f64> {
    if l == 0 {
        return Err(Error::UndefinedSensitivity);
    }
    let now = run.snapshot(l).ok_or(Error::MissingIteration(l))?;
    let prev = run.snapshot(l - 1).ok_or(Error::MissingIteration(l - 1))?;
    Ok(match convention {
        SensitivityConvention::Theoretical => theoretical_sensitivity(spec, s, l, m3),
        SensitivityConvention::Empirical => empirical_sensitivity(spec, &now.q, &prev.q),
    })
}

/// Sums `rho(l) / b_hat(l)`; a finite sum certifies a finite cumulative
/// budget under the theoretical convention.
pub fn check_budget_summable(s: &ScheduleSet, tol: f64, cap: usize) -> SummationReport {
    summation_oracle(
        |l| {
            let b = s.b_hat(l);
            if b > 0.0 {
                s.rho(l) / b
            } else {
                f64::INFINITY
            }
        },
        tol,
        cap,
    )
    .named("sum rho(l)/b_hat(l)")
}
