//! The seeking engine.
//!
//! One synchronous round at iteration `l`, for every player `i`:
//!
//! ```text
//! s_j       = sigma_hat_j + eps_j
//! w_hat+    = B(l) w_hat
//! z+        = B(l) s
//! q+_i      = P_{U_i}[q_i - mu_i(l) g_i(q_i, y_i) + beta_i (q_i - q_prev_i)]
//! sigma+_i  = rho(l) z+_i + phi_i(q+_i) - phi_i(q_i)
//! y+_i      = rho(l) z+_i / w_hat+_i
//! ```
//!
//! The action update consumes the tracker `y_i(l)` from the previous round;
//! the estimate update then needs the fresh action.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::game::{ActionProfile, GameSpec};
use crate::graph::{check_d_strong_connectivity, GraphSchedule, WeightMatrix};
use crate::math::abs;
use crate::noise::{noise_vector, NoiseMode, NoiseStream};
use crate::privacy::{
    empirical_sensitivity, theoretical_sensitivity, LedgerEntry, PrivacyLedger,
    SensitivityConvention,
};
use crate::schedule::ScheduleSet;

/// Push-sum weights below this are treated as underflow.
pub const WEIGHT_GUARD: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub struct SeekerState {
    pub l: usize,
    pub q: Vec<f64>,
    pub q_prev: Vec<f64>,
    pub w_hat: Vec<f64>,
    pub sigma_hat: Vec<f64>,
    pub z: Vec<f64>,
    pub y: Vec<f64>,
}

impl SeekerState {
    pub fn weight_sum(&self) -> f64 {
        self.w_hat.iter().sum()
    }
}

pub fn init_state(spec: &GameSpec, q0: &ActionProfile) -> Result<SeekerState> {
    let n = spec.n();
    if q0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: q0.len(),
        });
    }
    for (i, &v) in q0.as_slice().iter().enumerate() {
        let (lo, hi) = spec.bounds(i);
        if !(v >= lo && v <= hi) {
            return Err(Error::OutOfBounds {
                player: i,
                value: v,
                lo,
                hi,
            });
        }
    }
    let q = q0.0.clone();
    let sigma_hat: Vec<f64> = q.iter().enumerate().map(|(i, &v)| spec.phi(i, v)).collect();
    Ok(SeekerState {
        l: 0,
        q_prev: q.clone(),
        q,
        w_hat: alloc::vec![1.0; n],
        z: sigma_hat.clone(),
        y: sigma_hat.clone(),
        sigma_hat,
    })
}

/// Advances the state by one synchronous round.
pub fn step(
    state: &SeekerState,
    spec: &GameSpec,
    s: &ScheduleSet,
    b: &WeightMatrix,
    noise: &[f64],
) -> Result<SeekerState> {
    let n = spec.n();
    for len in [b.dim(), noise.len(), s.n(), state.q.len()] {
        if len != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: len,
            });
        }
    }
    let l = state.l;
    let rho = s.rho(l);

    let transmitted: Vec<f64> = state
        .sigma_hat
        .iter()
        .zip(noise)
        .map(|(est, eps)| est + eps)
        .collect();
    let w_hat = b.apply(&state.w_hat);
    let z = b.apply(&transmitted);
    if let Some(player) = w_hat.iter().position(|w| !(*w >= WEIGHT_GUARD)) {
        return Err(Error::WeightUnderflow {
            player,
            iteration: l,
        });
    }

    let mut q = Vec::with_capacity(n);
    for i in 0..n {
        let g = spec.partial_gradient(i, state.q[i], state.y[i])?;
        let momentum = s.beta(i) * (state.q[i] - state.q_prev[i]);
        q.push(spec.project(i, state.q[i] - s.mu(i, l) * g + momentum));
    }

    let sigma_hat = (0..n)
        .map(|i| rho * z[i] + spec.phi(i, q[i]) - spec.phi(i, state.q[i]))
        .collect();
    let y = (0..n).map(|i| rho * z[i] / w_hat[i]).collect();

    Ok(SeekerState {
        l: l + 1,
        q_prev: state.q.clone(),
        q,
        w_hat,
        sigma_hat,
        z,
        y,
    })
}

/// Inputs and outputs of one round, kept for the compact-form check.
#[derive(Debug, Clone, PartialEq)]
pub struct StepTrace {
    pub l: usize,
    pub rho: f64,
    pub noise: Vec<f64>,
    pub sigma_hat: Vec<f64>,
    pub w_hat: Vec<f64>,
    pub phi: Vec<f64>,
    pub z_next: Vec<f64>,
    pub w_hat_next: Vec<f64>,
    pub sigma_hat_next: Vec<f64>,
    pub phi_next: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub l: usize,
    pub q: Vec<f64>,
    pub y: Vec<f64>,
    /// `||q(l) - q*||_2` when a reference equilibrium was supplied.
    pub error: Option<f64>,
    pub weight_sum: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub n: usize,
    pub seed: u64,
    pub noise_mode: NoiseMode,
    /// Convention used for reported budgets; both ledgers are always kept.
    pub convention: SensitivityConvention,
    pub snapshots: Vec<Snapshot>,
    pub empirical: PrivacyLedger,
    pub theoretical: PrivacyLedger,
    pub trace: Option<Vec<StepTrace>>,
}

impl RunRecord {
    pub fn snapshot(&self, l: usize) -> Option<&Snapshot> {
        self.snapshots.get(l).filter(|s| s.l == l)
    }

    pub fn horizon(&self) -> usize {
        self.snapshots.len().saturating_sub(1)
    }

    pub fn ledger(&self) -> &PrivacyLedger {
        match self.convention {
            SensitivityConvention::Empirical => &self.empirical,
            SensitivityConvention::Theoretical => &self.theoretical,
        }
    }

    /// Reported ledger entry for iteration `l` (none at `l = 0`).
    pub fn budget_at(&self, l: usize) -> Option<&LedgerEntry> {
        self.ledger().entries().get(l.checked_sub(1)?)
    }

    pub fn errors(&self) -> impl Iterator<Item = Option<f64>> + '_ {
        self.snapshots.iter().map(|s| s.error)
    }

    pub fn final_error(&self) -> Option<f64> {
        self.snapshots.last().and_then(|s| s.error)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub q0: ActionProfile,
    pub seed: u64,
    pub noise_mode: NoiseMode,
    pub convention: SensitivityConvention,
    /// Constant in the theoretical sensitivity bound.
    pub m3: f64,
    pub retain_trace: bool,
    /// Refuse schedules that are not D-strongly connected.
    pub check_connectivity: bool,
}

impl RunOptions {
    pub fn new(q0: ActionProfile, seed: u64) -> Self {
        Self {
            q0,
            seed,
            noise_mode: NoiseMode::On,
            convention: SensitivityConvention::Empirical,
            m3: 1.0,
            retain_trace: false,
            check_connectivity: true,
        }
    }

    pub fn noise_mode(mut self, mode: NoiseMode) -> Self {
        self.noise_mode = mode;
        self
    }

    pub fn convention(mut self, convention: SensitivityConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn m3(mut self, m3: f64) -> Self {
        self.m3 = m3;
        self
    }

    pub fn retain_trace(mut self, yes: bool) -> Self {
        self.retain_trace = yes;
        self
    }

    pub fn check_connectivity(mut self, yes: bool) -> Self {
        self.check_connectivity = yes;
        self
    }
}

/// A run that stopped early; `partial` holds everything recorded so far.
#[derive(Debug, Clone, PartialEq)]
pub struct RunFailure {
    pub error: Error,
    pub partial: Option<Box<RunRecord>>,
}

impl From<Error> for RunFailure {
    fn from(error: Error) -> Self {
        Self {
            error,
            partial: None,
        }
    }
}

/// Runs `horizon` rounds on `graphs`, drawing fresh noise each round.
pub fn run(
    spec: &GameSpec,
    s: &ScheduleSet,
    graphs: &GraphSchedule,
    horizon: usize,
    q_star: Option<&[f64]>,
    opts: &RunOptions,
) -> core::result::Result<RunRecord, RunFailure> {
    let n = spec.n();
    if s.n() != n || graphs.node_count() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if s.n() != n {
                s.n()
            } else {
                graphs.node_count()
            },
        }
        .into());
    }
    if let Some(qs) = q_star {
        if qs.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: qs.len(),
            }
            .into());
        }
    }
    if opts.check_connectivity && !check_d_strong_connectivity(graphs) {
        return Err(Error::NotStronglyConnected.into());
    }

    let mut state = init_state(spec, &opts.q0)?;
    let mut streams = NoiseStream::for_players(opts.seed, n);
    let mut record = RunRecord {
        n,
        seed: opts.seed,
        noise_mode: opts.noise_mode,
        convention: opts.convention,
        snapshots: Vec::with_capacity(horizon + 1),
        empirical: PrivacyLedger::new(SensitivityConvention::Empirical),
        theoretical: PrivacyLedger::new(SensitivityConvention::Theoretical),
        trace: opts.retain_trace.then(Vec::new),
    };
    record.snapshots.push(snapshot(&state, q_star));

    for l in 0..horizon {
        let noise = match noise_vector(&mut streams, s, l, opts.noise_mode) {
            Ok(v) => v,
            Err(error) => return Err(abort(error, record)),
        };
        let b = graphs.weight_at(l);
        let next = match step(&state, spec, s, b, &noise) {
            Ok(next) => next,
            Err(error) => return Err(abort(error, record)),
        };

        let t = next.l;
        let b_hat = s.b_hat(t);
        let delta_emp = empirical_sensitivity(spec, &next.q, &state.q);
        let delta_theo = theoretical_sensitivity(spec, s, t, opts.m3);
        let accounted = record
            .empirical
            .accumulate(t, delta_emp, b_hat)
            .map(|_| ())
            .and_then(|_| {
                record
                    .theoretical
                    .accumulate(t, delta_theo, b_hat)
                    .map(|_| ())
            });
        if let Err(error) = accounted {
            return Err(abort(error, record));
        }

        if let Some(trace) = record.trace.as_mut() {
            trace.push(StepTrace {
                l,
                rho: s.rho(l),
                phi: (0..n).map(|i| spec.phi(i, state.q[i])).collect(),
                phi_next: (0..n).map(|i| spec.phi(i, next.q[i])).collect(),
                noise,
                sigma_hat: state.sigma_hat.clone(),
                w_hat: state.w_hat.clone(),
                z_next: next.z.clone(),
                w_hat_next: next.w_hat.clone(),
                sigma_hat_next: next.sigma_hat.clone(),
            });
        }
        record.snapshots.push(snapshot(&next, q_star));
        state = next;
    }
    Ok(record)
}

fn abort(error: Error, record: RunRecord) -> RunFailure {
    RunFailure {
        error,
        partial: Some(Box::new(record)),
    }
}

fn snapshot(state: &SeekerState, q_star: Option<&[f64]>) -> Snapshot {
    Snapshot {
        l: state.l,
        q: state.q.clone(),
        y: state.y.clone(),
        error: q_star.map(|qs| ActionProfile(state.q.clone()).distance(qs)),
        weight_sum: state.weight_sum(),
    }
}

/// Residuals of the compact-form identities recomputed from a trace.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CompactFormReport {
    pub steps: usize,
    /// `max |z(l+1) - B(l)(sigma_hat(l) + eps(l))|`
    pub z_residual: f64,
    /// `max |w_hat(l+1) - B(l) w_hat(l)|`
    pub weight_residual: f64,
    /// `max |sigma_hat(l+1) - rho(l) z(l+1) - phi(l+1) + phi(l)|`
    pub sigma_residual: f64,
    /// `max |1'sigma_hat(l+1) - rho(l) 1'(sigma_hat(l) + eps(l)) - 1'(phi(l+1) - phi(l))|`
    pub conservation_residual: f64,
    /// `max |sum_i w_hat_i(l) - n|`
    pub weight_sum_residual: f64,
}

impl CompactFormReport {
    pub fn max_residual(&self) -> f64 {
        self.z_residual
            .max(self.weight_residual)
            .max(self.sigma_residual)
            .max(self.conservation_residual)
            .max(self.weight_sum_residual)
    }
}

/// Recomputes the vector form of the update from logged inputs. Mixing is
/// done push-style straight from the digraph (each node splits its value
/// evenly over itself and its out-neighbors), independent of the weight
/// matrices used by [`step`].
pub fn compact_form_check(trace: &[StepTrace], graphs: &GraphSchedule) -> CompactFormReport {
    let mut rep = CompactFormReport {
        steps: trace.len(),
        ..Default::default()
    };
    let max_diff =
        |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| abs(x - y)).fold(0.0, f64::max);
    for t in trace {
        let g = graphs.graph_at(t.l);
        let n = t.sigma_hat.len();
        let sent: Vec<f64> = t
            .sigma_hat
            .iter()
            .zip(&t.noise)
            .map(|(a, b)| a + b)
            .collect();
        let z = push_mix(g, &sent);
        let w = push_mix(g, &t.w_hat);
        rep.z_residual = rep.z_residual.max(max_diff(&z, &t.z_next));
        rep.weight_residual = rep.weight_residual.max(max_diff(&w, &t.w_hat_next));

        let sigma: Vec<f64> = (0..n)
            .map(|i| t.rho * t.z_next[i] + t.phi_next[i] - t.phi[i])
            .collect();
        rep.sigma_residual = rep.sigma_residual.max(max_diff(&sigma, &t.sigma_hat_next));

        let lhs: f64 = t.sigma_hat_next.iter().sum();
        let rhs = t.rho * sent.iter().sum::<f64>() + t.phi_next.iter().sum::<f64>()
            - t.phi.iter().sum::<f64>();
        rep.conservation_residual = rep.conservation_residual.max(abs(lhs - rhs));

        for w in [&t.w_hat, &t.w_hat_next] {
            let total: f64 = w.iter().sum();
            rep.weight_sum_residual = rep.weight_sum_residual.max(abs(total - n as f64));
        }
    }
    rep
}

fn push_mix(g: &crate::graph::Digraph, v: &[f64]) -> Vec<f64> {
    let mut out = alloc::vec![0.0; v.len()];
    for (j, &x) in v.iter().enumerate() {
        let share = x / g.out_degree(j) as f64;
        out[j] += share;
        for (from, to) in g.edges() {
            if from == j {
                out[to] += share;
            }
        }
    }
    out
}
