//! Step-size, weakening-factor, momentum and noise-scale schedules.
//!
//! Schedules are closed-form descriptors so a run is reproducible from its
//! configuration alone. The summation oracle decides whether the series
//! appearing in the convergence conditions are finite.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{abs, ln, powf, CompensatedSum};

/// A scalar sequence indexed by the iteration `l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Schedule {
    /// `value`
    Constant { value: f64 },
    /// `scale / (1 + c l^p)`
    RationalPower { scale: f64, c: f64, p: f64 },
    /// `scale / (1 + c r^(a l + d))`
    GatedExponential {
        scale: f64,
        c: f64,
        r: f64,
        a: f64,
        d: f64,
    },
    /// `c l + d`
    Affine { c: f64, d: f64 },
    /// `scale ratio^l`
    Geometric { scale: f64, ratio: f64 },
}

impl Schedule {
    pub fn eval(&self, l: usize) -> f64 {
        let x = l as f64;
        match *self {
            Schedule::Constant { value } => value,
            Schedule::RationalPower { scale, c, p } => scale / (1.0 + c * powf(x, p)),
            Schedule::GatedExponential { scale, c, r, a, d } => {
                scale / (1.0 + c * powf(r, a * x + d))
            }
            Schedule::Affine { c, d } => c * x + d,
            Schedule::Geometric { scale, ratio } => scale * powf(ratio, x),
        }
    }
}

/// Values of every schedule for one player at one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleValues {
    pub mu: f64,
    pub rho: f64,
    pub beta: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleSet {
    mu: Vec<Schedule>,
    rho: Schedule,
    beta: Vec<f64>,
    noise_b: Vec<Schedule>,
}

pub const MOMENTUM_LIMIT: f64 = core::f64::consts::FRAC_1_SQRT_2;

impl ScheduleSet {
    /// Momentum coefficients must lie in `[0, sqrt(2)/2)`; zero disables the
    /// heavy-ball term. Range conditions on the sequences themselves are
    /// checked by [`validate_assumptions`], not here.
    pub fn new(
        mu: Vec<Schedule>,
        rho: Schedule,
        beta: Vec<f64>,
        noise_b: Vec<Schedule>,
    ) -> Result<Self> {
        let n = mu.len();
        if n == 0 {
            return Err(Error::InvalidSchedule("at least one player required"));
        }
        for len in [beta.len(), noise_b.len()] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: len,
                });
            }
        }
        if beta.iter().any(|b| !(*b >= 0.0 && *b < MOMENTUM_LIMIT)) {
            return Err(Error::InvalidSchedule(
                "momentum must lie in [0, sqrt(2)/2)",
            ));
        }
        Ok(Self {
            mu,
            rho,
            beta,
            noise_b,
        })
    }

    /// Same schedules for every player.
    pub fn uniform(
        n: usize,
        mu: Schedule,
        rho: Schedule,
        beta: f64,
        noise_b: Schedule,
    ) -> Result<Self> {
        Self::new(
            alloc::vec![mu; n],
            rho,
            alloc::vec![beta; n],
            alloc::vec![noise_b; n],
        )
    }

    /// `mu(l) = 1/(1 + 1e-4 * 2^(0.01 l + 2))`, `rho(l) = 1/(1 + 0.1 l^2.01)`,
    /// `b(l) = l + 2`, with the given momentum.
    pub fn remark5(n: usize, beta: f64) -> Result<Self> {
        Self::uniform(
            n,
            remark5_step_size(1.0),
            remark5_weakening(),
            beta,
            Schedule::Affine { c: 1.0, d: 2.0 },
        )
    }

    pub fn n(&self) -> usize {
        self.mu.len()
    }

    pub fn mu_schedules(&self) -> &[Schedule] {
        &self.mu
    }

    pub fn rho_schedule(&self) -> &Schedule {
        &self.rho
    }

    pub fn betas(&self) -> &[f64] {
        &self.beta
    }

    pub fn noise_schedules(&self) -> &[Schedule] {
        &self.noise_b
    }

    pub fn mu(&self, i: usize, l: usize) -> f64 {
        self.mu[i].eval(l)
    }

    pub fn rho(&self, l: usize) -> f64 {
        self.rho.eval(l)
    }

    pub fn beta(&self, i: usize) -> f64 {
        self.beta[i]
    }

    pub fn b(&self, i: usize, l: usize) -> f64 {
        self.noise_b[i].eval(l)
    }

    pub fn eval(&self, i: usize, l: usize) -> ScheduleValues {
        ScheduleValues {
            mu: self.mu(i, l),
            rho: self.rho(l),
            beta: self.beta(i),
            b: self.b(i, l),
        }
    }

    /// `min_i b_i(l)`.
    pub fn b_hat(&self, l: usize) -> f64 {
        self.noise_b
            .iter()
            .map(|s| s.eval(l))
            .fold(f64::INFINITY, f64::min)
    }

    /// `max_i b_i(l)`.
    pub fn b_check(&self, l: usize) -> f64 {
        self.noise_b
            .iter()
            .map(|s| s.eval(l))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `max_i mu_i(l)`.
    pub fn mu_bar(&self, l: usize) -> f64 {
        self.mu
            .iter()
            .map(|s| s.eval(l))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `min_i mu_i(l)`.
    pub fn mu_under(&self, l: usize) -> f64 {
        self.mu
            .iter()
            .map(|s| s.eval(l))
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn remark5_step_size(scale: f64) -> Schedule {
    Schedule::GatedExponential {
        scale,
        c: 1e-4,
        r: 2.0,
        a: 0.01,
        d: 2.0,
    }
}

pub fn remark5_weakening() -> Schedule {
    Schedule::RationalPower {
        scale: 1.0,
        c: 0.1,
        p: 2.01,
    }
}

/// What the summation oracle concluded about a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesVerdict {
    /// The tail bound fell below the requested relative tolerance.
    Converged,
    /// The tail is finite by the ratio/power-law test, but the cap was
    /// reached before it fell below tolerance.
    Summable,
    /// The terms stopped decaying, or decay no faster than `1/l`.
    Divergent,
    /// Neither conclusion could be reached before the cap.
    Inconclusive,
}

impl SeriesVerdict {
    /// True when the series is known to have a finite sum.
    pub fn is_finite(self) -> bool {
        matches!(self, SeriesVerdict::Converged | SeriesVerdict::Summable)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummationReport {
    pub series: String,
    /// Sum of the terms actually evaluated.
    pub partial_sum: f64,
    /// Estimated bound on the remaining tail; infinite when none exists.
    pub tail_bound: f64,
    /// `partial_sum + tail_bound` when the tail is finite.
    pub estimate: f64,
    pub converged: bool,
    pub verdict: SeriesVerdict,
    pub terms_used: usize,
}

impl SummationReport {
    pub fn named(mut self, series: impl Into<String>) -> Self {
        self.series = series.into();
        self
    }
}

/// Terms per ratio-test window.
pub const SUMMATION_WINDOW: usize = 64;
/// Power-law exponents within this margin of 1 are not trusted either way.
const EXPONENT_MARGIN: f64 = 1e-3;

/// Sums `term(0) + term(1) + ...` adaptively.
///
/// Every [`SUMMATION_WINDOW`] terms, if the last window is non-increasing, the
/// tail is bounded by the larger of a geometric bound from the worst term
/// ratio and a power-law bound `t_L x_L / (p - 1)` from the local log-log
/// slope `p`. Summation stops once that bound is below
/// `tol * max(1, |sum|)`.
pub fn summation_oracle(term: impl Fn(usize) -> f64, tol: f64, cap: usize) -> SummationReport {
    let mut sum = CompensatedSum::default();
    let mut window: Vec<f64> = Vec::with_capacity(SUMMATION_WINDOW + 1);
    let mut last = Assessment::default();
    let mut used = 0;

    for l in 0..cap {
        let t = term(l);
        used = l + 1;
        if !t.is_finite() {
            return report(sum.value(), f64::INFINITY, SeriesVerdict::Divergent, used);
        }
        sum.add(t);
        if window.len() == SUMMATION_WINDOW + 1 {
            window.remove(0);
        }
        window.push(t);

        if used % SUMMATION_WINDOW == 0 && used >= 2 * SUMMATION_WINDOW {
            last = assess(&window, used);
            let s = sum.value();
            if last.tail.is_finite() && last.tail < tol * (s + last.tail).abs().max(1.0) {
                return report(s, last.tail, SeriesVerdict::Converged, used);
            }
        }
    }

    let verdict = if last.tail.is_finite() {
        SeriesVerdict::Summable
    } else if !last.decreasing || last.exponent <= 1.0 {
        SeriesVerdict::Divergent
    } else {
        SeriesVerdict::Inconclusive
    };
    report(sum.value(), last.tail, verdict, used)
}

fn report(partial: f64, tail: f64, verdict: SeriesVerdict, used: usize) -> SummationReport {
    SummationReport {
        series: String::new(),
        partial_sum: partial,
        tail_bound: tail,
        estimate: if tail.is_finite() {
            partial + tail
        } else {
            partial
        },
        converged: verdict == SeriesVerdict::Converged,
        verdict,
        terms_used: used,
    }
}

#[derive(Debug, Clone, Copy)]
struct Assessment {
    tail: f64,
    decreasing: bool,
    exponent: f64,
}

impl Default for Assessment {
    fn default() -> Self {
        Self {
            tail: f64::INFINITY,
            decreasing: false,
            exponent: 0.0,
        }
    }
}

/// `window` holds the last `SUMMATION_WINDOW + 1` terms, ending at index
/// `used - 1`.
fn assess(window: &[f64], used: usize) -> Assessment {
    let decreasing = window.windows(2).all(|w| w[1] <= w[0]);
    let t_last = *window.last().unwrap_or(&0.0);
    let t_first = window[0];
    if !decreasing {
        return Assessment {
            tail: f64::INFINITY,
            decreasing,
            exponent: 0.0,
        };
    }
    if t_last == 0.0 {
        return Assessment {
            tail: 0.0,
            decreasing,
            exponent: f64::INFINITY,
        };
    }
    let ratio = window.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
    let geometric = if ratio < 1.0 {
        t_last * ratio / (1.0 - ratio)
    } else {
        f64::INFINITY
    };

    // positions are 1-based so the first term sits at x = 1
    let x_last = used as f64;
    let x_first = (used - SUMMATION_WINDOW) as f64;
    let exponent = ln(t_first / t_last) / ln(x_last / x_first);
    let power = if exponent > 1.0 + EXPONENT_MARGIN {
        t_last * x_last / (exponent - 1.0)
    } else {
        f64::INFINITY
    };
    Assessment {
        tail: geometric.max(power),
        decreasing,
        exponent,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Informational checks do not affect [`AssumptionReport::passed`].
    pub required: bool,
    pub summation: Option<SummationReport>,
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub horizon: usize,
    pub checks: Vec<AssumptionCheck>,
    /// Set when the step-size sum is finite, which the convergence argument
    /// elsewhere treats as divergent.
    pub step_sum_contradiction: Option<String>,
}

impl AssumptionReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().filter(|c| c.required).all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&AssumptionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AssumptionCheck> {
        self.checks.iter().filter(|c| c.required && !c.passed)
    }
}

pub const CHECK_STEP_RANGE: &str = "step-size in (0,1) and non-increasing";
pub const CHECK_STEP_SUM: &str = "step-size sum finite";
pub const CHECK_STEP_SQUARE_SUM: &str = "step-size square sum finite";
pub const CHECK_STEP_SPREAD_SUM: &str = "step-size spread sum finite";
pub const CHECK_STEP_RATIO_SUM: &str = "step/weakening ratio square sum finite";
pub const CHECK_WEAKENING_RANGE: &str = "weakening factor in (0,1) and non-increasing";
pub const CHECK_WEAKENING_SUM: &str = "weakening factor sum finite";
pub const CHECK_WEAKENING_NOISE_SUM: &str = "weakening x max noise scale sum finite";
pub const CHECK_MOMENTUM: &str = "momentum in (0, sqrt(2)/2)";
pub const CHECK_NOISE_POSITIVE: &str = "noise scales positive";

/// Checks the step-size and weakening-factor conditions numerically.
///
/// Range conditions are checked for `l = 1..=horizon` (iteration 0 only
/// enters the monotonicity comparison, so `rho(0) = 1` is allowed); series are summed
/// with a cap of `max(16 * horizon, 2^20)` terms.
pub fn validate_assumptions(s: &ScheduleSet, horizon: usize, tol: f64) -> AssumptionReport {
    let cap = (16 * horizon).max(1 << 20);
    let n = s.n();
    let mut checks = Vec::new();

    let step_ok = (0..n).all(|i| {
        (0..=horizon).all(|l| {
            let m = s.mu(i, l);
            (l == 0 || m > 0.0 && m < 1.0) && (l == 0 || m <= s.mu(i, l - 1))
        })
    });
    checks.push(pointwise(CHECK_STEP_RANGE, step_ok));

    let per_player = |f: &dyn Fn(usize, usize) -> f64| -> SummationReport {
        let mut worst: Option<SummationReport> = None;
        for i in 0..n {
            if s.mu[..i].contains(&s.mu[i]) {
                continue;
            }
            let r = summation_oracle(|l| f(i, l), tol, cap);
            let replace = match &worst {
                None => true,
                Some(w) => w.verdict.is_finite() && !r.verdict.is_finite(),
            };
            if replace {
                worst = Some(r);
            }
        }
        worst.expect("at least one player")
    };

    let step_sum = per_player(&|i, l| s.mu(i, l)).named("sum mu_i(l)");
    let step_sum_contradiction = step_sum.verdict.is_finite().then(|| {
        String::from(
            "step-size sum is finite, while the almost-sure convergence argument \
             assumes it diverges; runs are not gated on this",
        )
    });
    checks.push(series(CHECK_STEP_SUM, step_sum, false));

    let sq = per_player(&|i, l| {
        let m = s.mu(i, l);
        m * m
    })
    .named("sum mu_i(l)^2");
    checks.push(series(CHECK_STEP_SQUARE_SUM, sq, true));

    let spread = summation_oracle(|l| s.mu_bar(l) - s.mu_under(l), tol, cap)
        .named("sum (mu_bar(l) - mu_under(l))");
    checks.push(series(CHECK_STEP_SPREAD_SUM, spread, true));

    let ratio = per_player(&|i, l| {
        let r = s.mu(i, l) / s.rho(l);
        r * r
    })
    .named("sum (mu_i(l)/rho(l))^2");
    checks.push(series(CHECK_STEP_RATIO_SUM, ratio, true));

    let rho_ok = (0..=horizon).all(|l| {
        let r = s.rho(l);
        (l == 0 || r > 0.0 && r < 1.0) && (l == 0 || r <= s.rho(l - 1))
    });
    checks.push(pointwise(CHECK_WEAKENING_RANGE, rho_ok));

    let rho_sum = summation_oracle(|l| s.rho(l), tol, cap).named("sum rho(l)");
    checks.push(series(CHECK_WEAKENING_SUM, rho_sum, true));

    let rho_b =
        summation_oracle(|l| s.rho(l) * s.b_check(l), tol, cap).named("sum rho(l) b_check(l)");
    checks.push(series(CHECK_WEAKENING_NOISE_SUM, rho_b, true));

    let beta_ok = s.beta.iter().all(|b| *b > 0.0 && *b < MOMENTUM_LIMIT);
    checks.push(pointwise(CHECK_MOMENTUM, beta_ok));

    let noise_ok = (0..n).all(|i| (0..=horizon).all(|l| s.b(i, l) > 0.0));
    checks.push(pointwise(CHECK_NOISE_POSITIVE, noise_ok));

    AssumptionReport {
        horizon,
        checks,
        step_sum_contradiction,
    }
}

fn pointwise(name: &'static str, passed: bool) -> AssumptionCheck {
    AssumptionCheck {
        name,
        passed,
        required: true,
        summation: None,
        detail: None,
    }
}

fn series(name: &'static str, report: SummationReport, required: bool) -> AssumptionCheck {
    AssumptionCheck {
        name,
        passed: report.verdict.is_finite(),
        required,
        summation: Some(report),
        detail: None,
    }
}

/// Relative difference helper for reports.
pub fn relative_gap(value: f64, reference: f64) -> f64 {
    abs(value - reference) / abs(reference).max(f64::MIN_POSITIVE)
}
