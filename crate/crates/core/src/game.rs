//! Aggregative game model.
//!
//! Player `i` minimizes `J_i(q_i, sigma(q))` over an interval, where
//! `sigma(q) = (1/N) sum_j phi_j(q_j)`. The pseudo-gradient differentiates
//! `J_i` through both its own argument and the aggregate channel.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Debug;

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::math::{abs, unit_open};
use crate::matrix::{solve, Matrix};

/// Smallest Lipschitz constant reported for maps that are constant in the
/// relevant argument; any positive bound is valid there.
const MIN_LIPSCHITZ: f64 = 1e-12;

/// A differentiable cost `J_i(q_i, sigma)`.
pub trait AggregativeCost: Debug + Send + Sync {
    fn value(&self, q: f64, sigma: f64) -> f64;

    /// Partial derivative in the player's own action at fixed aggregate.
    fn grad_action(&self, q: f64, sigma: f64) -> f64;

    /// Partial derivative in the aggregate.
    fn grad_aggregate(&self, q: f64, sigma: f64) -> f64;

    /// Lipschitz constant of the pseudo-gradient in the aggregate argument.
    fn aggregate_lipschitz(&self) -> f64;

    fn as_quadratic(&self) -> Option<&QuadraticAggCost> {
        None
    }
}

/// A differentiable local contribution `phi_i` to the aggregate.
pub trait LocalMap: Debug + Send + Sync {
    fn eval(&self, q: f64) -> f64;
    fn derivative(&self, q: f64) -> f64;
    fn lipschitz(&self) -> f64;

    fn as_affine(&self) -> Option<&AffineMap> {
        None
    }
}

/// `J(q, sigma) = q (a sigma + b1) + P0 (kappa (1 - q/b2)^2 + I)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticAggCost {
    pub a: f64,
    pub b1: f64,
    pub p0: f64,
    pub kappa: f64,
    pub b2: f64,
    pub intercept: f64,
}

impl QuadraticAggCost {
    pub fn new(a: f64, b1: f64, p0: f64, kappa: f64, b2: f64, intercept: f64) -> Result<Self> {
        if b2 == 0.0 || !b2.is_finite() {
            return Err(Error::InvalidGame("b2 must be finite and non-zero"));
        }
        if p0 * kappa <= 0.0 {
            return Err(Error::InvalidGame("P0 * kappa must be positive"));
        }
        Ok(Self {
            a,
            b1,
            p0,
            kappa,
            b2,
            intercept,
        })
    }

    /// Second derivative of the separable part, `2 P0 kappa / b2^2`.
    pub fn curvature(&self) -> f64 {
        2.0 * self.p0 * self.kappa / (self.b2 * self.b2)
    }
}

impl AggregativeCost for QuadraticAggCost {
    fn value(&self, q: f64, sigma: f64) -> f64 {
        let t = 1.0 - q / self.b2;
        q * (self.a * sigma + self.b1) + self.p0 * (self.kappa * t * t + self.intercept)
    }

    fn grad_action(&self, q: f64, sigma: f64) -> f64 {
        self.a * sigma + self.b1 - 2.0 * self.p0 * self.kappa / self.b2 * (1.0 - q / self.b2)
    }

    fn grad_aggregate(&self, q: f64, _sigma: f64) -> f64 {
        self.a * q
    }

    fn aggregate_lipschitz(&self) -> f64 {
        abs(self.a).max(MIN_LIPSCHITZ)
    }

    fn as_quadratic(&self) -> Option<&QuadraticAggCost> {
        Some(self)
    }
}

/// `phi(q) = c q + d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub c: f64,
    pub d: f64,
}

impl AffineMap {
    pub const IDENTITY: AffineMap = AffineMap { c: 1.0, d: 0.0 };

    pub fn new(c: f64, d: f64) -> Self {
        Self { c, d }
    }
}

impl LocalMap for AffineMap {
    fn eval(&self, q: f64) -> f64 {
        self.c * q + self.d
    }

    fn derivative(&self, _q: f64) -> f64 {
        self.c
    }

    fn lipschitz(&self) -> f64 {
        abs(self.c).max(MIN_LIPSCHITZ)
    }

    fn as_affine(&self) -> Option<&AffineMap> {
        Some(self)
    }
}

#[derive(Debug, Clone)]
pub struct Player {
    pub cost: Arc<dyn AggregativeCost>,
    pub phi: Arc<dyn LocalMap>,
    pub lo: f64,
    pub hi: f64,
}

impl Player {
    pub fn new(
        cost: impl AggregativeCost + 'static,
        phi: impl LocalMap + 'static,
        lo: f64,
        hi: f64,
    ) -> Self {
        Self {
            cost: Arc::new(cost),
            phi: Arc::new(phi),
            lo,
            hi,
        }
    }

    pub fn quadratic(cost: QuadraticAggCost, phi: AffineMap, lo: f64, hi: f64) -> Self {
        Self::new(cost, phi, lo, hi)
    }
}

/// A joint action, one scalar per player.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionProfile(pub Vec<f64>);

impl ActionProfile {
    pub fn uniform(n: usize, value: f64) -> Self {
        Self(vec![value; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn distance(&self, other: &[f64]) -> f64 {
        crate::math::sqrt(
            self.0
                .iter()
                .zip(other)
                .map(|(a, b)| (a - b) * (a - b))
                .sum(),
        )
    }
}

#[derive(Debug, Clone)]
pub struct GameSpec {
    players: Vec<Player>,
    lipschitz_g: Vec<f64>,
    lipschitz_phi: Vec<f64>,
    monotonicity_m: f64,
}

impl GameSpec {
    /// Builds a game. When `monotonicity_m` is `None` it is derived for
    /// quadratic costs with affine maps as a Gershgorin lower bound on the
    /// symmetric part of the pseudo-gradient Jacobian; other games must
    /// supply it.
    pub fn new(players: Vec<Player>, monotonicity_m: Option<f64>) -> Result<Self> {
        if players.is_empty() {
            return Err(Error::InvalidGame("a game needs at least one player"));
        }
        for p in &players {
            if !(p.lo < p.hi) {
                return Err(Error::InvalidGame("action interval needs lo < hi"));
            }
        }
        let lipschitz_g = players
            .iter()
            .map(|p| p.cost.aggregate_lipschitz())
            .collect();
        let lipschitz_phi = players.iter().map(|p| p.phi.lipschitz()).collect();
        let mut spec = Self {
            players,
            lipschitz_g,
            lipschitz_phi,
            monotonicity_m: 0.0,
        };
        spec.monotonicity_m = match monotonicity_m {
            Some(m) => m,
            None => spec
                .gershgorin_monotonicity()
                .ok_or(Error::InvalidGame("monotonicity constant must be supplied"))?,
        };
        if !(spec.monotonicity_m > 0.0) {
            return Err(Error::InvalidGame("monotonicity constant must be positive"));
        }
        Ok(spec)
    }

    /// Overrides the derived Lipschitz constants.
    pub fn with_lipschitz(
        mut self,
        lipschitz_g: Vec<f64>,
        lipschitz_phi: Vec<f64>,
    ) -> Result<Self> {
        let n = self.players.len();
        for v in [&lipschitz_g, &lipschitz_phi] {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: v.len(),
                });
            }
        }
        if lipschitz_g
            .iter()
            .chain(&lipschitz_phi)
            .any(|l| !(*l > 0.0))
        {
            return Err(Error::InvalidGame("Lipschitz constants must be positive"));
        }
        for (l2, p) in lipschitz_phi.iter().zip(&self.players) {
            if let Some(phi) = p.phi.as_affine() {
                if *l2 < abs(phi.c) {
                    return Err(Error::InvalidGame("phi Lipschitz constant below |c|"));
                }
            }
        }
        self.lipschitz_g = lipschitz_g;
        self.lipschitz_phi = lipschitz_phi;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.players.len()
    }

    pub fn players(&self) -> &[Player] {
        &self.players
    }

    pub fn player(&self, i: usize) -> Result<&Player> {
        self.players.get(i).ok_or(Error::PlayerOutOfRange {
            index: i,
            n: self.players.len(),
        })
    }

    pub fn lipschitz_g(&self) -> &[f64] {
        &self.lipschitz_g
    }

    pub fn lipschitz_phi(&self) -> &[f64] {
        &self.lipschitz_phi
    }

    /// `max_i L_{i,2}`.
    pub fn max_lipschitz_phi(&self) -> f64 {
        self.lipschitz_phi.iter().copied().fold(0.0, f64::max)
    }

    pub fn monotonicity_m(&self) -> f64 {
        self.monotonicity_m
    }

    pub fn bounds(&self, i: usize) -> (f64, f64) {
        (self.players[i].lo, self.players[i].hi)
    }

    pub fn phi(&self, i: usize, q: f64) -> f64 {
        self.players[i].phi.eval(q)
    }

    /// `sigma(q) = (1/N) sum_i phi_i(q_i)`.
    pub fn aggregate(&self, q: &[f64]) -> Result<f64> {
        self.check_len(q)?;
        let n = self.n() as f64;
        Ok(self
            .players
            .iter()
            .zip(q)
            .map(|(p, &qi)| p.phi.eval(qi))
            .sum::<f64>()
            / n)
    }

    /// `g_i(q_i, y)`: own-action derivative plus the aggregate channel,
    /// both evaluated with the aggregate replaced by `y`.
    pub fn partial_gradient(&self, i: usize, q_i: f64, y: f64) -> Result<f64> {
        let p = self.player(i)?;
        Ok(self.partial_gradient_unchecked(p, q_i, y))
    }

    fn partial_gradient_unchecked(&self, p: &Player, q_i: f64, y: f64) -> f64 {
        p.cost.grad_action(q_i, y)
            + p.cost.grad_aggregate(q_i, y) * p.phi.derivative(q_i) / self.n() as f64
    }

    /// Pseudo-gradient `col(g_i(q_i, sigma(q)))`.
    pub fn pseudo_gradient(&self, q: &[f64]) -> Result<Vec<f64>> {
        let sigma = self.aggregate(q)?;
        Ok(self
            .players
            .iter()
            .zip(q)
            .map(|(p, &qi)| self.partial_gradient_unchecked(p, qi, sigma))
            .collect())
    }

    /// Cost of player `i` at joint action `q`.
    pub fn cost(&self, i: usize, q: &[f64]) -> Result<f64> {
        let sigma = self.aggregate(q)?;
        Ok(self.player(i)?.cost.value(q[i], sigma))
    }

    /// Projection onto `U_i`.
    pub fn project(&self, i: usize, v: f64) -> f64 {
        let p = &self.players[i];
        v.clamp(p.lo, p.hi)
    }

    pub fn contains(&self, q: &[f64]) -> bool {
        q.len() == self.n()
            && self
                .players
                .iter()
                .zip(q)
                .all(|(p, &qi)| qi >= p.lo && qi <= p.hi)
    }

    fn check_len(&self, q: &[f64]) -> Result<()> {
        if q.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: q.len(),
            });
        }
        Ok(())
    }

    fn quadratic_affine(&self) -> Option<Vec<(QuadraticAggCost, AffineMap)>> {
        self.players
            .iter()
            .map(|p| Some((*p.cost.as_quadratic()?, *p.phi.as_affine()?)))
            .collect()
    }

    /// Jacobian of the pseudo-gradient for quadratic costs with affine maps
    /// (constant over the action space).
    fn quadratic_jacobian(parts: &[(QuadraticAggCost, AffineMap)]) -> Matrix {
        let n = parts.len();
        let nf = n as f64;
        let mut jac = Matrix::zeros(n);
        for (i, (cost, phi)) in parts.iter().enumerate() {
            for (j, (_, phj)) in parts.iter().enumerate() {
                jac[(i, j)] = cost.a * phj.c / nf;
            }
            jac[(i, i)] += cost.a * phi.c / nf + cost.curvature();
        }
        jac
    }

    fn gershgorin_monotonicity(&self) -> Option<f64> {
        let parts = self.quadratic_affine()?;
        let jac = Self::quadratic_jacobian(&parts);
        let n = parts.len();
        let bound = (0..n)
            .map(|i| {
                let off: f64 = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| abs(0.5 * (jac[(i, j)] + jac[(j, i)])))
                    .sum();
                jac[(i, i)] - off
            })
            .fold(f64::INFINITY, f64::min);
        (bound > 0.0).then_some(bound)
    }

    /// Step used by the equilibrium oracle: `min_i 1/(2 P0 kappa_i/b2_i^2 + |a_i|)`
    /// for the quadratic family, `1e-2` otherwise.
    pub fn oracle_step(&self) -> f64 {
        let quad: Option<Vec<&QuadraticAggCost>> =
            self.players.iter().map(|p| p.cost.as_quadratic()).collect();
        match quad {
            Some(costs) => costs
                .iter()
                .map(|c| 1.0 / (c.curvature() + abs(c.a)))
                .fold(f64::INFINITY, f64::min),
            None => 1e-2,
        }
    }
}

/// Output of [`solve_ne_oracle`].
#[derive(Debug, Clone, PartialEq)]
pub struct NeSolution {
    pub q: ActionProfile,
    /// `||q - P_U[q - gamma F(q)]||_inf` at the returned point.
    pub residual: f64,
    pub iterations: usize,
    pub step: f64,
    /// Direct solution of `F(q) = 0`, present for quadratic/affine games
    /// whose solution lies strictly inside the box.
    pub linear: Option<Vec<f64>>,
    /// `||q - linear||_inf` when `linear` is present.
    pub disagreement: Option<f64>,
}

pub const ORACLE_MAX_ITERATIONS: usize = 10_000_000;

/// Computes the Nash equilibrium by projected pseudo-gradient iteration,
/// cross-checked by a linear solve when the game is quadratic with an
/// interior solution.
pub fn solve_ne_oracle(spec: &GameSpec, tol: f64) -> Result<NeSolution> {
    let n = spec.n();
    let gamma = spec.oracle_step();
    let target = tol * (gamma * spec.monotonicity_m() * 0.5).min(1.0);
    let mut q: Vec<f64> = (0..n)
        .map(|i| {
            let (lo, hi) = spec.bounds(i);
            0.5 * (lo + hi)
        })
        .collect();
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < ORACLE_MAX_ITERATIONS {
        let grad = spec.pseudo_gradient(&q)?;
        let next: Vec<f64> = (0..n)
            .map(|i| spec.project(i, q[i] - gamma * grad[i]))
            .collect();
        residual = q
            .iter()
            .zip(&next)
            .map(|(a, b)| abs(a - b))
            .fold(0.0, f64::max);
        iterations += 1;
        if !residual.is_finite() {
            break;
        }
        if residual < target {
            break;
        }
        q = next;
    }
    if !(residual < target) {
        return Err(Error::OracleFailure {
            iterations,
            residual,
        });
    }

    let linear = spec.quadratic_affine().and_then(|parts| {
        let jac = GameSpec::quadratic_jacobian(&parts);
        let nf = n as f64;
        let mean_d: f64 = parts.iter().map(|(_, phi)| phi.d).sum::<f64>() / nf;
        let rhs: Vec<f64> = parts
            .iter()
            .map(|(c, _)| 2.0 * c.p0 * c.kappa / c.b2 - c.b1 - c.a * mean_d)
            .collect();
        let sol = solve(&jac, &rhs).ok()?;
        let interior = sol.iter().enumerate().all(|(i, &x)| {
            let (lo, hi) = spec.bounds(i);
            x > lo && x < hi
        });
        interior.then_some(sol)
    });
    let disagreement = linear.as_ref().map(|lin| {
        lin.iter()
            .zip(&q)
            .map(|(a, b)| abs(a - b))
            .fold(0.0, f64::max)
    });
    if let Some(d) = disagreement {
        if d > 10.0 * tol {
            return Err(Error::SpecInconsistency { disagreement: d });
        }
    }
    Ok(NeSolution {
        q: ActionProfile(q),
        residual,
        iterations,
        step: gamma,
        linear,
        disagreement,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    pub samples: usize,
    /// `min (F(q) - F(q'))^T (q - q') / ||q - q'||^2` over the sampled pairs.
    pub min_ratio: f64,
    pub required: f64,
    pub passed: bool,
}

/// Samples pairs uniformly from the action box and checks the strong
/// monotonicity inequality against the game's constant `m`.
pub fn verify_strong_monotonicity_sample(
    spec: &GameSpec,
    samples: usize,
    seed: u64,
) -> Result<MonotonicityReport> {
    let samples = samples.max(2);
    let n = spec.n();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha20Rng| -> Vec<f64> {
        (0..n)
            .map(|i| {
                let (lo, hi) = spec.bounds(i);
                lo + (hi - lo) * unit_open(rng.next_u64())
            })
            .collect()
    };
    let mut min_ratio = f64::INFINITY;
    for _ in 0..samples {
        let q = draw(&mut rng);
        let qp = draw(&mut rng);
        let gq = spec.pseudo_gradient(&q)?;
        let gqp = spec.pseudo_gradient(&qp)?;
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..n {
            let dq = q[i] - qp[i];
            num += (gq[i] - gqp[i]) * dq;
            den += dq * dq;
        }
        if den > 0.0 {
            min_ratio = min_ratio.min(num / den);
        }
    }
    let required = spec.monotonicity_m() * (1.0 - 1e-6);
    Ok(MonotonicityReport {
        samples,
        min_ratio,
        required,
        passed: min_ratio >= required,
    })
}
