//! Time-varying directed communication graphs.
//!
//! Nodes are indexed from 0. An edge `(j, i)` means player `i` receives from
//! player `j`. Self-loops are implicit: every node is always its own in- and
//! out-neighbor, so they are never stored.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{abs, exp, linear_fit, ln};
use crate::matrix::Matrix;

/// Deviations at or below this value are treated as floating-point noise.
pub const DEVIATION_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Digraph {
    /// Builds a digraph on `n` nodes. Self-loops are dropped and duplicate
    /// edges collapse.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("a digraph needs at least one node"));
        }
        let mut set = BTreeSet::new();
        for (from, to) in edges {
            if from >= n || to >= n {
                return Err(Error::EdgeOutOfRange { from, to, n });
            }
            if from != to {
                set.insert((from, to));
            }
        }
        Ok(Self { n, edges: set })
    }

    pub fn complete(n: usize) -> Result<Self> {
        Self::new(
            n,
            (0..n).flat_map(|j| (0..n).filter(move |&i| i != j).map(move |i| (j, i))),
        )
    }

    /// Directed cycle `0 -> 1 -> ... -> n-1 -> 0`.
    pub fn cycle(n: usize) -> Result<Self> {
        Self::new(n, (0..n).map(|j| (j, (j + 1) % n)))
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Explicit (non-self-loop) edges in sorted order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// `|N_j^+|`, counting the implicit self-loop.
    pub fn out_degree(&self, j: usize) -> usize {
        1 + self.edges.range((j, 0)..(j + 1, 0)).count()
    }

    /// In-neighbors of `i`, including `i` itself.
    pub fn in_neighbors(&self, i: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter(|&&(_, to)| to == i)
            .map(|&(from, _)| from)
            .collect();
        out.push(i);
        out.sort_unstable();
        out
    }

    /// Union of edge sets over graphs with the same node count.
    pub fn union<'a>(graphs: impl IntoIterator<Item = &'a Digraph>) -> Result<Self> {
        let mut iter = graphs.into_iter();
        let first = iter
            .next()
            .ok_or(Error::InvalidGraph("union of an empty set of graphs"))?;
        let mut out = first.clone();
        for g in iter {
            if g.n != out.n {
                return Err(Error::DimensionMismatch {
                    expected: out.n,
                    got: g.n,
                });
            }
            out.edges.extend(g.edges.iter().copied());
        }
        Ok(out)
    }

    /// Edge count over `n(n-1)`, self-loops excluded. A single node has
    /// density 0.
    pub fn density(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        self.edges.len() as f64 / (self.n * (self.n - 1)) as f64
    }
}

/// True iff every node reaches every other node.
pub fn is_strongly_connected(g: &Digraph) -> bool {
    let n = g.n;
    let mut forward = vec![Vec::new(); n];
    let mut backward = vec![Vec::new(); n];
    for (from, to) in g.edges() {
        forward[from].push(to);
        backward[to].push(from);
    }
    reaches_all(&forward) && reaches_all(&backward)
}

fn reaches_all(adj: &[Vec<usize>]) -> bool {
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                queue.push_back(w);
            }
        }
    }
    count == adj.len()
}

/// Column-stochastic weight matrix `B(l)` with `B_ij = 1/|N_j^+|` for
/// `j` in `N_i^-`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix(Matrix);

impl WeightMatrix {
    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.0.mul_vec(v)
    }
}

pub fn build_weight_matrix(g: &Digraph) -> WeightMatrix {
    let n = g.n;
    let mut m = Matrix::zeros(n);
    for j in 0..n {
        let w = 1.0 / g.out_degree(j) as f64;
        m[(j, j)] = w;
        for (_, to) in g.edges.range((j, 0)..(j + 1, 0)) {
            m[(*to, j)] = w;
        }
    }
    WeightMatrix(m)
}

/// Periodic sequence of digraphs: `graph_at(l) = graphs[l mod period]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSchedule {
    graphs: Vec<Digraph>,
    weights: Vec<WeightMatrix>,
    d_window: usize,
}

impl GraphSchedule {
    pub fn new(graphs: Vec<Digraph>, d_window: usize) -> Result<Self> {
        let first = graphs
            .first()
            .ok_or(Error::InvalidGraph("a schedule needs at least one graph"))?;
        let n = first.n;
        if let Some(bad) = graphs.iter().find(|g| g.n != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: bad.n,
            });
        }
        if d_window == 0 {
            return Err(Error::InvalidGraph("D must be positive"));
        }
        let weights = graphs.iter().map(build_weight_matrix).collect();
        Ok(Self {
            graphs,
            weights,
            d_window,
        })
    }

    /// A schedule that repeats one graph forever.
    pub fn fixed(g: Digraph) -> Self {
        Self::new(vec![g], 1).expect("single graph schedule is valid")
    }

    pub fn node_count(&self) -> usize {
        self.graphs[0].n
    }

    pub fn period(&self) -> usize {
        self.graphs.len()
    }

    pub fn d_window(&self) -> usize {
        self.d_window
    }

    pub fn graphs(&self) -> &[Digraph] {
        &self.graphs
    }

    pub fn graph_at(&self, l: usize) -> &Digraph {
        &self.graphs[l % self.graphs.len()]
    }

    pub fn weight_at(&self, l: usize) -> &WeightMatrix {
        &self.weights[l % self.weights.len()]
    }
}

/// Checks that every window `[rD, (r+1)D - 1]` has a strongly connected
/// edge union. Window starts repeat with the period, so `r < period` covers
/// all of them.
pub fn check_d_strong_connectivity(s: &GraphSchedule) -> bool {
    let d = s.d_window;
    (0..s.period()).all(|r| {
        let start = r * d;
        let window = (start..start + d).map(|l| s.graph_at(l));
        Digraph::union(window)
            .map(|u| is_strongly_connected(&u))
            .unwrap_or(false)
    })
}

/// `B(l:r) = B(l) B(l-1) ... B(r)`.
pub fn backward_product(s: &GraphSchedule, l: usize, r: usize) -> Result<Matrix> {
    if l < r {
        return Err(Error::InvalidRange { l, r });
    }
    let mut acc = s.weight_at(r).matrix().clone();
    for k in r + 1..=l {
        acc = s.weight_at(k).matrix().mul(&acc);
    }
    Ok(acc)
}

/// Empirical view of the geometric mixing of `B(l:0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingEstimate {
    /// Limit vector per phase offset `l mod period`; each is stochastic.
    pub psi: Vec<Vec<f64>>,
    pub lambda_fit: f64,
    pub c1_fit: f64,
    /// Coefficient of determination of the log-linear fit (1 when nothing
    /// was above the floor).
    pub r_squared: f64,
    /// `min_l min_i [B(l:0) 1]_i` over the horizon.
    pub delta_bar: f64,
    /// `max_ij |[B(l:0)]_ij - psi_i|` for `l = 0..=horizon`.
    pub deviations: Vec<f64>,
}

impl MixingEstimate {
    pub fn psi_at(&self, l: usize) -> &[f64] {
        &self.psi[l % self.psi.len()]
    }

    /// Points used by the fit: `(l, deviation)` with `l <= horizon / 2` and
    /// deviation above [`DEVIATION_FLOOR`].
    pub fn fit_points(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        let cutoff = (self.deviations.len() - 1) / 2;
        self.deviations
            .iter()
            .copied()
            .enumerate()
            .take(cutoff + 1)
            .filter(|&(_, d)| d > DEVIATION_FLOOR)
    }

    pub fn bound(&self, l: usize) -> f64 {
        self.c1_fit * exp(l as f64 * ln(self.lambda_fit))
    }
}

pub fn estimate_mixing(s: &GraphSchedule, horizon: usize) -> Result<MixingEstimate> {
    let required = (4 * s.d_window).max(s.period());
    if horizon < required {
        return Err(Error::InsufficientHorizon { horizon, required });
    }
    if !check_d_strong_connectivity(s) {
        return Err(Error::NotStronglyConnected);
    }
    let n = s.node_count();
    let period = s.period();

    let mut products = Vec::with_capacity(horizon + 1);
    let mut acc = s.weight_at(0).matrix().clone();
    products.push(acc.clone());
    for l in 1..=horizon {
        acc = s.weight_at(l).matrix().mul(&acc);
        products.push(acc.clone());
    }

    let psi: Vec<Vec<f64>> = (0..period)
        .map(|phase| {
            let l = horizon - ((horizon + period - phase) % period);
            let p = &products[l];
            let mut v: Vec<f64> = p.row_sums().iter().map(|r| r / n as f64).collect();
            let total: f64 = v.iter().sum();
            v.iter_mut().for_each(|x| *x /= total);
            v
        })
        .collect();

    let deviations: Vec<f64> = products
        .iter()
        .enumerate()
        .map(|(l, p)| {
            let target = &psi[l % period];
            (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .map(|(i, j)| abs(p[(i, j)] - target[i]))
                .fold(0.0, f64::max)
        })
        .collect();

    let delta_bar = products
        .iter()
        .flat_map(|p| p.row_sums())
        .fold(f64::INFINITY, f64::min);

    let mut est = MixingEstimate {
        psi,
        lambda_fit: f64::EPSILON,
        c1_fit: 0.0,
        r_squared: 1.0,
        delta_bar,
        deviations,
    };

    let (xs, ys): (Vec<f64>, Vec<f64>) = est.fit_points().map(|(l, d)| (l as f64, ln(d))).unzip();
    if let Some((slope, _, r2)) = linear_fit(&xs, &ys) {
        if slope >= 0.0 {
            return Err(Error::NoDecay);
        }
        est.lambda_fit = exp(slope);
        est.r_squared = r2;
    }
    let log_lambda = ln(est.lambda_fit);
    let log_c1 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| y - x * log_lambda)
        .fold(f64::NEG_INFINITY, f64::max);
    est.c1_fit = if log_c1.is_finite() {
        exp(log_c1)
    } else {
        DEVIATION_FLOOR
    };
    Ok(est)
}
