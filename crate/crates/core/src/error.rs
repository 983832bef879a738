use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(&'static str),

    #[error("edge ({from}, {to}) has an endpoint outside 0..{n}")]
    EdgeOutOfRange { from: usize, to: usize, n: usize },

    #[error("invalid range: l = {l} < r = {r}")]
    InvalidRange { l: usize, r: usize },

    #[error("horizon {horizon} too small to observe decay (need at least {required})")]
    InsufficientHorizon { horizon: usize, required: usize },

    #[error("schedule is not D-strongly connected")]
    NotStronglyConnected,

    #[error("mixing deviation does not decay over the horizon")]
    NoDecay,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("player index {index} out of range for {n} players")]
    PlayerOutOfRange { index: usize, n: usize },

    #[error("invalid game: {0}")]
    InvalidGame(&'static str),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(&'static str),

    #[error("action {value} of player {player} outside [{lo}, {hi}]")]
    OutOfBounds {
        player: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("NE oracle did not converge in {iterations} iterations (residual {residual:e})")]
    OracleFailure { iterations: usize, residual: f64 },

    #[error("fixed-point and linear-solve equilibria disagree by {disagreement:e}")]
    SpecInconsistency { disagreement: f64 },

    #[error("noise scale must be positive, got {0}")]
    InvalidScale(f64),

    #[error("push-sum weight of player {player} underflowed at iteration {iteration}")]
    WeightUnderflow { player: usize, iteration: usize },

    #[error("sensitivity is undefined at iteration 0")]
    UndefinedSensitivity,

    #[error("iteration {0} not present in the run record")]
    MissingIteration(usize),

    #[error("singular linear system")]
    Singular,
}
