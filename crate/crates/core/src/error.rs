use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("signal never sent: pi(s|1) = pi(s|0) = 0")]
    SignalNeverSent,

    #[error("{what} = {value} outside [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("forward distribution undefined: mean degree is zero")]
    ForwardUndefined,

    #[error("fixed point did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        last_iterate: Vec<f64>,
    },

    #[error("expected edge count {expected:.0} exceeds the configured budget {budget}")]
    EdgeBudget { expected: f64, budget: u64 },

    #[error("infeasible strategy: {0}")]
    InfeasibleStrategy(String),

    #[error("hypothesis fails: {0}")]
    Hypothesis(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("assertion failed: {0}")]
    Assertion(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
