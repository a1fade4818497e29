//! Bayesian persuasion on inhomogeneous random networks.

pub mod diffusion;
pub mod error;
pub mod graph;
pub mod harness;
pub mod limits;
pub mod model;
pub mod netgen;
pub mod optimizer;
pub mod rng;
pub mod scenarios;
pub mod stats;

pub use error::{Error, Result};
pub use limits::{compute_limits, LimitOptions, LimitStats};
pub use model::{
    action, classify_signal, payoff_eval, posterior_nonempty, Atom, Connectedness, ModelParams,
    PayoffFn, ReceiverType, SignalClass,
};
pub use rng::RngSpec;
