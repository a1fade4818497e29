//! Shared fixtures for the benchmarks.

use persuasion_core::{Connectedness, ModelParams};

/// Homophilous two-type model with heterogeneous believers, a mid-sized
/// optimisation problem.
pub fn two_type_model() -> ModelParams {
    ModelParams {
        f_h: Connectedness::from_pairs(&[(1.2, 0.5), (2.4, 0.5)]).expect("valid atoms"),
        f_l: Connectedness::point(1.5),
        ..ModelParams::island(0.5, 1.0, 0.7)
    }
}
