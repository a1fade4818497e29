use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::limits::LimitStats;
use crate::model::{ModelParams, ReceiverType, TIE_EPS};

const A1_TOL: f64 = 1e-9;
const SEARCH_CAP: usize = 100_000_000;

/// `(μ_l(1)/μ_l(0)) (1 - ζ̂ μ_h(0)/μ_h(1)) / (1 - ζ̂)`: the sceptic's likelihood
/// ratio for the empty signal when every Int signal reaches the believer giant.
pub fn empty_signal_ratio(params: &ModelParams, zeta_hat_l: f64) -> f64 {
    let k = (1.0 - params.mu_h1) / params.mu_h1;
    let num = params.prior_odds(ReceiverType::L) * (1.0 - k * zeta_hat_l);
    let den = 1.0 - zeta_hat_l;
    if den <= 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionA1 {
    pub holds: bool,
    /// Degrees where the ratio is within tolerance of one.
    pub offending: Vec<usize>,
    /// Degrees with `ζ̂(l,d) = 1`, where the ratio is undefined.
    pub excluded: Vec<usize>,
    /// Smallest `|ratio - 1|` over evaluated degrees.
    pub min_gap: f64,
}

pub fn check_condition_a1(params: &ModelParams, limits: &LimitStats, d_max: usize) -> ConditionA1 {
    let mut offending = Vec::new();
    let mut excluded = Vec::new();
    let mut min_gap = f64::INFINITY;
    for d in 0..=d_max {
        let z = limits.zeta_hat(ReceiverType::L, d);
        if z >= 1.0 {
            excluded.push(d);
            continue;
        }
        let gap = (empty_signal_ratio(params, z) - 1.0).abs();
        min_gap = min_gap.min(gap);
        if gap <= A1_TOL {
            offending.push(d);
        }
    }
    ConditionA1 {
        holds: offending.is_empty(),
        offending,
        excluded,
        min_gap,
    }
}

/// A degree threshold that may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum DVote {
    Finite(usize),
    Infinite,
}

impl DVote {
    pub fn finite(self) -> Option<usize> {
        match self {
            DVote::Finite(d) => Some(d),
            DVote::Infinite => None,
        }
    }
}

impl std::fmt::Display for DVote {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DVote::Finite(d) => write!(f, "{d}"),
            DVote::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for DVote {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            DVote::Finite(d) => s.serialize_u64(*d as u64),
            DVote::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for DVote {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            N(u64),
            S(String),
        }
        match Repr::deserialize(d)? {
            Repr::N(n) => Ok(DVote::Finite(n as usize)),
            Repr::S(s) if s == "inf" => Ok(DVote::Infinite),
            Repr::S(s) => Err(serde::de::Error::custom(format!("bad d_vote '{s}'"))),
        }
    }
}

/// Smallest sceptic degree at which the empty signal still persuades.
pub fn compute_d_vote(params: &ModelParams, limits: &LimitStats) -> DVote {
    let qualifies = |d: usize| {
        empty_signal_ratio(params, limits.zeta_hat(ReceiverType::L, d)) >= 1.0 - TIE_EPS
    };
    // ζ̂(l,·) increases to 1 when the believer giant exists and is reachable,
    // and is identically zero otherwise.
    let reachable = limits.c_hat > 0.0 && limits.zeta_hat.miss[ReceiverType::L.index()] < 1.0;
    if !reachable {
        return if qualifies(0) { DVote::Finite(0) } else { DVote::Infinite };
    }
    for d in 0..SEARCH_CAP {
        if qualifies(d) {
            return DVote::Finite(d);
        }
    }
    log::warn!("d_vote search stopped at {SEARCH_CAP} without a qualifying degree");
    DVote::Infinite
}
