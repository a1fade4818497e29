//! Receivers, priors, sender payoffs and the Bayesian primitives shared by
//! every other module.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute band around 0.5 inside which a posterior counts as indifferent.
/// Indifferent receivers take the sender's preferred action.
pub const TIE_EPS: f64 = 1e-12;

const PROB_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ReceiverType {
    /// Believer: prior on state 1 above one half.
    #[serde(rename = "h")]
    H,
    /// Sceptic: prior on state 1 below one half.
    #[serde(rename = "l")]
    L,
}

impl ReceiverType {
    pub const ALL: [ReceiverType; 2] = [ReceiverType::H, ReceiverType::L];

    pub fn other(self) -> Self {
        match self {
            ReceiverType::H => ReceiverType::L,
            ReceiverType::L => ReceiverType::H,
        }
    }

    pub fn index(self) -> usize {
        match self {
            ReceiverType::H => 0,
            ReceiverType::L => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ReceiverType::H => "h",
            ReceiverType::L => "l",
        }
    }
}

impl std::fmt::Display for ReceiverType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// One support point of a connectedness distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub lambda: f64,
    pub prob: f64,
}

/// Finite-support distribution of connectedness for one receiver type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Connectedness(Vec<Atom>);

impl Connectedness {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        let c = Connectedness(atoms);
        c.validate()?;
        Ok(c)
    }

    /// All receivers of the type share the same connectedness.
    pub fn point(lambda: f64) -> Self {
        Connectedness(vec![Atom { lambda, prob: 1.0 }])
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(lambda, prob)| Atom { lambda, prob })
                .collect(),
        )
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// E(λ).
    pub fn mean(&self) -> f64 {
        self.0.iter().map(|a| a.prob * a.lambda).sum()
    }

    pub fn second_moment(&self) -> f64 {
        self.0.iter().map(|a| a.prob * a.lambda * a.lambda).sum()
    }

    /// Cumulative probabilities in support order, last entry forced to 1.
    pub fn cdf(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out: Vec<f64> = self
            .0
            .iter()
            .map(|a| {
                acc += a.prob;
                acc
            })
            .collect();
        if let Some(last) = out.last_mut() {
            *last = 1.0;
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.0.is_empty() {
            return Err(Error::InvalidParams(
                "connectedness distribution has empty support".into(),
            ));
        }
        for a in &self.0 {
            if !(a.lambda.is_finite() && a.lambda >= 0.0) {
                return Err(Error::InvalidParams(format!(
                    "connectedness {} must be finite and nonnegative",
                    a.lambda
                )));
            }
            if !(0.0..=1.0).contains(&a.prob) {
                return Err(Error::InvalidParams(format!(
                    "probability {} outside [0,1]",
                    a.prob
                )));
            }
        }
        let total: f64 = self.0.iter().map(|a| a.prob).sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidParams(format!(
                "connectedness probabilities sum to {total}, not 1"
            )));
        }
        Ok(())
    }
}

/// Sender payoff as a function of the fraction of receivers taking action 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PayoffFn {
    Linear,
    /// `x^p`, `p >= 1`.
    PowerConvex { p: f64 },
    /// `min(x, cap)`.
    CappedLinear { cap: f64 },
    /// `(x^b - 1) / b`. Not normalised: `v(0) = -1/b`.
    Crra { b: f64 },
    /// Voting payoff: 1 once the fraction reaches the threshold, else 0.
    Step { threshold: f64 },
}

impl PayoffFn {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        match *self {
            PayoffFn::Linear => Ok(()),
            PayoffFn::PowerConvex { p } if !(p.is_finite() && p >= 1.0) => {
                bad(format!("power_convex exponent {p} must be >= 1"))
            }
            PayoffFn::CappedLinear { cap } if !(cap > 0.0 && cap < 1.0) => {
                bad(format!("capped_linear cap {cap} must lie in (0,1)"))
            }
            PayoffFn::Crra { b } if !(b > 0.0 && b <= 1.0) => {
                bad(format!("crra coefficient {b} must lie in (0,1]"))
            }
            PayoffFn::Step { threshold } if !(threshold > 0.0 && threshold < 1.0) => {
                bad(format!("step threshold {threshold} must lie in (0,1)"))
            }
            _ => Ok(()),
        }
    }

    /// Evaluates `v(x)` without range checks. Callers guarantee `x ∈ [0,1]`.
    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            PayoffFn::Linear => x,
            PayoffFn::PowerConvex { p } => x.powf(p),
            PayoffFn::CappedLinear { cap } => x.min(cap),
            PayoffFn::Crra { b } => (x.powf(b) - 1.0) / b,
            // exact comparison: fractions at finite n are exact rationals
            PayoffFn::Step { threshold } => {
                if x >= threshold {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Weakly convex on [0,1] (the risk-neutral / risk-loving case).
    pub fn is_convex(&self) -> bool {
        matches!(self, PayoffFn::Linear | PayoffFn::PowerConvex { .. })
    }

    /// Continuous, weakly increasing, bounded and `v(0) = 0`.
    pub fn is_normalized(&self) -> bool {
        matches!(
            self,
            PayoffFn::Linear | PayoffFn::PowerConvex { .. } | PayoffFn::CappedLinear { .. }
        )
    }

    /// Describes how this payoff departs from the baseline normalisation, if it does.
    pub fn deviation(&self) -> Option<&'static str> {
        match self {
            PayoffFn::Crra { .. } => Some("crra: v(0) = -1/b, not normalised"),
            PayoffFn::Step { .. } => Some("step: discontinuous at the threshold"),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PayoffFn::Linear => "linear",
            PayoffFn::PowerConvex { .. } => "power_convex",
            PayoffFn::CappedLinear { .. } => "capped_linear",
            PayoffFn::Crra { .. } => "crra",
            PayoffFn::Step { .. } => "step",
        }
    }
}

/// `v(x)` with the domain check.
pub fn payoff_eval(v: &PayoffFn, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfRange {
            what: "fraction",
            value: x,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(v.value(x))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Share of believers; sceptics make up the rest.
    pub gamma_h: f64,
    pub mu_h1: f64,
    pub mu_l1: f64,
    /// Sender's prior on state 1.
    pub mu_s1: f64,
    /// Homophily factor in (0,1]: cross-type links are scaled by it.
    pub q: f64,
    pub f_h: Connectedness,
    pub f_l: Connectedness,
    pub payoff: PayoffFn,
}

impl ModelParams {
    /// Island model: both types share the connectedness `lambda`.
    pub fn island(gamma_h: f64, lambda: f64, q: f64) -> Self {
        ModelParams {
            gamma_h,
            mu_h1: 0.6,
            mu_l1: 0.4,
            mu_s1: 0.5,
            q,
            f_h: Connectedness::point(lambda),
            f_l: Connectedness::point(lambda),
            payoff: PayoffFn::Linear,
        }
    }

    pub fn with_priors(mut self, mu_h1: f64, mu_l1: f64, mu_s1: f64) -> Self {
        self.mu_h1 = mu_h1;
        self.mu_l1 = mu_l1;
        self.mu_s1 = mu_s1;
        self
    }

    pub fn with_payoff(mut self, payoff: PayoffFn) -> Self {
        self.payoff = payoff;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if !(0.0..=1.0).contains(&self.gamma_h) {
            return bad(format!("gamma_h = {} outside [0,1]", self.gamma_h));
        }
        if !(self.mu_h1 > 0.5 && self.mu_h1 < 1.0) {
            return bad(format!("mu_h1 = {} must lie in (0.5, 1)", self.mu_h1));
        }
        if !(self.mu_l1 > 0.0 && self.mu_l1 < 0.5) {
            return bad(format!("mu_l1 = {} must lie in (0, 0.5)", self.mu_l1));
        }
        if !(self.mu_s1 >= 0.0 && self.mu_s1 <= 1.0) {
            return bad(format!("mu_s1 = {} outside [0,1]", self.mu_s1));
        }
        if !(self.q > 0.0 && self.q <= 1.0) {
            return bad(format!("q = {} must lie in (0,1]", self.q));
        }
        self.f_h.validate()?;
        self.f_l.validate()?;
        self.payoff.validate()
    }

    pub fn gamma(&self, t: ReceiverType) -> f64 {
        match t {
            ReceiverType::H => self.gamma_h,
            ReceiverType::L => 1.0 - self.gamma_h,
        }
    }

    /// Prior probability of state 1 for a receiver of type `t`.
    pub fn mu1(&self, t: ReceiverType) -> f64 {
        match t {
            ReceiverType::H => self.mu_h1,
            ReceiverType::L => self.mu_l1,
        }
    }

    pub fn connectedness(&self, t: ReceiverType) -> &Connectedness {
        match t {
            ReceiverType::H => &self.f_h,
            ReceiverType::L => &self.f_l,
        }
    }

    /// Link-probability multiplier between types.
    pub fn affinity(&self, a: ReceiverType, b: ReceiverType) -> f64 {
        if a == b {
            1.0
        } else {
            self.q
        }
    }

    /// Prior odds μ_t(1)/μ_t(0).
    pub fn prior_odds(&self, t: ReceiverType) -> f64 {
        let m = self.mu1(t);
        m / (1.0 - m)
    }
}

/// Posterior on state 1 after observing a non-empty signal.
pub fn posterior_nonempty(prior1: f64, pi1: f64, pi0: f64) -> Result<f64> {
    if !(prior1 > 0.0 && prior1 < 1.0) {
        return Err(Error::OutOfRange {
            what: "prior",
            value: prior1,
            lo: 0.0,
            hi: 1.0,
        });
    }
    for (what, p) in [("pi(s|1)", pi1), ("pi(s|0)", pi0)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::OutOfRange {
                what,
                value: p,
                lo: 0.0,
                hi: 1.0,
            });
        }
    }
    let num = pi1 * prior1;
    let den = num + pi0 * (1.0 - prior1);
    if den <= 0.0 {
        return Err(Error::SignalNeverSent);
    }
    Ok((num / den).clamp(0.0, 1.0))
}

/// Best response of a receiver holding `posterior1`; ties go to action 1.
#[inline]
pub fn action(posterior1: f64) -> u8 {
    u8::from(posterior1 >= 0.5 - TIE_EPS)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalClass {
    /// Persuades both types.
    Good,
    /// Persuades believers only.
    Int,
    /// Persuades neither type.
    Bad,
    Empty,
}

impl SignalClass {
    /// Actions (believer, sceptic) upon observing a signal of this class.
    pub fn actions(self) -> (u8, u8) {
        match self {
            SignalClass::Good => (1, 1),
            SignalClass::Int => (1, 0),
            SignalClass::Bad | SignalClass::Empty => (0, 0),
        }
    }
}

pub fn classify_signal(params: &ModelParams, pi1: f64, pi0: f64) -> Result<SignalClass> {
    let sceptic = action(posterior_nonempty(params.mu_l1, pi1, pi0)?);
    let believer = action(posterior_nonempty(params.mu_h1, pi1, pi0)?);
    Ok(match (believer, sceptic) {
        (_, 1) => SignalClass::Good,
        (1, 0) => SignalClass::Int,
        _ => SignalClass::Bad,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn priors() -> ModelParams {
        ModelParams::island(0.5, 1.0, 1.0)
    }

    #[test]
    fn posterior_examples() {
        assert!((posterior_nonempty(0.6, 0.5, 0.5).unwrap() - 0.6).abs() < 1e-15);
        assert_eq!(posterior_nonempty(0.6, 0.3, 0.0).unwrap(), 1.0);
        // 0.24 / (0.24 + 0.24)
        assert!((posterior_nonempty(0.4, 0.6, 0.4).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(
            posterior_nonempty(0.4, 0.0, 0.0),
            Err(Error::SignalNeverSent)
        ));
    }

    #[test]
    fn action_breaks_ties_for_sender() {
        assert_eq!(action(0.5), 1);
        assert_eq!(action(0.49), 0);
        assert_eq!(action(1.0), 1);
        assert_eq!(action(0.5 - 1e-13), 1);
    }

    #[test]
    fn classify_examples() {
        let p = priors();
        assert_eq!(
            classify_signal(&p, 1.0, 0.4 / 0.6).unwrap(),
            SignalClass::Good
        );
        assert_eq!(classify_signal(&p, 0.5, 0.5).unwrap(), SignalClass::Int);
        assert_eq!(classify_signal(&p, 0.1, 0.9).unwrap(), SignalClass::Bad);
    }

    #[test]
    fn payoff_examples() {
        assert_eq!(payoff_eval(&PayoffFn::Linear, 0.3).unwrap(), 0.3);
        assert_eq!(
            payoff_eval(&PayoffFn::Step { threshold: 0.7 }, 0.7).unwrap(),
            1.0
        );
        let crra = payoff_eval(&PayoffFn::Crra { b: 0.5 }, 0.25).unwrap();
        assert!((crra + 1.0).abs() < 1e-15);
        assert!(payoff_eval(&PayoffFn::Linear, 1.2).is_err());
        assert!(payoff_eval(&PayoffFn::Linear, -0.1).is_err());
    }

    #[test]
    fn normalised_payoffs_vanish_at_zero() {
        for v in [
            PayoffFn::Linear,
            PayoffFn::PowerConvex { p: 2.5 },
            PayoffFn::CappedLinear { cap: 0.8 },
        ] {
            assert!(v.is_normalized());
            assert_eq!(v.value(0.0), 0.0);
        }
        assert!(PayoffFn::Crra { b: 0.3 }.deviation().is_some());
    }

    #[test]
    fn params_validation() {
        let mut p = priors();
        assert!(p.validate().is_ok());
        p.mu_l1 = 0.5;
        assert!(p.validate().is_err());
        let mut p = priors();
        p.q = 0.0;
        assert!(p.validate().is_err());
        assert!(Connectedness::from_pairs(&[(1.0, 0.5), (2.0, 0.4)]).is_err());
        assert!(Connectedness::from_pairs(&[(-1.0, 1.0)]).is_err());
    }

    #[test]
    fn params_json_round_trip() {
        let p = priors().with_payoff(PayoffFn::Step { threshold: 0.52 });
        let text = serde_json::to_string(&p).unwrap();
        let back: ModelParams = serde_json::from_str(&text).unwrap();
        assert_eq!(p, back);
        let bad = text.replace("\"q\"", "\"qq\"");
        assert!(serde_json::from_str::<ModelParams>(&bad).is_err());
    }

    fn any_payoff() -> impl Strategy<Value = PayoffFn> {
        prop_oneof![
            Just(PayoffFn::Linear),
            (1.0..4.0f64).prop_map(|p| PayoffFn::PowerConvex { p }),
            (0.05..0.95f64).prop_map(|cap| PayoffFn::CappedLinear { cap }),
            (0.01..1.0f64).prop_map(|b| PayoffFn::Crra { b }),
            (0.05..0.95f64).prop_map(|threshold| PayoffFn::Step { threshold }),
        ]
    }

    proptest! {
        #[test]
        fn posterior_monotone(prior in 0.01..0.99f64, a in 0.0..1.0f64, b in 0.0..1.0f64, eps in 0.0..0.1f64) {
            prop_assume!(a + b > 1e-6);
            let base = posterior_nonempty(prior, a, b).unwrap();
            let up = posterior_nonempty(prior, (a + eps).min(1.0), b).unwrap();
            let down = posterior_nonempty(prior, a, (b + eps).min(1.0)).unwrap();
            prop_assert!(up >= base - 1e-15);
            prop_assert!(down <= base + 1e-15);
        }

        #[test]
        fn posterior_ratio_invariant(prior in 0.01..0.99f64, a in 0.01..1.0f64, b in 0.01..1.0f64, k in 0.01..1.0f64) {
            let lhs = posterior_nonempty(prior, k * a, k * b).unwrap();
            let rhs = posterior_nonempty(prior, a, b).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }

        #[test]
        fn good_signals_persuade_believers(mu_h in 0.51..0.99f64, mu_l in 0.01..0.49f64, a in 0.0..1.0f64, b in 0.0..1.0f64) {
            prop_assume!(a + b > 1e-6);
            let p = ModelParams::island(0.5, 1.0, 1.0).with_priors(mu_h, mu_l, 0.5);
            if classify_signal(&p, a, b).unwrap() == SignalClass::Good {
                prop_assert_eq!(action(posterior_nonempty(mu_h, a, b).unwrap()), 1);
            }
        }

        #[test]
        fn payoff_weakly_increasing(v in any_payoff(), x in 0.0..1.0f64, dx in 0.0..1.0f64) {
            let y = (x + dx).min(1.0);
            prop_assert!(v.value(y) >= v.value(x) - 1e-15);
        }
    }
}
