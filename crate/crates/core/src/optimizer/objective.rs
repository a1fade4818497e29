use serde::{Deserialize, Serialize};

use crate::diffusion::empty_signal_action;
use crate::error::{Error, Result};
use crate::limits::LimitStats;
use crate::model::{ModelParams, ReceiverType};

/// Cells lighter than this are folded into the truncation error bound.
const MIN_CELL_WEIGHT: f64 = 1e-13;
const FEAS_SLACK: f64 = 1e-9;

/// A population slice `(t, d)` with share `γ_t p_d^t` and its probabilities of
/// observing a signal seeded on the giant (`zeta`) or believer giant (`zeta_hat`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub weight: f64,
    #[serde(rename = "type")]
    pub ty: ReceiverType,
    /// Degree, or `None` for the pooled tail past `d_max`.
    pub d: Option<usize>,
    pub zeta: f64,
    pub zeta_hat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExposureTable {
    pub cells: Vec<Cell>,
    /// Population mass not represented exactly by a cell.
    pub dropped_mass: f64,
}

impl ExposureTable {
    pub fn network(params: &ModelParams, limits: &LimitStats) -> Self {
        let mut cells = Vec::new();
        let mut dropped = 0.0;
        for t in ReceiverType::ALL {
            let g = params.gamma(t);
            let p = limits.degree(t);
            for d in 0..=limits.d_max {
                let w = g * p.get(d);
                if w < MIN_CELL_WEIGHT {
                    dropped += w;
                    continue;
                }
                cells.push(Cell {
                    weight: w,
                    ty: t,
                    d: Some(d),
                    zeta: limits.zeta(t, d),
                    zeta_hat: limits.zeta_hat(t, d),
                });
            }
            // The tail takes the d → ∞ limits of both exposure probabilities.
            let w = g * p.tail_mass;
            let lim = |miss: f64| if miss < 1.0 { 1.0 } else { 0.0 };
            if w >= MIN_CELL_WEIGHT {
                cells.push(Cell {
                    weight: w,
                    ty: t,
                    d: None,
                    zeta: lim(limits.zeta.miss[t.index()]),
                    zeta_hat: lim(limits.zeta_hat.miss[t.index()]),
                });
            }
            dropped += w;
        }
        ExposureTable {
            cells,
            dropped_mass: dropped,
        }
    }

    /// Everyone observes every signal.
    pub fn public(params: &ModelParams) -> Self {
        let cells = ReceiverType::ALL
            .iter()
            .map(|&t| Cell {
                weight: params.gamma(t),
                ty: t,
                d: None,
                zeta: 1.0,
                zeta_hat: 1.0,
            })
            .collect();
        ExposureTable {
            cells,
            dropped_mass: 0.0,
        }
    }
}

/// Two-signal strategy: a Good signal `s` and an Int signal `s'`, the
/// remainder being the empty signal.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
pub struct ReducedStrategy {
    pub pi_s1: f64,
    pub pi_s0: f64,
    pub pi_sp1: f64,
    pub pi_sp0: f64,
}

impl ReducedStrategy {
    pub fn new(pi_s1: f64, pi_s0: f64, pi_sp1: f64, pi_sp0: f64) -> Self {
        ReducedStrategy {
            pi_s1,
            pi_s0,
            pi_sp1,
            pi_sp0,
        }
    }

    pub(crate) fn from_array(x: [f64; 4]) -> Self {
        ReducedStrategy::new(x[0], x[1], x[2], x[3])
    }

    /// Class constraints. The Int signal's sceptic constraint is strict unless
    /// `closure` is set; signals never sent are exempt.
    pub fn check(&self, params: &ModelParams, closure: bool) -> Result<()> {
        let bad = |m: String| Err(Error::InfeasibleStrategy(m));
        for (name, p) in [
            ("pi_s1", self.pi_s1),
            ("pi_s0", self.pi_s0),
            ("pi_sp1", self.pi_sp1),
            ("pi_sp0", self.pi_sp0),
        ] {
            if !(-FEAS_SLACK..=1.0 + FEAS_SLACK).contains(&p) {
                return bad(format!("{name} = {p} outside [0,1]"));
            }
        }
        if self.pi_s1 + self.pi_sp1 > 1.0 + FEAS_SLACK {
            return bad("state-1 probabilities sum above 1".into());
        }
        if self.pi_s0 + self.pi_sp0 > 1.0 + FEAS_SLACK {
            return bad("state-0 probabilities sum above 1".into());
        }
        let (mh1, ml1) = (params.mu_h1, params.mu_l1);
        if (self.pi_s1 > 0.0 || self.pi_s0 > 0.0) && self.pi_s1 * ml1 < self.pi_s0 * (1.0 - ml1) - FEAS_SLACK {
            return bad("signal s does not persuade sceptics".into());
        }
        if self.pi_sp1 > 0.0 || self.pi_sp0 > 0.0 {
            if self.pi_sp1 * mh1 < self.pi_sp0 * (1.0 - mh1) - FEAS_SLACK {
                return bad("signal s' does not persuade believers".into());
            }
            let lhs = self.pi_sp1 * ml1;
            let rhs = self.pi_sp0 * (1.0 - ml1);
            let persuades_sceptics = if closure { lhs > rhs + FEAS_SLACK } else { lhs >= rhs };
            if persuades_sceptics {
                return bad("signal s' persuades sceptics".into());
            }
        }
        Ok(())
    }

    pub fn validate(&self, params: &ModelParams) -> Result<()> {
        self.check(params, false)
    }
}

/// Objective value with the induced empty-signal actions per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub actions: Vec<u8>,
}

/// Expected limit payoff of `s` on `table`, without feasibility checks.
pub fn evaluate(params: &ModelParams, table: &ExposureTable, s: &ReducedStrategy) -> Evaluation {
    let mut actions = Vec::with_capacity(table.cells.len());
    let (mut base, mut good, mut int) = (0.0, 0.0, 0.0);
    for c in &table.cells {
        let miss1 = 1.0 - s.pi_s1 * c.zeta - s.pi_sp1 * c.zeta_hat;
        let miss0 = 1.0 - s.pi_s0 * c.zeta - s.pi_sp0 * c.zeta_hat;
        let (a, _) = empty_signal_action(params.mu1(c.ty), miss1, miss0);
        let af = f64::from(a);
        base += c.weight * af;
        good += c.weight * (c.zeta + (1.0 - c.zeta) * af);
        let believer = f64::from(u8::from(c.ty == ReceiverType::H));
        int += c.weight * (c.zeta_hat * believer + (1.0 - c.zeta_hat) * af);
        actions.push(a);
    }
    let v = |x: f64| params.payoff.value(x.clamp(0.0, 1.0));
    let (va, vb, vc) = (v(good), v(int), v(base));
    let ms1 = params.mu_s1;
    let value = ms1 * (s.pi_s1 * va + s.pi_sp1 * vb + (1.0 - s.pi_s1 - s.pi_sp1) * vc)
        + (1.0 - ms1) * (s.pi_s0 * va + s.pi_sp0 * vb + (1.0 - s.pi_s0 - s.pi_sp0) * vc);
    Evaluation { value, actions }
}

pub fn limit_payoff_network(
    params: &ModelParams,
    limits: &LimitStats,
    strategy: &ReducedStrategy,
) -> Result<f64> {
    strategy.validate(params)?;
    Ok(evaluate(params, &ExposureTable::network(params, limits), strategy).value)
}

/// Public-signal payoff for a Good signal with probabilities `pi_good` and an
/// Int signal with `pi_int`, each given as `(π(·|1), π(·|0))`.
pub fn limit_payoff_public(
    params: &ModelParams,
    pi_good: (f64, f64),
    pi_int: (f64, f64),
) -> Result<f64> {
    let s = ReducedStrategy::new(pi_good.0, pi_good.1, pi_int.0, pi_int.1);
    s.validate(params)?;
    Ok(evaluate(params, &ExposureTable::public(params), &s).value)
}

/// `max |v|` over `[0,1]`, used for truncation error bounds.
pub fn payoff_bound(params: &ModelParams) -> f64 {
    params.payoff.value(0.0).abs().max(params.payoff.value(1.0).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limits::{compute_limits, LimitOptions};
    use crate::model::PayoffFn;

    fn island(lambda: f64, q: f64) -> (ModelParams, LimitStats) {
        let p = ModelParams::island(0.5, lambda, q);
        let l = compute_limits(&p, &LimitOptions::default()).unwrap();
        (p, l)
    }

    #[test]
    fn silent_sender_gets_believer_share() {
        let (p, l) = island(1.4, 0.7);
        let v = limit_payoff_network(&p, &l, &ReducedStrategy::default()).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
        assert!((limit_payoff_public(&p, (0.0, 0.0), (0.0, 0.0)).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn no_exposure_means_priors() {
        let (p, l) = island(0.0, 1.0);
        let s = ReducedStrategy::new(0.9, 0.5, 0.1, 0.12);
        let v = limit_payoff_network(&p, &l, &s).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn public_equals_network_with_full_exposure() {
        let (p, _) = island(1.0, 1.0);
        let mut full = ExposureTable::public(&p);
        // Same population split into degree-like cells with ζ = ζ̂ = 1.
        full.cells = vec![
            Cell { weight: 0.2, ty: ReceiverType::H, d: Some(0), zeta: 1.0, zeta_hat: 1.0 },
            Cell { weight: 0.3, ty: ReceiverType::H, d: Some(1), zeta: 1.0, zeta_hat: 1.0 },
            Cell { weight: 0.5, ty: ReceiverType::L, d: Some(0), zeta: 1.0, zeta_hat: 1.0 },
        ];
        for s in [
            ReducedStrategy::new(1.0, 2.0 / 3.0, 0.0, 0.0),
            ReducedStrategy::new(0.4, 0.2, 0.3, 0.4),
            ReducedStrategy::new(0.0, 0.0, 0.5, 0.6),
        ] {
            let a = evaluate(&p, &ExposureTable::public(&p), &s).value;
            let b = evaluate(&p, &full, &s).value;
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn voting_public_closed_form() {
        let p = ModelParams::island(0.5, 1.0, 1.0).with_payoff(PayoffFn::Step { threshold: 0.52 });
        let v = limit_payoff_public(&p, (1.0, 0.4 / 0.6), (0.0, 0.0)).unwrap();
        assert!((v - (0.5 + 0.5 * 2.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn good_signal_hand_sum() {
        // Spreadsheet-style oracle: sum the cells by hand for one strategy.
        let (p, l) = island(1.6, 0.6);
        let s = ReducedStrategy::new(1.0, 0.4 / 0.6, 0.0, 0.0);
        let table = ExposureTable::network(&p, &l);
        let mut good = 0.0;
        let mut base = 0.0;
        for c in &table.cells {
            let m1 = 1.0 - c.zeta;
            let m0 = 1.0 - (0.4 / 0.6) * c.zeta;
            let prior = p.mu1(c.ty);
            let a = if m0 <= 0.0 || prior * m1 >= (1.0 - prior) * m0 - 1e-15 { 1.0 } else { 0.0 };
            good += c.weight * (c.zeta + (1.0 - c.zeta) * a);
            base += c.weight * a;
        }
        let expect = 0.5 * good + 0.5 * ((0.4 / 0.6) * good + (1.0 - 0.4 / 0.6) * base);
        let got = limit_payoff_network(&p, &l, &s).unwrap();
        assert!((got - expect).abs() < 1e-12);
    }

    #[test]
    fn class_checks() {
        let p = ModelParams::island(0.5, 1.0, 1.0);
        assert!(ReducedStrategy::new(0.5, 0.5, 0.0, 0.0).validate(&p).is_err());
        assert!(ReducedStrategy::new(0.0, 0.0, 0.5, 0.9).validate(&p).is_err());
        // Int signal exactly at the sceptic indifference is Good, not Int.
        assert!(ReducedStrategy::new(0.0, 0.0, 0.6, 0.4).validate(&p).is_err());
        assert!(ReducedStrategy::new(0.0, 0.0, 0.6, 0.4).check(&p, true).is_ok());
        assert!(ReducedStrategy::new(0.0, 0.0, 0.5, 0.5).validate(&p).is_ok());
        assert!(ReducedStrategy::new(0.7, 0.1, 0.4, 0.4).validate(&p).is_err());
    }

    #[test]
    fn int_term_monotone_in_believer_exposure() {
        let (p, l) = island(1.5, 0.5);
        let mut table = ExposureTable::network(&p, &l);
        let s = ReducedStrategy::new(0.0, 0.0, 1.0, 1.0);
        let before = evaluate(&p, &table, &s);
        for c in table.cells.iter_mut().filter(|c| c.ty == ReceiverType::H) {
            c.zeta_hat = (c.zeta_hat + 0.1).min(1.0);
        }
        let after = evaluate(&p, &table, &s);
        // Actions are unchanged for an uninformative Int signal.
        assert_eq!(before.actions, after.actions);
        assert!(after.value >= before.value);
    }
}
