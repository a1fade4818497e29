//! Seeding, spreading through persuaded receivers, equilibrium actions and
//! finite-n Monte Carlo payoffs.

use std::collections::VecDeque;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{believer_components, components, BelieverDecomposition, ComponentDecomposition};
use crate::limits::LimitStats;
use crate::model::{action, classify_signal, ModelParams, ReceiverType, SignalClass};
use crate::netgen::{sample_network, NetworkInstance};
use crate::rng::RngSpec;
use crate::stats::MeanEstimate;

const PROB_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedPolicy {
    /// One seed drawn uniformly from the giant component.
    OnL1,
    /// One seed drawn uniformly from the believer giant.
    OnLhat1,
    /// Up to `k` distinct uniform seeds, capped by the seed budget.
    UniformRandom(usize),
    None,
}

/// Who passes a signal on after observing it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SharingRule {
    /// Receivers share iff the signal persuades them to take action 1.
    #[default]
    Persuaded,
    /// Receivers share iff their action matches the state the signal makes
    /// likelier (`π(s|1) ≥ π(s|0)` counts as state 1).
    AgreeWithContent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalSpec {
    pub label: String,
    pub pi1: f64,
    pub pi0: f64,
    pub seeding: SeedPolicy,
}

impl SignalSpec {
    pub fn new(label: &str, pi1: f64, pi0: f64, seeding: SeedPolicy) -> Self {
        SignalSpec {
            label: label.to_string(),
            pi1,
            pi0,
            seeding,
        }
    }

    pub fn prob(&self, state: u8) -> f64 {
        if state == 1 {
            self.pi1
        } else {
            self.pi0
        }
    }
}

fn default_seed_exponent() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SenderStrategy {
    pub signals: Vec<SignalSpec>,
    #[serde(default = "default_seed_exponent")]
    pub seed_exponent: f64,
    #[serde(default)]
    pub sharing: SharingRule,
}

impl SenderStrategy {
    pub fn new(signals: Vec<SignalSpec>) -> Self {
        SenderStrategy {
            signals,
            seed_exponent: default_seed_exponent(),
            sharing: SharingRule::default(),
        }
    }

    /// Only the empty signal is ever sent.
    pub fn silent() -> Self {
        Self::new(Vec::new())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.seed_exponent > 0.0 && self.seed_exponent < 1.0) {
            return Err(Error::OutOfRange {
                what: "seed_exponent",
                value: self.seed_exponent,
                lo: 0.0,
                hi: 1.0,
            });
        }
        for (i, s) in self.signals.iter().enumerate() {
            if s.label.is_empty() || s.label == "empty" {
                return Err(Error::InfeasibleStrategy(format!(
                    "signal {i} needs a label other than 'empty'"
                )));
            }
            if self.signals[..i].iter().any(|o| o.label == s.label) {
                return Err(Error::InfeasibleStrategy(format!("duplicate label '{}'", s.label)));
            }
            for p in [s.pi1, s.pi0] {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InfeasibleStrategy(format!(
                        "signal '{}' has probability {p} outside [0,1]",
                        s.label
                    )));
                }
            }
        }
        for state in [1u8, 0] {
            let total: f64 = self.signals.iter().map(|s| s.prob(state)).sum();
            if total > 1.0 + PROB_SLACK {
                return Err(Error::InfeasibleStrategy(format!(
                    "signal probabilities in state {state} sum to {total} > 1"
                )));
            }
        }
        Ok(())
    }

    pub fn empty_prob(&self, state: u8) -> f64 {
        (1.0 - self.signals.iter().map(|s| s.prob(state)).sum::<f64>()).max(0.0)
    }

    /// `⌊n^α⌋`, at least one.
    pub fn seed_budget(&self, n: usize) -> usize {
        ((n as f64).powf(self.seed_exponent) + 1e-9).floor().max(1.0) as usize
    }
}

/// Class of each signal; signals never sent are reported as `Empty`.
pub fn signal_classes(strategy: &SenderStrategy, params: &ModelParams) -> Result<Vec<SignalClass>> {
    strategy
        .signals
        .iter()
        .map(|s| {
            if s.pi1 == 0.0 && s.pi0 == 0.0 {
                Ok(SignalClass::Empty)
            } else {
                classify_signal(params, s.pi1, s.pi0)
            }
        })
        .collect()
}

/// Per-signal `(a_h, a_l)`.
pub fn actions_on_signals(strategy: &SenderStrategy, params: &ModelParams) -> Result<Vec<(u8, u8)>> {
    Ok(signal_classes(strategy, params)?
        .into_iter()
        .map(SignalClass::actions)
        .collect())
}

/// Per-node decomposition data needed for seeding.
pub struct NetworkView {
    pub net: NetworkInstance,
    pub comps: ComponentDecomposition,
    pub believers: BelieverDecomposition,
}

impl NetworkView {
    pub fn new(net: NetworkInstance) -> Self {
        let comps = components(&net);
        let believers = believer_components(&net);
        NetworkView {
            net,
            comps,
            believers,
        }
    }
}

pub fn select_seeds<R: Rng>(
    view: &NetworkView,
    policy: SeedPolicy,
    budget: usize,
    rng: &mut R,
) -> Vec<u32> {
    let n = view.net.n();
    if n == 0 || budget == 0 {
        return Vec::new();
    }
    let pick_from = |members: Vec<u32>, rng: &mut R| -> Vec<u32> {
        if members.is_empty() {
            Vec::new()
        } else {
            vec![members[rng.random_range(0..members.len())]]
        }
    };
    match policy {
        SeedPolicy::OnL1 => {
            let giant = view.comps.giant_size();
            if (giant as f64) < 0.01 * n as f64 {
                log::debug!("no giant component (largest has {giant} of {n} nodes); seeding on the largest");
            }
            let members = (0..n as u32).filter(|&i| view.comps.in_giant(i as usize)).collect();
            pick_from(members, rng)
        }
        SeedPolicy::OnLhat1 => {
            let giant = view.believers.giant_size();
            if giant == 0 {
                log::debug!("no believers in the network; OnLhat1 seeds nobody");
                return Vec::new();
            }
            if (giant as f64) < 0.01 * n as f64 {
                log::debug!("no believer giant (largest has {giant} nodes); seeding on the largest");
            }
            let members = (0..n as u32)
                .filter(|&i| view.believers.in_giant(i as usize))
                .collect();
            pick_from(members, rng)
        }
        SeedPolicy::UniformRandom(k) => {
            let m = k.min(budget).min(n);
            let mut seeds: Vec<u32> = rand::seq::index::sample(rng, n, m)
                .into_iter()
                .map(|i| i as u32)
                .collect();
            seeds.sort_unstable();
            seeds
        }
        SeedPolicy::None => Vec::new(),
    }
}

/// Nodes that observe a signal planted at `seeds` when only `sharers` pass it on.
pub fn spread(net: &NetworkInstance, seeds: &[u32], sharers: impl Fn(usize) -> bool) -> Vec<bool> {
    let mut observed = vec![false; net.n()];
    let mut queue = VecDeque::new();
    for &s in seeds {
        if !observed[s as usize] {
            observed[s as usize] = true;
            queue.push_back(s as usize);
        }
    }
    while let Some(u) = queue.pop_front() {
        if !sharers(u) {
            continue;
        }
        for &v in net.neighbors(u) {
            let v = v as usize;
            if !observed[v] {
                observed[v] = true;
                queue.push_back(v);
            }
        }
    }
    observed
}

/// Whether a receiver of type `t` passes on signal `s`.
pub fn is_sharer(rule: SharingRule, signal: &SignalSpec, acts: (u8, u8), t: ReceiverType) -> bool {
    let a = match t {
        ReceiverType::H => acts.0,
        ReceiverType::L => acts.1,
    };
    match rule {
        SharingRule::Persuaded => a == 1,
        SharingRule::AgreeWithContent => a == u8::from(signal.pi1 >= signal.pi0),
    }
}

/// `P(observe s | s sent, t, d)` indexed `[signal][type][degree]`; degrees past
/// the table reuse its last entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationProbs {
    pub probs: Vec<[Vec<f64>; 2]>,
}

impl ObservationProbs {
    pub fn zeros(signals: usize, d_max: usize) -> Self {
        ObservationProbs {
            probs: vec![[vec![0.0; d_max + 1], vec![0.0; d_max + 1]]; signals],
        }
    }

    pub fn at(&self, s: usize, t: ReceiverType, d: usize) -> f64 {
        let row = &self.probs[s][t.index()];
        row.get(d).or(row.last()).copied().unwrap_or(0.0)
    }

    pub fn d_max(&self) -> usize {
        self.probs
            .iter()
            .flat_map(|p| p.iter().map(|r| r.len()))
            .max()
            .unwrap_or(1)
            .saturating_sub(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumActions {
    pub classes: Vec<SignalClass>,
    /// `(a_h, a_l)` per signal.
    pub signal: Vec<(u8, u8)>,
    /// `a(∅,t,d)` indexed `[type][degree]`; degrees past the table reuse the last entry.
    pub empty: [Vec<u8>; 2],
    /// Degrees where the empty signal has zero probability in state 0.
    pub undefined_ratio: Vec<(ReceiverType, usize)>,
}

impl EquilibriumActions {
    pub fn empty_action(&self, t: ReceiverType, d: usize) -> u8 {
        let row = &self.empty[t.index()];
        row.get(d).or(row.last()).copied().unwrap_or(0)
    }

    pub fn signal_action(&self, s: usize, t: ReceiverType) -> u8 {
        match t {
            ReceiverType::H => self.signal[s].0,
            ReceiverType::L => self.signal[s].1,
        }
    }
}

/// Action upon the empty signal from its likelihood ratio.
///
/// `miss1` and `miss0` are the probabilities of seeing nothing in each state.
/// A zero state-0 probability is resolved to action 1.
pub fn empty_signal_action(prior1: f64, miss1: f64, miss0: f64) -> (u8, bool) {
    let num = prior1 * miss1.max(0.0);
    let den = (1.0 - prior1) * miss0.max(0.0);
    if den <= 0.0 {
        return (1, true);
    }
    (action(num / (num + den)), false)
}

pub fn equilibrium(
    strategy: &SenderStrategy,
    params: &ModelParams,
    obs: &ObservationProbs,
) -> Result<EquilibriumActions> {
    strategy.validate()?;
    let classes = signal_classes(strategy, params)?;
    if obs.probs.len() != strategy.signals.len() {
        return Err(Error::InvalidParams(format!(
            "observation table has {} signals, strategy has {}",
            obs.probs.len(),
            strategy.signals.len()
        )));
    }
    let d_max = obs.d_max();
    let mut empty = [Vec::with_capacity(d_max + 1), Vec::with_capacity(d_max + 1)];
    let mut undefined_ratio = Vec::new();
    for t in ReceiverType::ALL {
        for d in 0..=d_max {
            let (mut miss1, mut miss0) = (1.0, 1.0);
            for (s, sig) in strategy.signals.iter().enumerate() {
                let p = obs.at(s, t, d);
                miss1 -= sig.pi1 * p;
                miss0 -= sig.pi0 * p;
            }
            let (a, undefined) = empty_signal_action(params.mu1(t), miss1, miss0);
            if undefined {
                log::debug!("empty signal never seen in state 0 by ({t}, d={d}); action set to 1");
                undefined_ratio.push((t, d));
            }
            empty[t.index()].push(a);
        }
    }
    Ok(EquilibriumActions {
        signal: classes.iter().map(|c| c.actions()).collect(),
        classes,
        empty,
        undefined_ratio,
    })
}

/// Observation counts indexed `[signal][type][degree]` with per-(type, degree)
/// node totals.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ObservationCounts {
    pub total: [Vec<u64>; 2],
    pub observed: Vec<[Vec<u64>; 2]>,
}

impl ObservationCounts {
    fn new(signals: usize) -> Self {
        ObservationCounts {
            total: [Vec::new(), Vec::new()],
            observed: vec![[Vec::new(), Vec::new()]; signals],
        }
    }

    fn bump(v: &mut Vec<u64>, d: usize, by: u64) {
        if v.len() <= d {
            v.resize(d + 1, 0);
        }
        v[d] += by;
    }

    fn record(&mut self, net: &NetworkInstance, observed: &[Vec<bool>]) {
        for i in 0..net.n() {
            let (t, d) = (net.node_type[i].index(), net.degree(i));
            Self::bump(&mut self.total[t], d, 1);
            for (s, obs) in observed.iter().enumerate() {
                Self::bump(&mut self.observed[s][t], d, u64::from(obs[i]));
            }
        }
    }

    pub fn merge(&mut self, other: &ObservationCounts) {
        for t in 0..2 {
            for (d, &c) in other.total[t].iter().enumerate() {
                Self::bump(&mut self.total[t], d, c);
            }
            for s in 0..self.observed.len() {
                for (d, &c) in other.observed[s][t].iter().enumerate() {
                    Self::bump(&mut self.observed[s][t], d, c);
                }
            }
        }
    }

    pub fn fraction(&self, s: usize, t: ReceiverType, d: usize) -> Option<f64> {
        let tot = *self.total[t.index()].get(d)?;
        (tot > 0).then(|| {
            self.observed[s][t.index()].get(d).copied().unwrap_or(0) as f64 / tot as f64
        })
    }

    /// Empirical observation probabilities; degrees without data borrow the
    /// nearest lower degree that has some.
    pub fn to_probs(&self) -> ObservationProbs {
        let d_max = self.total.iter().map(Vec::len).max().unwrap_or(1).max(1) - 1;
        let mut out = ObservationProbs::zeros(self.observed.len(), d_max);
        for s in 0..self.observed.len() {
            for t in ReceiverType::ALL {
                let mut last = 0.0;
                for d in 0..=d_max {
                    if let Some(f) = self.fraction(s, t, d) {
                        last = f;
                    }
                    out.probs[s][t.index()][d] = last;
                }
            }
        }
        out
    }
}

/// Spreads every signal of the strategy on one network (counterfactually, as
/// if each were the one sent). Seeds for signal `s` come from stream `("seeds", s)`.
pub fn spread_all(
    view: &NetworkView,
    strategy: &SenderStrategy,
    acts: &[(u8, u8)],
    rng: &RngSpec,
) -> Vec<Vec<bool>> {
    let budget = strategy.seed_budget(view.net.n());
    strategy
        .signals
        .iter()
        .enumerate()
        .map(|(s, sig)| {
            let mut r = rng.stream("seeds", s as u64);
            let seeds = select_seeds(view, sig.seeding, budget, &mut r);
            let net = &view.net;
            spread(net, &seeds, |i| is_sharer(strategy.sharing, sig, acts[s], net.node_type[i]))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationOptions {
    pub n: usize,
    pub reps: usize,
    pub pilot_reps: usize,
    pub edge_budget: u64,
}

/// One row of `sim.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRow {
    pub rep: usize,
    pub state: u8,
    pub signal: String,
    pub n_observed: usize,
    pub fraction_action1: f64,
    pub payoff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub payoff: MeanEstimate,
    pub rows: Vec<SimRow>,
    /// Observation probabilities receivers use, estimated on pilot networks.
    pub pilot_probs: ObservationProbs,
    pub equilibrium: EquilibriumActions,
    /// Counterfactual observation counts on the evaluation networks.
    pub observations: ObservationCounts,
}

fn pilot_counts(
    params: &ModelParams,
    strategy: &SenderStrategy,
    acts: &[(u8, u8)],
    opts: &SimulationOptions,
    rng: &RngSpec,
) -> Result<ObservationCounts> {
    let per_net: Vec<Result<ObservationCounts>> = (0..opts.pilot_reps as u64)
        .into_par_iter()
        .map(|p| {
            let spec = rng.derive("pilot", p);
            let view = NetworkView::new(sample_network(params, opts.n, &spec, opts.edge_budget)?);
            let observed = spread_all(&view, strategy, acts, &spec);
            let mut c = ObservationCounts::new(strategy.signals.len());
            c.record(&view.net, &observed);
            Ok(c)
        })
        .collect();
    let mut total = ObservationCounts::new(strategy.signals.len());
    for c in per_net {
        total.merge(&c?);
    }
    Ok(total)
}

fn draw_signal<R: Rng>(strategy: &SenderStrategy, state: u8, rng: &mut R) -> Option<usize> {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (s, sig) in strategy.signals.iter().enumerate() {
        acc += sig.prob(state);
        if u < acc {
            return Some(s);
        }
    }
    None
}

/// Finite-n Monte Carlo estimate of the sender's expected payoff.
///
/// Receivers' empty-signal beliefs use observation probabilities estimated on
/// `pilot_reps` networks drawn from streams disjoint from the evaluation ones.
pub fn simulate_payoff(
    params: &ModelParams,
    strategy: &SenderStrategy,
    opts: &SimulationOptions,
    rng: &RngSpec,
) -> Result<SimulationReport> {
    params.validate()?;
    strategy.validate()?;
    rng.validate()?;
    if opts.n < 2 || opts.reps == 0 {
        return Err(Error::InvalidParams(format!(
            "need n >= 2 and reps >= 1 (got n = {}, reps = {})",
            opts.n, opts.reps
        )));
    }
    let acts = actions_on_signals(strategy, params)?;
    let pilot = pilot_counts(params, strategy, &acts, opts, rng)?;
    let pilot_probs = pilot.to_probs();
    let eq = equilibrium(strategy, params, &pilot_probs)?;

    let outcomes: Vec<Result<(SimRow, ObservationCounts)>> = (0..opts.reps)
        .into_par_iter()
        .map(|rep| {
            let spec = rng.derive("eval", rep as u64);
            let view = NetworkView::new(sample_network(params, opts.n, &spec, opts.edge_budget)?);
            let observed = spread_all(&view, strategy, &acts, &spec);
            let mut counts = ObservationCounts::new(strategy.signals.len());
            counts.record(&view.net, &observed);

            let mut r = spec.stream("state", 0);
            let state = u8::from(r.random::<f64>() < params.mu_s1);
            let signal = draw_signal(strategy, state, &mut r);
            let net = &view.net;
            let mut ones = 0usize;
            for i in 0..net.n() {
                let t = net.node_type[i];
                let a = match signal {
                    Some(s) if observed[s][i] => eq.signal_action(s, t),
                    _ => eq.empty_action(t, net.degree(i)),
                };
                ones += a as usize;
            }
            let x = ones as f64 / net.n() as f64;
            let row = SimRow {
                rep,
                state,
                signal: signal.map_or_else(|| "empty".to_string(), |s| strategy.signals[s].label.clone()),
                n_observed: signal.map_or(0, |s| observed[s].iter().filter(|&&o| o).count()),
                fraction_action1: x,
                payoff: params.payoff.value(x),
            };
            Ok((row, counts))
        })
        .collect();

    let mut rows = Vec::with_capacity(opts.reps);
    let mut observations = ObservationCounts::new(strategy.signals.len());
    for o in outcomes {
        let (row, c) = o?;
        observations.merge(&c);
        rows.push(row);
    }
    let payoffs: Vec<f64> = rows.iter().map(|r| r.payoff).collect();
    Ok(SimulationReport {
        payoff: MeanEstimate::of(&payoffs),
        rows,
        pilot_probs,
        equilibrium: eq,
        observations,
    })
}

/// One row of `obsfrac.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObsFracRow {
    #[serde(rename = "type")]
    pub ty: ReceiverType,
    pub d: usize,
    pub signal: String,
    pub empirical_fraction: f64,
    /// Limit observation probability where one is known for this seeding.
    pub zeta_prediction: Option<f64>,
}

/// Limit probability that a `(t, d)` receiver observes a signal of `class`
/// seeded by `policy`, when the limit theory pins it down.
pub fn predicted_observation(
    class: SignalClass,
    policy: SeedPolicy,
    limits: &LimitStats,
    t: ReceiverType,
    d: usize,
) -> Option<f64> {
    match (class, policy) {
        (_, SeedPolicy::None) | (SignalClass::Bad | SignalClass::Empty, _) => Some(0.0),
        (SignalClass::Good, SeedPolicy::OnL1) => Some(limits.zeta(t, d)),
        (SignalClass::Good, SeedPolicy::OnLhat1) if limits.c_hat > 0.0 => Some(limits.zeta(t, d)),
        (SignalClass::Int, SeedPolicy::OnLhat1) if limits.c_hat > 0.0 => Some(limits.zeta_hat(t, d)),
        _ => None,
    }
}

pub fn obsfrac_rows(
    report: &SimulationReport,
    strategy: &SenderStrategy,
    limits: Option<&LimitStats>,
) -> Vec<ObsFracRow> {
    let mut rows = Vec::new();
    for (s, sig) in strategy.signals.iter().enumerate() {
        for t in ReceiverType::ALL {
            for d in 0..report.observations.total[t.index()].len() {
                if let Some(f) = report.observations.fraction(s, t, d) {
                    rows.push(ObsFracRow {
                        ty: t,
                        d,
                        signal: sig.label.clone(),
                        empirical_fraction: f,
                        zeta_prediction: limits.and_then(|l| {
                            predicted_observation(report.equilibrium.classes[s], sig.seeding, l, t, d)
                        }),
                    });
                }
            }
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use ReceiverType::{H, L};

    fn params() -> ModelParams {
        ModelParams::island(0.5, 1.0, 1.0)
    }

    fn path(types: Vec<ReceiverType>) -> NetworkInstance {
        let n = types.len();
        let edges: Vec<(u32, u32)> = (1..n as u32).map(|i| (i - 1, i)).collect();
        NetworkInstance::from_edges(types, vec![1.0; n], &edges).unwrap()
    }

    #[test]
    fn signal_actions() {
        let s = SenderStrategy::new(vec![
            SignalSpec::new("good", 1.0, 0.4 / 0.6, SeedPolicy::OnL1),
            SignalSpec::new("int", 0.0, 0.0, SeedPolicy::OnL1),
        ]);
        let a = actions_on_signals(&s, &params()).unwrap();
        assert_eq!(a[0], (1, 1));
        assert_eq!(a[1], (0, 0));

        let s = SenderStrategy::new(vec![
            SignalSpec::new("int", 0.3, 0.3, SeedPolicy::OnL1),
            SignalSpec::new("bad", 0.0, 0.3, SeedPolicy::OnL1),
        ]);
        let a = actions_on_signals(&s, &params()).unwrap();
        assert_eq!(a, vec![(1, 0), (0, 0)]);
    }

    #[test]
    fn validation() {
        let over = SenderStrategy::new(vec![
            SignalSpec::new("a", 0.7, 0.1, SeedPolicy::OnL1),
            SignalSpec::new("b", 0.4, 0.1, SeedPolicy::OnL1),
        ]);
        assert!(over.validate().is_err());
        let dup = SenderStrategy::new(vec![
            SignalSpec::new("a", 0.1, 0.1, SeedPolicy::OnL1),
            SignalSpec::new("a", 0.1, 0.1, SeedPolicy::OnL1),
        ]);
        assert!(dup.validate().is_err());
    }

    #[test]
    fn int_signal_spread_on_paths() {
        let acts = (1u8, 0u8);
        let sig = SignalSpec::new("int", 0.5, 0.5, SeedPolicy::OnL1);
        let net = path(vec![H, H, L]);
        let obs = spread(&net, &[0], |i| is_sharer(SharingRule::Persuaded, &sig, acts, net.node_type[i]));
        assert_eq!(obs, vec![true, true, true]);

        let net = path(vec![H, L, H]);
        let obs = spread(&net, &[0], |i| is_sharer(SharingRule::Persuaded, &sig, acts, net.node_type[i]));
        assert_eq!(obs, vec![true, true, false]);
    }

    #[test]
    fn seed_budget_arithmetic() {
        let s = SenderStrategy::new(vec![SignalSpec::new("a", 1.0, 1.0, SeedPolicy::UniformRandom(5))]);
        assert_eq!(s.seed_budget(16), 4);
        let net = path(vec![H; 16]);
        let view = NetworkView::new(net);
        let seeds = select_seeds(&view, SeedPolicy::UniformRandom(5), 4, &mut RngSpec::new(1).stream("s", 0));
        assert_eq!(seeds.len(), 4);
        assert!(seeds.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn seeding_policies() {
        let view = NetworkView::new(path(vec![L, L, L]));
        let mut r = RngSpec::new(2).stream("s", 0);
        assert!(select_seeds(&view, SeedPolicy::OnLhat1, 1, &mut r).is_empty());
        assert!(select_seeds(&view, SeedPolicy::None, 1, &mut r).is_empty());
        let a = select_seeds(&view, SeedPolicy::OnL1, 1, &mut RngSpec::new(2).stream("s", 0));
        let b = select_seeds(&view, SeedPolicy::OnL1, 1, &mut RngSpec::new(2).stream("s", 0));
        assert_eq!(a.len(), 1);
        assert_eq!(a, b);
    }

    #[test]
    fn silent_sender_equilibrium() {
        let eq = equilibrium(&SenderStrategy::silent(), &params(), &ObservationProbs::zeros(0, 10)).unwrap();
        assert!(eq.empty[0].iter().all(|&a| a == 1));
        assert!(eq.empty[1].iter().all(|&a| a == 0));

        let s = SenderStrategy::new(vec![
            SignalSpec::new("s", 0.0, 0.0, SeedPolicy::OnL1),
            SignalSpec::new("sp", 0.4, 0.2, SeedPolicy::OnLhat1),
        ]);
        let eq = equilibrium(&s, &params(), &ObservationProbs::zeros(2, 10)).unwrap();
        assert!(eq.empty[0].iter().all(|&a| a == 1));
        assert!(eq.empty[1].iter().all(|&a| a == 0));
    }

    #[test]
    fn empty_signal_never_sent_in_state_zero() {
        assert_eq!(empty_signal_action(0.4, 0.5, 0.0), (1, true));
        assert_eq!(empty_signal_action(0.4, 1.0, 1.0), (0, false));
    }

    #[test]
    fn agree_with_content_rule() {
        let up = SignalSpec::new("up", 0.6, 0.3, SeedPolicy::OnL1);
        let down = SignalSpec::new("down", 0.3, 0.4, SeedPolicy::OnL1);
        assert!(is_sharer(SharingRule::AgreeWithContent, &up, (1, 0), H));
        assert!(!is_sharer(SharingRule::AgreeWithContent, &up, (1, 0), L));
        assert!(!is_sharer(SharingRule::AgreeWithContent, &down, (1, 0), H));
        assert!(is_sharer(SharingRule::AgreeWithContent, &down, (1, 0), L));
    }

    #[test]
    fn silent_sender_payoff_is_believer_share() {
        let p = ModelParams::island(0.4, 1.2, 0.8);
        let opts = SimulationOptions {
            n: 400,
            reps: 3,
            pilot_reps: 2,
            edge_budget: 1_000_000,
        };
        let rep = simulate_payoff(&p, &SenderStrategy::silent(), &opts, &RngSpec::new(5)).unwrap();
        for (i, row) in rep.rows.iter().enumerate() {
            let net = sample_network(&p, 400, &RngSpec::new(5).derive("eval", i as u64), 1_000_000).unwrap();
            let h = net.node_type.iter().filter(|&&t| t == H).count();
            assert_eq!(row.fraction_action1, h as f64 / 400.0);
            assert_eq!(row.signal, "empty");
        }
    }

    #[test]
    fn simulation_is_thread_independent() {
        let p = ModelParams::island(0.5, 1.6, 0.7);
        let s = SenderStrategy::new(vec![
            SignalSpec::new("s", 0.5, 0.2, SeedPolicy::OnL1),
            SignalSpec::new("sp", 0.4, 0.5, SeedPolicy::OnLhat1),
        ]);
        let opts = SimulationOptions {
            n: 500,
            reps: 6,
            pilot_reps: 4,
            edge_budget: 1_000_000,
        };
        let run = |k| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .unwrap()
                .install(|| simulate_payoff(&p, &s, &opts, &RngSpec::new(12)).unwrap())
        };
        assert_eq!(run(1), run(3));
    }
}
