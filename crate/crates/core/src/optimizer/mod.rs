//! Limit payoffs of two-signal sender strategies and their optimization,
//! for network and public signals.

mod objective;
mod search;

use log::{debug, warn};
use serde::{Deserialize, Serialize};

pub use objective::{
    evaluate, limit_payoff_network, limit_payoff_public, payoff_bound, Cell, Evaluation,
    ExposureTable, ReducedStrategy,
};

use crate::diffusion::{empty_signal_action, SeedPolicy, SenderStrategy, SignalSpec};
use crate::error::{Error, Result};
use crate::limits::{
    check_condition_a1, compute_limits, ConditionA1, Connectivity, LimitOptions, LimitStats,
};
use crate::model::{ModelParams, PayoffFn, ReceiverType};
use crate::stats::MeanEstimate;
use search::{best_of, Candidate, Problem, SearchStats, Space};

const NESTING_TOL: f64 = 1e-9;
const CLOSED_FORM_TOL: f64 = 1e-9;
const BOUNDARY_TOL: f64 = 1e-9;
const COMPARE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerOptions {
    /// Grid points per axis for the two-parameter restricted search.
    pub grid_n: usize,
    pub refine_iters: usize,
    /// Vertex enumeration of the four-parameter region runs only below this
    /// many distinct hyperplanes.
    #[serde(default = "default_vertex_cap")]
    pub vertex_plane_cap: usize,
}

fn default_vertex_cap() -> usize {
    64
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions {
            grid_n: 201,
            refine_iters: 3,
            vertex_plane_cap: default_vertex_cap(),
        }
    }
}

impl OptimizerOptions {
    /// Per-axis points of the four-parameter grid, about `grid_n²` in total.
    fn full_grid_n(&self) -> usize {
        ((self.grid_n as f64).sqrt().round() as usize).max(3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Network,
    Public,
}

/// Empty-signal actions per degree; the public regime has one entry per type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmptyActions {
    pub h: Vec<u8>,
    pub l: Vec<u8>,
}

impl EmptyActions {
    pub fn of(&self, t: ReceiverType) -> &[u8] {
        match t {
            ReceiverType::H => &self.h,
            ReceiverType::L => &self.l,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffReport {
    pub regime: Regime,
    pub value: f64,
    pub argmax: ReducedStrategy,
    /// The maximiser sits on the Int signal's sceptic-indifference boundary,
    /// so the value is a supremum approached from inside the class.
    pub on_open_boundary: bool,
    /// Best value on the restricted two-parameter family.
    pub restricted_value: f64,
    /// Best value over the full four-parameter region.
    pub full_value: f64,
    /// `full_value - restricted_value`.
    pub gap: f64,
    /// Every vertex of the four-parameter arrangement was evaluated.
    pub exhaustive: bool,
    pub empty_actions: EmptyActions,
    /// Payoff error from degree cells folded out of the objective.
    pub tail_error_bound: f64,
    pub condition_a1: Option<ConditionA1>,
    pub flags: Vec<String>,
    pub monte_carlo: Option<MeanEstimate>,
    pub evaluations: usize,
}

/// Network strategy for a reduced strategy: the Good signal seeded on the
/// giant, the Int signal on the believer giant. Unsent signals are dropped.
pub fn network_strategy(s: &ReducedStrategy) -> SenderStrategy {
    let mut signals = Vec::new();
    if s.pi_s1 > 0.0 || s.pi_s0 > 0.0 {
        signals.push(SignalSpec::new("s", s.pi_s1, s.pi_s0, SeedPolicy::OnL1));
    }
    if s.pi_sp1 > 0.0 || s.pi_sp0 > 0.0 {
        signals.push(SignalSpec::new("s_prime", s.pi_sp1, s.pi_sp0, SeedPolicy::OnLhat1));
    }
    SenderStrategy::new(signals)
}

fn empty_actions_network(params: &ModelParams, limits: &LimitStats, s: &ReducedStrategy) -> EmptyActions {
    let row = |t: ReceiverType| -> Vec<u8> {
        (0..=limits.d_max)
            .map(|d| {
                let (z, zh) = (limits.zeta(t, d), limits.zeta_hat(t, d));
                let miss1 = 1.0 - s.pi_s1 * z - s.pi_sp1 * zh;
                let miss0 = 1.0 - s.pi_s0 * z - s.pi_sp0 * zh;
                empty_signal_action(params.mu1(t), miss1, miss0).0
            })
            .collect()
    };
    EmptyActions {
        h: row(ReceiverType::H),
        l: row(ReceiverType::L),
    }
}

fn empty_actions_public(params: &ModelParams, s: &ReducedStrategy) -> EmptyActions {
    let act = |t: ReceiverType| {
        let miss1 = 1.0 - s.pi_s1 - s.pi_sp1;
        let miss0 = 1.0 - s.pi_s0 - s.pi_sp0;
        vec![empty_signal_action(params.mu1(t), miss1, miss0).0]
    };
    EmptyActions {
        h: act(ReceiverType::H),
        l: act(ReceiverType::L),
    }
}

fn on_open_boundary(params: &ModelParams, s: &ReducedStrategy) -> bool {
    let sent = s.pi_sp1 > 0.0 || s.pi_sp0 > 0.0;
    sent && (s.pi_sp1 * params.mu_l1 - s.pi_sp0 * (1.0 - params.mu_l1)).abs() <= BOUNDARY_TOL
}

struct SearchOutcome {
    restricted: Candidate,
    full: Candidate,
    stats: SearchStats,
}

fn search(params: &ModelParams, table: &ExposureTable, opts: &OptimizerOptions) -> SearchOutcome {
    let l = params.prior_odds(ReceiverType::L);
    let h = params.prior_odds(ReceiverType::H);
    let mut stats = SearchStats::default();

    let mut restricted = Vec::new();
    for space in [Space::restricted_frontier(l, h), Space::restricted_budget(l)] {
        let prob = Problem::new(params, table, space);
        let mut local = Vec::new();
        local.extend(prob.vertices(&mut stats));
        local.extend(prob.grid(&[0.0, 0.0], &[1.0, 1.0], opts.grid_n, &mut stats));
        local.extend(prob.manifold(opts.grid_n, &mut stats));
        if let Some(best) = best_of(local.iter().copied()) {
            if let Some(theta) = prob.theta_of(&best.x) {
                local.extend(prob.refine(theta, opts.grid_n, opts.refine_iters, &mut stats));
            }
        }
        restricted.extend(local);
    }
    let restricted = best_of(restricted).unwrap_or_else(|| {
        // The silent strategy lies on both pieces.
        Problem::new(params, table, Space::full()).eval_x([0.0; 4])
    });

    let full_prob = Problem::new(params, table, Space::full());
    stats.planes = full_prob.plane_count();
    let mut full = vec![full_prob.eval_x(restricted.x)];
    if full_prob.plane_count() <= opts.vertex_plane_cap {
        full.extend(full_prob.vertices(&mut stats));
        stats.exhaustive = true;
    } else {
        debug!(
            "skipping vertex scan over {} hyperplanes (cap {})",
            full_prob.plane_count(),
            opts.vertex_plane_cap
        );
    }
    let g4 = opts.full_grid_n();
    full.extend(full_prob.grid(&[0.0; 4], &[1.0; 4], g4, &mut stats));
    full.extend(full_prob.manifold(g4, &mut stats));
    if let Some(best) = best_of(full.iter().copied()) {
        full.extend(full_prob.refine(best.x.to_vec(), g4, opts.refine_iters, &mut stats));
    }
    let full = best_of(full).expect("seeded with the restricted optimum");
    SearchOutcome {
        restricted,
        full,
        stats,
    }
}

fn build_report(
    regime: Regime,
    params: &ModelParams,
    table: &ExposureTable,
    out: SearchOutcome,
) -> Result<PayoffReport> {
    let gap = out.full.value - out.restricted.value;
    if gap < -NESTING_TOL {
        return Err(Error::Assertion(format!(
            "full-region optimum {} below restricted optimum {}",
            out.full.value, out.restricted.value
        )));
    }
    let floor = params.payoff.value(params.gamma_h);
    if out.full.value < floor - NESTING_TOL {
        return Err(Error::Assertion(format!(
            "optimum {} below the silent payoff {floor}",
            out.full.value
        )));
    }
    let argmax = ReducedStrategy::from_array(out.full.x);
    let mut flags = Vec::new();
    if !out.stats.exhaustive {
        flags.push("vertex_scan_skipped".to_string());
    }
    if gap > NESTING_TOL {
        flags.push("restricted_family_suboptimal".to_string());
    }
    let on_boundary = on_open_boundary(params, &argmax);
    if on_boundary {
        flags.push("supremum_on_open_boundary".to_string());
    }
    Ok(PayoffReport {
        regime,
        value: out.full.value,
        argmax,
        on_open_boundary: on_boundary,
        restricted_value: out.restricted.value,
        full_value: out.full.value,
        gap,
        exhaustive: out.stats.exhaustive,
        empty_actions: EmptyActions { h: Vec::new(), l: Vec::new() },
        tail_error_bound: table.dropped_mass * payoff_bound(params),
        condition_a1: None,
        flags,
        monte_carlo: None,
        evaluations: out.stats.evaluations,
    })
}

pub fn optimize_network(
    params: &ModelParams,
    limits: &LimitStats,
    opts: &OptimizerOptions,
) -> Result<PayoffReport> {
    params.validate()?;
    let a1 = check_condition_a1(params, limits, limits.d_max);
    if !a1.holds {
        warn!(
            "condition A1 fails at sceptic degrees {:?}; the limit payoff may not be attainable",
            a1.offending
        );
    }
    let table = ExposureTable::network(params, limits);
    let out = search(params, &table, opts);
    let mut report = build_report(Regime::Network, params, &table, out)?;
    report.empty_actions = empty_actions_network(params, limits, &report.argmax);
    if !a1.holds {
        report.flags.push("condition_a1_violated".to_string());
    }
    report.condition_a1 = Some(a1);
    Ok(report)
}

/// Optimal public-signal payoff for a step payoff: a Good signal sent with
/// certainty in state 1 and as often as sceptics allow in state 0.
pub fn voting_public_value(params: &ModelParams) -> Option<f64> {
    match params.payoff {
        PayoffFn::Step { threshold } if threshold > params.gamma_h => {
            Some(params.mu_s1 + (1.0 - params.mu_s1) * params.prior_odds(ReceiverType::L))
        }
        _ => None,
    }
}

pub fn optimize_public(params: &ModelParams, opts: &OptimizerOptions) -> Result<PayoffReport> {
    params.validate()?;
    let table = ExposureTable::public(params);
    let out = search(params, &table, opts);
    let mut report = build_report(Regime::Public, params, &table, out)?;
    report.empty_actions = empty_actions_public(params, &report.argmax);
    if let Some(closed) = voting_public_value(params) {
        if (report.value - closed).abs() > CLOSED_FORM_TOL {
            return Err(Error::Assertion(format!(
                "public search found {} but the voting closed form is {closed}",
                report.value
            )));
        }
        report.value = closed;
        report.full_value = closed;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypotheses {
    /// Same connectedness law for both types and no homophily.
    pub baseline: bool,
    pub connectivity: Connectivity,
    /// `q_h ≥ 1 - q_l > 0`.
    pub homophily_order: bool,
    pub c_hat_positive: bool,
    pub convex_payoff: bool,
    /// Step payoff with threshold above the believer share.
    pub voting: bool,
}

impl Hypotheses {
    pub fn of(params: &ModelParams, limits: &LimitStats) -> Result<Self> {
        let connectivity = limits.connectivity()?;
        let one_minus = 1.0 - limits.q_l;
        Ok(Hypotheses {
            baseline: params.f_h == params.f_l && params.q == 1.0,
            connectivity,
            homophily_order: limits.q_h >= one_minus - 1e-12 && one_minus > 0.0,
            c_hat_positive: limits.c_hat > 0.0,
            convex_payoff: params.payoff.is_convex(),
            voting: voting_public_value(params).is_some(),
        })
    }

    /// Which result predicts the sign of the payoff gap, if any.
    pub fn applicable(&self) -> Option<&'static str> {
        let weakly_more = matches!(self.connectivity, Connectivity::HMore | Connectivity::Equal);
        if self.baseline && self.convex_payoff {
            Some("baseline")
        } else if weakly_more && self.homophily_order && self.convex_payoff {
            Some("homophily")
        } else if self.voting && !self.c_hat_positive {
            Some("voting_no_believer_giant")
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub hypotheses: Hypotheses,
    pub applicable: Option<String>,
    /// Predicted sign of `network - public`, when a result applies.
    pub prediction: Option<String>,
    pub public_value: f64,
    pub network_value: f64,
    /// `network_value - public_value`.
    pub gap: f64,
    /// Whether the prediction held within tolerance.
    pub verdict: Option<bool>,
    pub public: PayoffReport,
    pub network: PayoffReport,
}

pub fn compare_with_limits(
    params: &ModelParams,
    limits: &LimitStats,
    opts: &OptimizerOptions,
) -> Result<CompareReport> {
    let hypotheses = Hypotheses::of(params, limits)?;
    let public = optimize_public(params, opts)?;
    let network = optimize_network(params, limits, opts)?;
    let gap = network.value - public.value;
    let applicable = hypotheses.applicable();
    let (prediction, verdict) = match applicable {
        Some(_) => (
            Some("public_weakly_preferred".to_string()),
            Some(gap <= COMPARE_TOL),
        ),
        None => (None, None),
    };
    Ok(CompareReport {
        applicable: applicable.map(str::to_string),
        hypotheses,
        prediction,
        public_value: public.value,
        network_value: network.value,
        gap,
        verdict,
        public,
        network,
    })
}

pub fn compare(
    params: &ModelParams,
    limit_opts: &LimitOptions,
    opts: &OptimizerOptions,
) -> Result<CompareReport> {
    let limits = compute_limits(params, limit_opts)?;
    compare_with_limits(params, &limits, opts)
}
