//! Desk-scale reproductions of the comparative results between network and
//! public signals.
//!
//! Each scenario checks its hypotheses first (failing with
//! [`Error::Hypothesis`]) and then evaluates its predicted inequality.

use log::info;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::diffusion::{simulate_payoff, SeedPolicy, SenderStrategy, SignalSpec, SimulationOptions};
use crate::error::{Error, Result};
use crate::limits::{compute_d_vote, compute_limits, expected_degree, Connectivity, DVote, LimitOptions, LimitStats};
use crate::model::{Connectedness, ModelParams, PayoffFn, ReceiverType};
use crate::optimizer::{
    limit_payoff_network, network_strategy, optimize_network, optimize_public, voting_public_value,
    Hypotheses, OptimizerOptions, ReducedStrategy,
};
use crate::rng::RngSpec;
use crate::stats::MeanEstimate;

const GAP_TOL: f64 = 1e-6;
const ORDER_TOL: f64 = 1e-10;

pub const SCENARIOS: [&str; 5] = ["baseline", "homophily", "sceptics", "crra", "voting"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloOptions {
    pub sim: SimulationOptions,
    pub rng: RngSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOptions {
    pub limits: LimitOptions,
    pub optimizer: OptimizerOptions,
    /// Finite-n cross-check of the scenario's explicit strategy, if any.
    pub monte_carlo: Option<MonteCarloOptions>,
    /// Scale `r > 1` of the Int signal in the CRRA construction.
    pub crra_r: f64,
    /// Values of `b` swept by the CRRA scenario, in decreasing order.
    pub crra_sweep: Vec<f64>,
}

impl Default for ScenarioOptions {
    fn default() -> Self {
        ScenarioOptions {
            limits: LimitOptions::default(),
            optimizer: OptimizerOptions::default(),
            monte_carlo: None,
            crra_r: 1.01,
            crra_sweep: vec![1.0, 0.5, 0.25, 0.1, 0.05, 0.02, 0.01, 0.005, 0.001],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloCheck {
    pub estimate: MeanEstimate,
    pub ci95: (f64, f64),
    /// Limit payoff the estimate is compared against.
    pub limit: f64,
    pub within_3se: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub scenario: String,
    pub hypotheses: Vec<Check>,
    pub network_value: f64,
    pub public_value: f64,
    /// `network_value - public_value`.
    pub margin: f64,
    pub monte_carlo: Option<MonteCarloCheck>,
    pub checks: Vec<Check>,
    pub verdict: bool,
    pub details: serde_json::Value,
    pub artifacts: Vec<String>,
}

fn finish(
    scenario: &str,
    hypotheses: Vec<Check>,
    network_value: f64,
    public_value: f64,
    monte_carlo: Option<MonteCarloCheck>,
    mut checks: Vec<Check>,
    details: serde_json::Value,
) -> ScenarioResult {
    if let Some(mc) = &monte_carlo {
        checks.push(Check::new(
            "monte_carlo_within_3se",
            mc.within_3se,
            format!("estimate {} ± {} vs limit {}", mc.estimate.mean, mc.estimate.se, mc.limit),
        ));
    }
    let verdict = checks.iter().all(|c| c.passed);
    info!("scenario {scenario}: verdict {}", if verdict { "pass" } else { "fail" });
    ScenarioResult {
        scenario: scenario.to_string(),
        hypotheses,
        network_value,
        public_value,
        margin: network_value - public_value,
        monte_carlo,
        checks,
        verdict,
        details,
        artifacts: Vec::new(),
    }
}

fn require(hypotheses: &[Check]) -> Result<()> {
    match hypotheses.iter().find(|h| !h.passed) {
        Some(h) => Err(Error::Hypothesis(format!("{}: {}", h.name, h.detail))),
        None => Ok(()),
    }
}

fn monte_carlo(
    params: &ModelParams,
    strategy: &SenderStrategy,
    limit: f64,
    opts: &ScenarioOptions,
) -> Result<Option<MonteCarloCheck>> {
    let Some(mc) = &opts.monte_carlo else {
        return Ok(None);
    };
    let report = simulate_payoff(params, strategy, &mc.sim, &mc.rng)?;
    let est = report.payoff;
    Ok(Some(MonteCarloCheck {
        estimate: est,
        ci95: est.ci95(),
        limit,
        within_3se: (est.mean - limit).abs() <= 3.0 * est.se,
    }))
}

fn max_type_gap(limits: &LimitStats, hat: bool, d_hi: usize) -> f64 {
    (0..=d_hi)
        .map(|d| {
            let (h, l) = if hat {
                (limits.zeta_hat(ReceiverType::H, d), limits.zeta_hat(ReceiverType::L, d))
            } else {
                (limits.zeta(ReceiverType::H, d), limits.zeta(ReceiverType::L, d))
            };
            (h - l).abs()
        })
        .fold(0.0, f64::max)
}

/// `λ ≡ √2`: kernel intensity 2.
pub fn baseline_params() -> ModelParams {
    ModelParams::island(0.5, 2f64.sqrt(), 1.0)
}

pub fn homophily_params() -> ModelParams {
    ModelParams::island(0.5, 3f64.sqrt(), 0.5)
}

pub fn sceptics_params() -> ModelParams {
    ModelParams {
        f_h: Connectedness::point(0.02),
        f_l: Connectedness::point(30.0),
        ..ModelParams::island(0.5, 1.0, 1.0)
    }
    .with_payoff(PayoffFn::CappedLinear { cap: 0.9 })
}

/// Few believers on a dense network: the believer giant reaches most sceptics,
/// and sceptics near `ζ̂ = 1/r` are persuaded by the empty signal.
pub fn crra_params(b: f64) -> ModelParams {
    ModelParams::island(0.05, 10.0, 1.0)
        .with_priors(0.55, 0.05, 0.05)
        .with_payoff(PayoffFn::Crra { b })
}

pub fn voting_params(threshold: f64) -> ModelParams {
    ModelParams::island(0.5, 3f64.sqrt(), 1.0).with_payoff(PayoffFn::Step { threshold })
}

pub fn default_params(name: &str) -> Result<ModelParams> {
    Ok(match name {
        "baseline" => baseline_params(),
        "homophily" => homophily_params(),
        "sceptics" => sceptics_params(),
        "crra" => crra_params(0.05),
        "voting" => voting_params(0.52),
        _ => return Err(unknown(name)),
    })
}

fn unknown(name: &str) -> Error {
    Error::Config(format!(
        "unknown scenario '{name}' (expected one of {})",
        SCENARIOS.join(", ")
    ))
}

pub fn run_scenario(name: &str, params: &ModelParams, opts: &ScenarioOptions) -> Result<ScenarioResult> {
    match name {
        "baseline" => scenario_baseline(params, opts),
        "homophily" => scenario_homophily(params, opts),
        "sceptics" => scenario_sceptics(params, opts),
        "crra" => scenario_crra(params, opts),
        "voting" => scenario_voting(params, opts),
        _ => Err(unknown(name)),
    }
}

pub fn scenario_baseline(params: &ModelParams, opts: &ScenarioOptions) -> Result<ScenarioResult> {
    params.validate()?;
    let hyps = vec![
        Check::new("same_connectedness", params.f_h == params.f_l, "f_h = f_l"),
        Check::new("no_homophily", params.q == 1.0, format!("q = {}", params.q)),
        Check::new("convex_payoff", params.payoff.is_convex(), params.payoff.name()),
    ];
    require(&hyps)?;
    let limits = compute_limits(params, &opts.limits)?;
    let public = optimize_public(params, &opts.optimizer)?;
    let network = optimize_network(params, &limits, &opts.optimizer)?;
    let d_hi = limits.d_max.min(30);
    let (gz, gzh) = (max_type_gap(&limits, false, d_hi), max_type_gap(&limits, true, d_hi));
    let checks = vec![
        Check::new(
            "network_le_public",
            network.value <= public.value + GAP_TOL,
            format!("network {} vs public {}", network.value, public.value),
        ),
        Check::new("zeta_equal_across_types", gz < ORDER_TOL, format!("max gap {gz:e}")),
        Check::new("zeta_hat_equal_across_types", gzh < ORDER_TOL, format!("max gap {gzh:e}")),
    ];
    let details = json!({ "network_argmax": network.argmax, "public_argmax": public.argmax, "c": limits.c, "c_hat": limits.c_hat });
    Ok(finish("baseline", hyps, network.value, public.value, None, checks, details))
}

pub fn scenario_homophily(params: &ModelParams, opts: &ScenarioOptions) -> Result<ScenarioResult> {
    params.validate()?;
    let limits = compute_limits(params, &opts.limits)?;
    let h = Hypotheses::of(params, &limits)?;
    let hyps = vec![
        Check::new(
            "believers_weakly_more_connected",
            matches!(h.connectivity, Connectivity::HMore | Connectivity::Equal),
            format!("{:?}", h.connectivity),
        ),
        Check::new(
            "homophily_order",
            h.homophily_order,
            format!("q_h = {}, 1 - q_l = {}", limits.q_h, 1.0 - limits.q_l),
        ),
        Check::new("convex_payoff", h.convex_payoff, params.payoff.name()),
    ];
    require(&hyps)?;
    let public = optimize_public(params, &opts.optimizer)?;
    let network = optimize_network(params, &limits, &opts.optimizer)?;
    let mut checks = vec![Check::new(
        "network_le_public",
        network.value <= public.value + GAP_TOL,
        format!("network {} vs public {}", network.value, public.value),
    )];
    if params.q < 1.0 && limits.c_hat > 0.0 {
        let d_hi = limits.d_max.min(20);
        let worst = (1..=d_hi)
            .map(|d| limits.zeta_hat(ReceiverType::H, d) - limits.zeta_hat(ReceiverType::L, d))
            .fold(f64::INFINITY, f64::min);
        checks.push(Check::new(
            "zeta_hat_strictly_ordered",
            worst > 0.0,
            format!("min over 1..={d_hi} of zeta_hat(h,d) - zeta_hat(l,d) = {worst:e}"),
        ));
    }
    let details = json!({ "network_argmax": network.argmax, "public_argmax": public.argmax, "c_hat": limits.c_hat, "q_h": limits.q_h, "q_l": limits.q_l });
    Ok(finish("homophily", hyps, network.value, public.value, None, checks, details))
}

/// The Good signal sent whenever sceptics can still be persuaded by it.
fn good_signal_strategy(params: &ModelParams) -> ReducedStrategy {
    ReducedStrategy::new(1.0, params.prior_odds(ReceiverType::L), 0.0, 0.0)
}

pub fn scenario_sceptics(params: &ModelParams, opts: &ScenarioOptions) -> Result<ScenarioResult> {
    params.validate()?;
    let x_bar = match params.payoff {
        PayoffFn::CappedLinear { cap } => cap,
        _ => {
            return Err(Error::Hypothesis(format!(
                "sceptics scenario needs a capped_linear payoff, got {}",
                params.payoff.name()
            )))
        }
    };
    let mean_deg = |t: ReceiverType| -> f64 {
        params
            .connectedness(t)
            .atoms()
            .iter()
            .map(|a| a.prob * expected_degree(params, t, a.lambda))
            .sum()
    };
    let (dh, dl) = (mean_deg(ReceiverType::H), mean_deg(ReceiverType::L));
    let (gh, gl) = (params.gamma_h, 1.0 - params.gamma_h);
    let el_bound = (x_bar / gl - gh / (gl * gl * x_bar)).max(0.0).sqrt();
    let el = params.f_l.mean();
    let hyps = vec![
        Check::new("believer_degree_below_bound", dh < 1.0 / x_bar, format!("{dh} < {}", 1.0 / x_bar)),
        Check::new("sceptic_connectedness_above_bound", el > el_bound, format!("{el} > {el_bound}")),
        Check::new("sceptics_better_connected", dl > dh, format!("{dl} > {dh}")),
    ];
    require(&hyps)?;
    let limits = compute_limits(params, &opts.limits)?;
    let strategy = good_signal_strategy(params);
    let network = limit_payoff_network(params, &limits, &strategy)?;
    let public = optimize_public(params, &opts.optimizer)?;

    // Sceptics on the giant plus isolated believers always act as the proof requires.
    let n_l = gl
        * params
            .f_l
            .atoms()
            .iter()
            .map(|a| a.prob * limits.rho.get(ReceiverType::L, a.lambda).unwrap_or(0.0))
            .sum::<f64>();
    let n_h0 = gh * limits.degree(ReceiverType::H).get(0);
    let v = |x: f64| params.payoff.value(x.clamp(0.0, 1.0));
    let odds = params.prior_odds(ReceiverType::L);
    let lower = params.mu_s1 * v(n_l + n_h0)
        + (1.0 - params.mu_s1) * (odds * v(n_l + n_h0) + (1.0 - odds) * v(n_h0));

    let mc = monte_carlo(params, &network_strategy(&strategy), network, opts)?;
    let checks = vec![
        Check::new(
            "network_beats_public",
            network > public.value,
            format!("network {network} vs public {}, margin {}", public.value, network - public.value),
        ),
        Check::new("lower_bound_respected", network >= lower - 1e-12, format!("{network} >= {lower}")),
    ];
    let details = json!({
        "strategy": strategy,
        "lower_bound": lower,
        "sceptic_giant_share": n_l,
        "isolated_believer_share": n_h0,
        "mean_degree_h": dh,
        "mean_degree_l": dl,
        "public_argmax": public.argmax,
    });
    Ok(finish("sceptics", hyps, network, public.value, mc, checks, details))
}

/// `κ = (H - 1) / (H - L)` with `H`, `L` the believer and sceptic prior odds.
pub fn crra_kappa(params: &ModelParams) -> f64 {
    let h = params.prior_odds(ReceiverType::H);
    let l = params.prior_odds(ReceiverType::L);
    (h - 1.0) / (h - l)
}

/// Int signal scaled by `r` from the believers' indifference frontier.
pub fn crra_strategy(params: &ModelParams, r: f64) -> Result<ReducedStrategy> {
    let k = crra_kappa(params);
    let p1 = r * (1.0 - k);
    let p0 = params.prior_odds(ReceiverType::H) * p1;
    if p0 > 1.0 {
        return Err(Error::Hypothesis(format!(
            "r = {r} makes pi(s'|0) = {p0} exceed 1"
        )));
    }
    Ok(ReducedStrategy::new(0.0, 0.0, p1, p0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrraPoint {
    pub b: f64,
    pub network: f64,
    pub public: f64,
}

pub fn scenario_crra(params: &ModelParams, opts: &ScenarioOptions) -> Result<ScenarioResult> {
    params.validate()?;
    let PayoffFn::Crra { b } = params.payoff else {
        return Err(Error::Hypothesis(format!(
            "crra scenario needs a crra payoff, got {}",
            params.payoff.name()
        )));
    };
    let limits = compute_limits(params, &opts.limits)?;
    let hyps = vec![Check::new(
        "c_hat_positive",
        limits.c_hat > 0.0,
        format!("c_hat = {}", limits.c_hat),
    )];
    require(&hyps)?;
    let strategy = crra_strategy(params, opts.crra_r)?;
    let point = |b: f64| -> Result<CrraPoint> {
        let p = params.clone().with_payoff(PayoffFn::Crra { b });
        Ok(CrraPoint {
            b,
            network: limit_payoff_network(&p, &limits, &strategy)?,
            public: optimize_public(&p, &opts.optimizer)?.value,
        })
    };
    let mut sweep = Vec::new();
    for &sb in &opts.crra_sweep {
        sweep.push(point(sb)?);
    }
    let b_star = sweep.iter().find(|p| p.network > p.public).map(|p| p.b);
    let at_b = point(b)?;
    let at_one = point(1.0)?;
    let optimum = optimize_network(params, &limits, &opts.optimizer)?;
    let checks = vec![
        Check::new(
            "network_beats_public_at_b",
            at_b.network > at_b.public,
            format!("b = {b}: network {} vs public {}", at_b.network, at_b.public),
        ),
        Check::new(
            "public_weakly_better_at_b1",
            at_one.network <= at_one.public + GAP_TOL,
            format!("b = 1: network {} vs public {}", at_one.network, at_one.public),
        ),
        Check::new(
            "threshold_found_in_sweep",
            b_star.is_some(),
            format!("first b with network > public: {b_star:?}"),
        ),
        Check::new(
            "optimum_dominates_construction",
            optimum.value >= at_b.network - 1e-12,
            format!("{} >= {}", optimum.value, at_b.network),
        ),
    ];
    let details = json!({
        "kappa": crra_kappa(params),
        "r": opts.crra_r,
        "strategy": strategy,
        "sweep": sweep,
        "b_star": b_star,
        "network_optimum": optimum.value,
        "network_optimum_argmax": optimum.argmax,
    });
    Ok(finish("crra", hyps, at_b.network, at_b.public, None, checks, details))
}

/// `Σ_{d ≥ from} γ_l p_d^l w(d)`, counting the truncated tail with weight `w(∞)`.
fn sceptic_tail_sum(params: &ModelParams, limits: &LimitStats, from: usize, w: impl Fn(usize) -> f64, w_inf: f64) -> f64 {
    let p = limits.degree(ReceiverType::L);
    let gl = params.gamma(ReceiverType::L);
    let body: f64 = (from..=limits.d_max).map(|d| p.get(d) * w(d)).sum();
    gl * (body + p.tail_mass * w_inf)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VotingConditions {
    pub d_vote: DVote,
    pub necessary_lhs: f64,
    pub sufficient_lhs: f64,
    pub rhs: f64,
    pub necessary: bool,
    pub sufficient: bool,
}

pub fn voting_conditions(params: &ModelParams, limits: &LimitStats, threshold: f64) -> VotingConditions {
    let d_vote = compute_d_vote(params, limits);
    let rhs = threshold - params.gamma_h;
    let (necessary_lhs, sufficient_lhs) = match d_vote {
        DVote::Finite(d) => (
            sceptic_tail_sum(params, limits, d, |_| 1.0, 1.0),
            sceptic_tail_sum(params, limits, d + 1, |k| 1.0 - limits.zeta_hat(ReceiverType::L, k), 0.0),
        ),
        DVote::Infinite => (0.0, 0.0),
    };
    VotingConditions {
        d_vote,
        necessary_lhs,
        sufficient_lhs,
        rhs,
        necessary: necessary_lhs >= rhs,
        sufficient: sufficient_lhs > rhs,
    }
}

/// Int signal at the believers' indifference, sent always in state 0.
pub fn voting_strategy(params: &ModelParams) -> ReducedStrategy {
    ReducedStrategy::new(0.0, 0.0, 1.0 / params.prior_odds(ReceiverType::H), 1.0)
}

pub fn scenario_voting(params: &ModelParams, opts: &ScenarioOptions) -> Result<ScenarioResult> {
    params.validate()?;
    let PayoffFn::Step { threshold } = params.payoff else {
        return Err(Error::Hypothesis(format!(
            "voting scenario needs a step payoff, got {}",
            params.payoff.name()
        )));
    };
    let hyps = vec![Check::new(
        "nontrivial_threshold",
        threshold > params.gamma_h,
        format!("threshold {threshold} vs gamma_h {}", params.gamma_h),
    )];
    require(&hyps)?;
    let limits = compute_limits(params, &opts.limits)?;
    let cond = voting_conditions(params, &limits, threshold);
    let v_pub = voting_public_value(params).expect("threshold above gamma_h");
    let public = optimize_public(params, &opts.optimizer)?;
    let strategy = voting_strategy(params);
    let construction = limit_payoff_network(params, &limits, &strategy)?;
    let mut checks = vec![Check::new(
        "public_matches_closed_form",
        (public.value - v_pub).abs() <= 1e-9,
        format!("{} vs {v_pub}", public.value),
    )];
    let mut network_value = construction;
    let mut mc = None;
    if cond.sufficient {
        checks.push(Check::new(
            "construction_attains_one",
            (construction - 1.0).abs() <= 1e-9,
            format!("{construction}"),
        ));
        checks.push(Check::new(
            "network_beats_public",
            construction > v_pub,
            format!("{construction} vs {v_pub}"),
        ));
        let s = SenderStrategy::new(vec![SignalSpec::new(
            "s",
            strategy.pi_sp1,
            strategy.pi_sp0,
            SeedPolicy::OnLhat1,
        )]);
        mc = monte_carlo(params, &s, construction, opts)?;
    }
    let needs_optimum = !cond.necessary || limits.c_hat == 0.0;
    let mut optimum = None;
    if needs_optimum {
        let r = optimize_network(params, &limits, &opts.optimizer)?;
        network_value = r.value;
        if !cond.necessary {
            checks.push(Check::new(
                "necessary_fails_public_preferred",
                r.value <= v_pub + GAP_TOL,
                format!("network {} vs public {v_pub}", r.value),
            ));
        }
        if limits.c_hat == 0.0 {
            checks.push(Check::new(
                "no_believer_giant_public_preferred",
                r.value <= v_pub + GAP_TOL,
                format!("network {} vs public {v_pub}", r.value),
            ));
        }
        optimum = Some(r);
    }
    // Contrapositive of the necessary condition.
    if network_value > v_pub + GAP_TOL {
        checks.push(Check::new(
            "necessary_holds_when_network_wins",
            cond.necessary,
            format!("{} >= {}", cond.necessary_lhs, cond.rhs),
        ));
    }
    let details = json!({
        "conditions": cond,
        "v_pub": v_pub,
        "strategy": strategy,
        "construction_value": construction,
        "network_optimum": optimum.as_ref().map(|r| r.value),
        "c_hat": limits.c_hat,
    });
    Ok(finish("voting", hyps, network_value, v_pub, mc, checks, details))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> ScenarioOptions {
        ScenarioOptions {
            optimizer: OptimizerOptions {
                grid_n: 41,
                refine_iters: 2,
                ..Default::default()
            },
            ..Default::default()
        }
    }

    #[test]
    fn kappa_example() {
        let p = ModelParams::island(0.5, 1.0, 1.0).with_priors(0.75, 0.25, 0.5);
        assert!((crra_kappa(&p) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn baseline_passes() {
        let r = scenario_baseline(&baseline_params(), &quick()).unwrap();
        assert!(r.verdict, "{:?}", r.checks);
        let deg = ModelParams::island(0.5, 0.0, 1.0);
        let r = scenario_baseline(&deg, &quick()).unwrap();
        assert!(r.verdict);
        assert!((r.network_value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn baseline_rejects_homophily() {
        let p = ModelParams::island(0.5, 1.5, 0.5);
        assert!(matches!(scenario_baseline(&p, &quick()), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn homophily_passes() {
        for q in [0.5, 0.9, 1.0] {
            let p = ModelParams::island(0.5, 3f64.sqrt(), q);
            let r = scenario_homophily(&p, &quick()).unwrap();
            assert!(r.verdict, "q = {q}: {:?}", r.checks);
        }
    }

    #[test]
    fn voting_sufficient_config() {
        let r = scenario_voting(&voting_params(0.52), &quick()).unwrap();
        assert!(r.verdict, "{:?}", r.checks);
        assert_eq!(r.network_value, 1.0);
        assert!((r.public_value - 0.8333333333333334).abs() < 1e-15);
    }

    #[test]
    fn voting_rejects_trivial_threshold() {
        assert!(matches!(
            scenario_voting(&voting_params(0.4), &quick()),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn crra_strategy_is_int() {
        let p = crra_params(0.05);
        let s = crra_strategy(&p, 1.01).unwrap();
        assert!(s.validate(&p).is_ok() || s.check(&p, true).is_ok());
    }
}
