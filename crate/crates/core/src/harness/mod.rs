//! Config-driven commands that write reproducible CSV/JSON artifacts.

mod config;

use std::path::{Path, PathBuf};

use log::info;
use serde::{Deserialize, Serialize};

pub use config::{EngineConfig, RunConfig, ScenarioConfig};

use crate::diffusion::{obsfrac_rows, simulate_payoff, spread, SenderStrategy};
use crate::error::{Error, Result};
use crate::limits::{compute_limits, limit_rows, summarize, LimitSummary};
use crate::model::{ModelParams, PayoffFn, ReceiverType};
use crate::netgen::{empirical_stats, sample_network, EmpiricalStats, NetworkInstance};
use crate::optimizer::{
    compare_with_limits, network_strategy, optimize_network, optimize_public, CompareReport,
    OptimizerOptions, PayoffReport,
};
use crate::scenarios::{self, Check, ScenarioResult, SCENARIOS};
use crate::stats::MeanEstimate;

pub const RESOLVED_CONFIG: &str = "config.resolved.json";

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn prepare(cfg: &RunConfig, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_json(&dir.join(RESOLVED_CONFIG), cfg)
}

pub fn cmd_limits(cfg: &RunConfig, dir: &Path) -> Result<LimitSummary> {
    prepare(cfg, dir)?;
    let stats = compute_limits(&cfg.model, &cfg.limit_options())?;
    let summary = summarize(&cfg.model, &stats)?;
    write_csv(&dir.join("limits.csv"), &limit_rows(&stats))?;
    write_json(&dir.join("limits.json"), &summary)?;
    Ok(summary)
}

pub fn cmd_sample(cfg: &RunConfig, dir: &Path) -> Result<EmpiricalStats> {
    prepare(cfg, dir)?;
    let net = sample_network(
        &cfg.model,
        cfg.engine.n,
        &cfg.rng().derive("sample", 0),
        cfg.engine.edge_budget,
    )?;
    net.write_edges(&dir.join("network.edges"))?;
    net.write_nodes(&dir.join("network.nodes"))?;
    let stats = empirical_stats(&net);
    write_json(&dir.join("sample.json"), &stats)?;
    Ok(stats)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub payoff: MeanEstimate,
    pub ci95: (f64, f64),
    pub strategy: SenderStrategy,
}

pub fn cmd_simulate(cfg: &RunConfig, dir: &Path) -> Result<SimulationSummary> {
    let strategy = cfg
        .sender_strategy()
        .ok_or_else(|| Error::Config("simulate needs a 'strategy' section".into()))?;
    prepare(cfg, dir)?;
    let report = simulate_payoff(&cfg.model, &strategy, &cfg.simulation_options(), &cfg.rng())?;
    let limits = compute_limits(&cfg.model, &cfg.limit_options()).ok();
    write_csv(&dir.join("sim.csv"), &report.rows)?;
    write_csv(
        &dir.join("obsfrac.csv"),
        &obsfrac_rows(&report, &strategy, limits.as_ref()),
    )?;
    let summary = SimulationSummary {
        payoff: report.payoff,
        ci95: report.payoff.ci95(),
        strategy,
    };
    write_json(&dir.join("simulate.json"), &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizeTarget {
    Public,
    Network,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimumFile {
    pub public: Option<PayoffReport>,
    pub network: Option<PayoffReport>,
}

pub fn cmd_optimize(
    cfg: &RunConfig,
    dir: &Path,
    target: OptimizeTarget,
    monte_carlo: bool,
) -> Result<OptimumFile> {
    prepare(cfg, dir)?;
    let opts = cfg.optimizer_options();
    let public = match target {
        OptimizeTarget::Network => None,
        _ => Some(optimize_public(&cfg.model, &opts)?),
    };
    let network = match target {
        OptimizeTarget::Public => None,
        _ => {
            let limits = compute_limits(&cfg.model, &cfg.limit_options())?;
            let mut r = optimize_network(&cfg.model, &limits, &opts)?;
            if monte_carlo {
                let mut s = network_strategy(&r.argmax);
                s.seed_exponent = cfg.engine.seed_exponent;
                let sim = simulate_payoff(&cfg.model, &s, &cfg.simulation_options(), &cfg.rng())?;
                r.monte_carlo = Some(sim.payoff);
            }
            Some(r)
        }
    };
    let out = OptimumFile { public, network };
    write_json(&dir.join("optimum.json"), &out)?;
    Ok(out)
}

pub fn cmd_compare(cfg: &RunConfig, dir: &Path) -> Result<CompareReport> {
    prepare(cfg, dir)?;
    let limits = compute_limits(&cfg.model, &cfg.limit_options())?;
    let report = compare_with_limits(&cfg.model, &limits, &cfg.optimizer_options())?;
    write_json(&dir.join("compare.json"), &report)?;
    Ok(report)
}

/// One row of `report.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub scenario: String,
    pub verdict: String,
    pub network_value: f64,
    pub public_value: f64,
    pub margin: f64,
    pub mc_mean: Option<f64>,
    pub mc_se: Option<f64>,
}

impl From<&ScenarioResult> for ReportRow {
    fn from(r: &ScenarioResult) -> Self {
        ReportRow {
            scenario: r.scenario.clone(),
            verdict: if r.verdict { "pass" } else { "fail" }.to_string(),
            network_value: r.network_value,
            public_value: r.public_value,
            margin: r.margin,
            mc_mean: r.monte_carlo.as_ref().map(|m| m.estimate.mean),
            mc_se: r.monte_carlo.as_ref().map(|m| m.estimate.se),
        }
    }
}

pub fn scenario_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("scenario_{name}.json"))
}

/// Rebuilds `report.csv` from the scenario results present in `dir`.
pub fn write_report(dir: &Path) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    for name in SCENARIOS {
        let path = scenario_path(dir, name);
        if path.exists() {
            let r: ScenarioResult = serde_json::from_str(&std::fs::read_to_string(&path)?)?;
            rows.push(ReportRow::from(&r));
        }
    }
    write_csv(&dir.join("report.csv"), &rows)?;
    Ok(rows)
}

pub fn cmd_scenario(name: &str, cfg: &RunConfig, dir: &Path) -> Result<ScenarioResult> {
    std::fs::create_dir_all(dir)?;
    write_json(&dir.join(format!("config.{name}.resolved.json")), cfg)?;
    let mut result = scenarios::run_scenario(name, &cfg.model, &cfg.scenario_options())?;
    let path = scenario_path(dir, name);
    result.artifacts = vec![
        path.file_name().unwrap().to_string_lossy().into_owned(),
        "report.csv".to_string(),
    ];
    write_json(&path, &result)?;
    write_report(dir)?;
    Ok(result)
}

/// Config for a named scenario when none is supplied.
pub fn default_scenario_config(name: &str) -> Result<RunConfig> {
    Ok(RunConfig::new(scenarios::default_params(name)?))
}

/// Quick invariant suite; every check runs even if an earlier one fails.
pub fn cmd_selftest(dir: &Path) -> Result<Vec<Check>> {
    std::fs::create_dir_all(dir)?;
    let mut checks = Vec::new();
    let mut push = |name: &str, r: Result<(bool, String)>| {
        let (passed, detail) = r.unwrap_or_else(|e| (false, e.to_string()));
        info!("selftest {name}: {}", if passed { "pass" } else { "fail" });
        checks.push(Check {
            name: name.to_string(),
            passed,
            detail,
        });
    };
    let lim = crate::limits::LimitOptions::default();
    let quick = OptimizerOptions {
        grid_n: 41,
        refine_iters: 2,
        ..Default::default()
    };

    push("giant_fixed_point", (|| {
        let s = compute_limits(&ModelParams::island(0.5, 2f64.sqrt(), 1.0), &lim)?;
        let resid = (s.c - (1.0 - (-2.0 * s.c).exp())).abs();
        Ok((resid < 1e-10 && s.c > 0.79, format!("c = {}, residual {resid:e}", s.c)))
    })());

    push("exposure_ordering", (|| {
        let s = compute_limits(&ModelParams::island(0.5, 3f64.sqrt(), 0.5), &lim)?;
        let pointwise = (0..=s.d_max).all(|d| {
            ReceiverType::ALL.iter().all(|&t| {
                s.zeta_hat(t, d) <= s.zeta(t, d) + 1e-12
                    && (d == 0 || s.zeta(t, d) >= s.zeta(t, d - 1) - 1e-12)
            })
        });
        let ok = pointwise && (1..=20).all(|d| s.zeta_hat(ReceiverType::H, d) > s.zeta_hat(ReceiverType::L, d));
        Ok((ok, format!("d_max = {}", s.d_max)))
    })());

    push("public_voting_closed_form", (|| {
        let p = ModelParams::island(0.5, 1.0, 1.0).with_payoff(PayoffFn::Step { threshold: 0.52 });
        let r = optimize_public(&p, &quick)?;
        Ok(((r.value - 5.0 / 6.0).abs() < 1e-9, format!("{}", r.value)))
    })());

    push("spread_stops_at_non_sharers", (|| {
        let net = NetworkInstance::from_edges(
            vec![ReceiverType::H, ReceiverType::L, ReceiverType::H],
            vec![1.0; 3],
            &[(0, 1), (1, 2)],
        )?;
        let seen = spread(&net, &[0], |i| net.node_type[i] == ReceiverType::H);
        Ok((seen == vec![true, true, false], format!("{seen:?}")))
    })());

    push("sampling_is_deterministic", (|| {
        let p = ModelParams::island(0.5, 1.5, 0.7);
        let rng = crate::rng::RngSpec::new(7);
        let a = sample_network(&p, 2000, &rng, u64::MAX)?;
        let b = sample_network(&p, 2000, &rng, u64::MAX)?;
        Ok((a == b, format!("{} edges", a.edge_count())))
    })());

    for name in ["baseline", "voting"] {
        push(&format!("scenario_{name}"), (|| {
            let opts = scenarios::ScenarioOptions {
                optimizer: quick,
                ..Default::default()
            };
            let r = scenarios::run_scenario(name, &scenarios::default_params(name)?, &opts)?;
            Ok((r.verdict, format!("network {} vs public {}", r.network_value, r.public_value)))
        })());
    }

    write_json(&dir.join("selftest.json"), &checks)?;
    Ok(checks)
}
