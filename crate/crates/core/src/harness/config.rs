use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diffusion::{SenderStrategy, SimulationOptions};
use crate::error::{Error, Result};
use crate::limits::LimitOptions;
use crate::model::ModelParams;
use crate::netgen::DEFAULT_EDGE_BUDGET;
use crate::optimizer::OptimizerOptions;
use crate::rng::{RngSpec, DEFAULT_ALGORITHM};
use crate::scenarios::{MonteCarloOptions, ScenarioOptions};

/// Numerical and sampling settings shared by every command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EngineConfig {
    pub n: usize,
    pub reps: usize,
    pub pilot_reps: usize,
    pub base_seed: u64,
    pub rng: String,
    pub tail_cutoff: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub grid_n: usize,
    pub refine_iters: usize,
    pub d_max_floor: usize,
    pub seed_exponent: f64,
    pub edge_budget: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        let lim = LimitOptions::default();
        let opt = OptimizerOptions::default();
        EngineConfig {
            n: 100_000,
            reps: 20,
            pilot_reps: 200,
            base_seed: 0,
            rng: DEFAULT_ALGORITHM.to_string(),
            tail_cutoff: lim.tail_cutoff,
            tol: lim.tol,
            max_iter: lim.max_iter,
            grid_n: opt.grid_n,
            refine_iters: opt.refine_iters,
            d_max_floor: lim.d_max_floor,
            seed_exponent: 0.5,
            edge_budget: DEFAULT_EDGE_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    /// Run the finite-n cross-check where the scenario has one.
    pub monte_carlo: bool,
    pub crra_r: f64,
    pub crra_sweep: Vec<f64>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let d = ScenarioOptions::default();
        ScenarioConfig {
            monte_carlo: false,
            crra_r: d.crra_r,
            crra_sweep: d.crra_sweep,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelParams,
    #[serde(default)]
    pub engine: EngineConfig,
    /// Network strategy for `simulate`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<SenderStrategy>,
    #[serde(default)]
    pub scenario: ScenarioConfig,
}

impl RunConfig {
    pub fn new(model: ModelParams) -> Self {
        RunConfig {
            model,
            engine: EngineConfig::default(),
            strategy: None,
            scenario: ScenarioConfig::default(),
        }
    }

    /// Parses and validates a JSON config. Syntax and schema errors carry the
    /// offending line and column.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| {
            Error::Config(format!("line {}, column {}: {e}", e.line(), e.column()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.rng().validate()?;
        let e = &self.engine;
        if e.n < 2 {
            return Err(Error::Config(format!("engine.n = {} must be at least 2", e.n)));
        }
        if e.reps == 0 || e.pilot_reps == 0 {
            return Err(Error::Config("engine.reps and engine.pilot_reps must be positive".into()));
        }
        if !(e.tail_cutoff > 0.0 && e.tail_cutoff <= 1e-3) {
            return Err(Error::Config(format!("engine.tail_cutoff = {} must lie in (0, 1e-3]", e.tail_cutoff)));
        }
        if !(e.tol > 0.0) || e.max_iter == 0 {
            return Err(Error::Config("engine.tol and engine.max_iter must be positive".into()));
        }
        if e.grid_n < 3 {
            return Err(Error::Config(format!("engine.grid_n = {} must be at least 3", e.grid_n)));
        }
        if !(e.seed_exponent > 0.0 && e.seed_exponent < 1.0) {
            return Err(Error::Config(format!("engine.seed_exponent = {} must lie in (0,1)", e.seed_exponent)));
        }
        if let Some(s) = &self.strategy {
            s.validate()?;
        }
        Ok(())
    }

    pub fn rng(&self) -> RngSpec {
        RngSpec {
            base_seed: self.engine.base_seed,
            algorithm: self.engine.rng.clone(),
        }
    }

    pub fn limit_options(&self) -> LimitOptions {
        LimitOptions {
            tail_cutoff: self.engine.tail_cutoff,
            tol: self.engine.tol,
            max_iter: self.engine.max_iter,
            d_max_floor: self.engine.d_max_floor,
        }
    }

    pub fn optimizer_options(&self) -> OptimizerOptions {
        OptimizerOptions {
            grid_n: self.engine.grid_n,
            refine_iters: self.engine.refine_iters,
            ..Default::default()
        }
    }

    pub fn simulation_options(&self) -> SimulationOptions {
        SimulationOptions {
            n: self.engine.n,
            reps: self.engine.reps,
            pilot_reps: self.engine.pilot_reps,
            edge_budget: self.engine.edge_budget,
        }
    }

    /// The configured strategy with the engine's seed exponent applied.
    pub fn sender_strategy(&self) -> Option<SenderStrategy> {
        self.strategy.clone().map(|mut s| {
            s.seed_exponent = self.engine.seed_exponent;
            s
        })
    }

    pub fn scenario_options(&self) -> ScenarioOptions {
        ScenarioOptions {
            limits: self.limit_options(),
            optimizer: self.optimizer_options(),
            monte_carlo: self.scenario.monte_carlo.then(|| MonteCarloOptions {
                sim: self.simulation_options(),
                rng: self.rng().derive("scenario", 0),
            }),
            crra_r: self.scenario.crra_r,
            crra_sweep: self.scenario.crra_sweep.clone(),
        }
    }
}
