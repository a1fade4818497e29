use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::error;

use persuasion_core::harness::{self, OptimizeTarget, RunConfig};
use persuasion_core::scenarios::SCENARIOS;
use persuasion_core::Error;

const THREADS_ENV: &str = "PERSUASION_NET_THREADS";

#[derive(Parser, Debug)]
#[command(name = "persuasion-net", version, about = "Network vs public persuasion: limits, simulation, optimisation")]
struct Cli {
    /// Worker threads (falls back to PERSUASION_NET_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Directory for outputs.
    #[arg(long, short, global = true, default_value = "out")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Limit degree laws and exposure probabilities (limits.csv, limits.json).
    Limits {
        #[arg(long)]
        config: PathBuf,
    },
    /// Sample one network and report empirical statistics.
    Sample {
        #[arg(long)]
        config: PathBuf,
    },
    /// Monte Carlo payoff of the configured strategy (sim.csv, obsfrac.csv).
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Optimal sender payoff (optimum.json).
    Optimize {
        #[arg(long)]
        config: PathBuf,
        /// Only the public-signal problem.
        #[arg(long, conflicts_with = "network")]
        public: bool,
        /// Only the network-signal problem.
        #[arg(long)]
        network: bool,
        /// Cross-check the network optimum by simulation.
        #[arg(long)]
        monte_carlo: bool,
    },
    /// Network vs public comparison with applicable predictions (compare.json).
    Compare {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a named scenario, or `all` (scenario_<name>.json, report.csv).
    Scenario {
        name: String,
        /// Defaults to the scenario's built-in configuration.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Run the Monte Carlo cross-check where available.
        #[arg(long)]
        monte_carlo: bool,
    },
    /// Quick invariant suite (selftest.json).
    Selftest,
}

fn threads(flag: Option<usize>) -> Result<Option<usize>, Error> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Config(format!("{THREADS_ENV}={v} is not a thread count"))),
        Err(_) => Ok(None),
    }
}

/// 0 on success, 1 on invalid input, 2 when a verdict or internal assertion fails.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Assertion(_) => 2,
        _ => 1,
    }
}

fn verdict(ok: bool, what: &str) -> Result<u8, Error> {
    if ok {
        Ok(0)
    } else {
        eprintln!("{what}: verdict fail");
        Ok(2)
    }
}

fn run_scenario(name: &str, config: Option<&Path>, mc: bool, out: &Path) -> Result<u8, Error> {
    let names: Vec<&str> = if name == "all" {
        SCENARIOS.to_vec()
    } else {
        vec![name]
    };
    let mut code = 0;
    for n in names {
        let mut cfg = match config {
            Some(p) => RunConfig::load(p)?,
            None => harness::default_scenario_config(n)?,
        };
        cfg.scenario.monte_carlo |= mc;
        let r = harness::cmd_scenario(n, &cfg, out)?;
        println!(
            "{n}: {} (network {}, public {}, margin {})",
            if r.verdict { "pass" } else { "fail" },
            r.network_value,
            r.public_value,
            r.margin
        );
        if !r.verdict {
            code = 2;
        }
    }
    Ok(code)
}

fn run(cli: Cli) -> Result<u8, Error> {
    if let Some(n) = threads(cli.threads)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot start {n} worker threads: {e}")))?;
    }
    let out = cli.out.as_path();
    match cli.command {
        Command::Limits { config } => {
            let s = harness::cmd_limits(&RunConfig::load(&config)?, out)?;
            println!("c = {}, c_hat = {}, d_vote = {}", s.c, s.c_hat, s.d_vote);
            Ok(0)
        }
        Command::Sample { config } => {
            let s = harness::cmd_sample(&RunConfig::load(&config)?, out)?;
            println!("n = {}, edges = {}", s.n, s.edges);
            Ok(0)
        }
        Command::Simulate { config } => {
            let s = harness::cmd_simulate(&RunConfig::load(&config)?, out)?;
            println!("payoff = {} ± {}", s.payoff.mean, s.payoff.se);
            Ok(0)
        }
        Command::Optimize {
            config,
            public,
            network,
            monte_carlo,
        } => {
            let target = match (public, network) {
                (true, _) => OptimizeTarget::Public,
                (_, true) => OptimizeTarget::Network,
                _ => OptimizeTarget::Both,
            };
            let r = harness::cmd_optimize(&RunConfig::load(&config)?, out, target, monte_carlo)?;
            for (label, rep) in [("public", &r.public), ("network", &r.network)] {
                if let Some(rep) = rep {
                    println!("{label}: {}", rep.value);
                }
            }
            Ok(0)
        }
        Command::Compare { config } => {
            let r = harness::cmd_compare(&RunConfig::load(&config)?, out)?;
            println!(
                "public {}, network {}, gap {}, applicable {}",
                r.public_value,
                r.network_value,
                r.gap,
                r.applicable.as_deref().unwrap_or("none")
            );
            verdict(r.verdict.unwrap_or(true), "compare")
        }
        Command::Scenario {
            name,
            config,
            monte_carlo,
        } => run_scenario(&name, config.as_deref(), monte_carlo, out),
        Command::Selftest => {
            let checks = harness::cmd_selftest(out)?;
            for c in &checks {
                println!("{} {}", if c.passed { "pass" } else { "FAIL" }, c.name);
            }
            verdict(checks.iter().all(|c| c.passed), "selftest")
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
