//! Limiting network statistics as the population grows.

pub mod branching;
pub mod degree;
pub mod kernel;
pub mod vote;
pub mod zeta;

use serde::{Deserialize, Serialize};

pub use branching::{branching_size_dist, BranchingEstimate};
pub use degree::{
    compute_degree_dists, expected_degree, forward_dist, is_more_connected, poisson_pmf,
    ClassDegree, Connectivity, DegreeDist, DegreeLaws,
};
pub use kernel::{giant_fraction, solve_rho, RhoEntry, RhoTable};
pub use vote::{check_condition_a1, compute_d_vote, empty_signal_ratio, ConditionA1, DVote};
pub use zeta::{compute_zeta, solve_zeta_hat, ZetaHat, ZetaTable};

use crate::error::Result;
use crate::model::{ModelParams, ReceiverType};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitOptions {
    pub tail_cutoff: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub d_max_floor: usize,
}

impl Default for LimitOptions {
    fn default() -> Self {
        LimitOptions {
            tail_cutoff: 1e-9,
            tol: 1e-12,
            max_iter: 200_000,
            d_max_floor: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitStats {
    pub p_h: DegreeDist,
    pub p_l: DegreeDist,
    /// Forward laws; `None` for a type with zero mean degree.
    pub fwd_h: Option<DegreeDist>,
    pub fwd_l: Option<DegreeDist>,
    pub q_h: f64,
    pub q_l: f64,
    pub expected_degree: Vec<ClassDegree>,
    pub rho: RhoTable,
    pub zeta: ZetaTable,
    pub zeta_hat: ZetaHat,
    pub c: f64,
    pub c_hat: f64,
    pub d_max: usize,
    pub degenerate: bool,
}

impl LimitStats {
    pub fn degree(&self, t: ReceiverType) -> &DegreeDist {
        match t {
            ReceiverType::H => &self.p_h,
            ReceiverType::L => &self.p_l,
        }
    }

    pub fn forward(&self, t: ReceiverType) -> Option<&DegreeDist> {
        match t {
            ReceiverType::H => self.fwd_h.as_ref(),
            ReceiverType::L => self.fwd_l.as_ref(),
        }
    }

    pub fn same_type_prob(&self, t: ReceiverType) -> f64 {
        match t {
            ReceiverType::H => self.q_h,
            ReceiverType::L => self.q_l,
        }
    }

    /// `ζ(t,d)` for any `d`.
    pub fn zeta(&self, t: ReceiverType, d: usize) -> f64 {
        self.zeta.at(t, d)
    }

    /// `ζ̂(t,d)` for any `d`.
    pub fn zeta_hat(&self, t: ReceiverType, d: usize) -> f64 {
        self.zeta_hat.at(t, d)
    }

    /// Limiting probability that a type-t receiver is exposed to a signal
    /// planted on the giant (`hat = false`) or believer giant (`hat = true`).
    pub fn exposure(&self, t: ReceiverType, hat: bool) -> f64 {
        let p = self.degree(t);
        let miss = if hat {
            self.zeta_hat.miss[t.index()]
        } else {
            self.zeta.miss[t.index()]
        };
        // Generating-function tail beyond d_max is tiny; use the table.
        p.probs
            .iter()
            .enumerate()
            .map(|(d, pd)| pd * (1.0 - zeta::pow_usize(miss, d)))
            .sum()
    }

    pub fn connectivity(&self) -> Result<Connectivity> {
        is_more_connected(&DegreeLaws {
            p_h: self.p_h.clone(),
            p_l: self.p_l.clone(),
            q_h: self.q_h,
            q_l: self.q_l,
            expected_degree: self.expected_degree.clone(),
            degenerate: self.degenerate,
        })
    }
}

pub fn compute_limits(params: &ModelParams, opts: &LimitOptions) -> Result<LimitStats> {
    let laws = compute_degree_dists(params, opts.tail_cutoff, opts.d_max_floor)?;
    let d_max = laws.d_max();
    let exact_mean = |t: ReceiverType| -> f64 {
        params
            .connectedness(t)
            .atoms()
            .iter()
            .map(|a| a.prob * expected_degree(params, t, a.lambda))
            .sum()
    };
    let fwd_h = degree::forward_with_mean(&laws.p_h, exact_mean(ReceiverType::H)).ok();
    let fwd_l = degree::forward_with_mean(&laws.p_l, exact_mean(ReceiverType::L)).ok();
    let rho = solve_rho(params, opts.tol, opts.max_iter)?;
    let zeta = compute_zeta(params, &rho, d_max);
    let zeta_hat = solve_zeta_hat(params, opts.tol, opts.max_iter, d_max)?;
    let c = giant_fraction(params, &rho);
    Ok(LimitStats {
        c,
        c_hat: zeta_hat.c_hat,
        p_h: laws.p_h,
        p_l: laws.p_l,
        fwd_h,
        fwd_l,
        q_h: laws.q_h,
        q_l: laws.q_l,
        expected_degree: laws.expected_degree,
        rho,
        zeta,
        zeta_hat,
        d_max,
        degenerate: laws.degenerate,
    })
}

/// One row of `limits.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitRow {
    #[serde(rename = "type")]
    pub ty: ReceiverType,
    pub d: usize,
    pub p_d: f64,
    pub forward_p_d: f64,
    pub zeta: f64,
    pub zeta_hat: f64,
}

pub fn limit_rows(stats: &LimitStats) -> Vec<LimitRow> {
    let mut rows = Vec::new();
    for t in ReceiverType::ALL {
        for d in 0..=stats.d_max {
            rows.push(LimitRow {
                ty: t,
                d,
                p_d: stats.degree(t).get(d),
                forward_p_d: stats.forward(t).map_or(0.0, |f| f.get(d)),
                zeta: stats.zeta(t, d),
                zeta_hat: stats.zeta_hat(t, d),
            });
        }
    }
    rows
}

/// Contents of `limits.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSummary {
    pub q_h: f64,
    pub q_l: f64,
    pub c: f64,
    pub c_hat: f64,
    pub d_vote: DVote,
    pub condition_a1: ConditionA1,
    pub d_max: usize,
    pub connectivity: Connectivity,
}

pub fn summarize(params: &ModelParams, stats: &LimitStats) -> Result<LimitSummary> {
    Ok(LimitSummary {
        q_h: stats.q_h,
        q_l: stats.q_l,
        c: stats.c,
        c_hat: stats.c_hat,
        d_vote: compute_d_vote(params, stats),
        condition_a1: check_condition_a1(params, stats, stats.d_max),
        d_max: stats.d_max,
        connectivity: stats.connectivity()?,
    })
}
