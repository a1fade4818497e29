use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::Result;
use crate::limits::kernel::{classes, solve_survival, RhoTable};
use crate::model::{ModelParams, ReceiverType};

/// `ζ(t,d) = 1 - s_t^d`, where `s_t` is the probability that a single
/// neighbour of a type-t node is off the giant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaTable {
    pub h: Vec<f64>,
    pub l: Vec<f64>,
    /// Per-neighbour miss probabilities `(s_h, s_l)`.
    pub miss: [f64; 2],
}

impl ZetaTable {
    pub fn row(&self, t: ReceiverType) -> &[f64] {
        match t {
            ReceiverType::H => &self.h,
            ReceiverType::L => &self.l,
        }
    }

    /// Value at any degree, including past the stored table.
    pub fn at(&self, t: ReceiverType, d: usize) -> f64 {
        self.row(t)
            .get(d)
            .copied()
            .unwrap_or_else(|| 1.0 - pow_usize(self.miss[t.index()], d))
    }
}

pub(crate) fn pow_usize(base: f64, d: usize) -> f64 {
    if d <= i32::MAX as usize {
        base.powi(d as i32)
    } else {
        base.powf(d as f64)
    }
}

fn geometric_row(miss: f64, d_max: usize) -> Vec<f64> {
    (0..=d_max).map(|d| (1.0 - pow_usize(miss, d)).clamp(0.0, 1.0)).collect()
}

pub fn compute_zeta(params: &ModelParams, rho: &RhoTable, d_max: usize) -> ZetaTable {
    let mut miss = [1.0f64; 2];
    for t in ReceiverType::ALL {
        let mut num = 0.0;
        let mut den = 0.0;
        for s in ReceiverType::ALL {
            for a in params.connectedness(s).atoms() {
                let w = params.affinity(t, s) * params.gamma(s) * a.prob * a.lambda;
                let r = rho.get(s, a.lambda).unwrap_or(0.0);
                num += w * (1.0 - r);
                den += w;
            }
        }
        miss[t.index()] = if den > 0.0 { (num / den).clamp(0.0, 1.0) } else { 1.0 };
    }
    ZetaTable {
        h: geometric_row(miss[0], d_max),
        l: geometric_row(miss[1], d_max),
        miss,
    }
}

/// Believer-subnetwork statistics: `ρ̂(∞|h,λ)`, `ζ̂(t,d)` and `ĉ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaHat {
    /// `(λ, ρ̂(∞|h,λ))` per believer connectedness atom.
    pub rho_hat_h: Vec<(f64, f64)>,
    pub h: Vec<f64>,
    pub l: Vec<f64>,
    /// Probability that a believer neighbour misses the believer giant.
    pub miss_h: f64,
    /// Per-neighbour miss probabilities `(1 - q_h(1-ŝ), q_l + (1-q_l)ŝ)`.
    pub miss: [f64; 2],
    pub c_hat: f64,
}

impl ZetaHat {
    pub fn row(&self, t: ReceiverType) -> &[f64] {
        match t {
            ReceiverType::H => &self.h,
            ReceiverType::L => &self.l,
        }
    }

    pub fn at(&self, t: ReceiverType, d: usize) -> f64 {
        self.row(t)
            .get(d)
            .copied()
            .unwrap_or_else(|| 1.0 - pow_usize(self.miss[t.index()], d))
    }
}

/// `Σ_k Binom(k; d, p)(1 - s^k)` for d = 0..=d_max, by direct summation.
fn binomial_exposure(p: f64, s: f64, d_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(d_max + 1);
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let lf: Vec<f64> = (0..=d_max).map(|k| ln_gamma(k as f64 + 1.0)).collect();
    for d in 0..=d_max {
        let mut acc = 0.0;
        for k in 0..=d {
            let w = if p <= 0.0 {
                f64::from(u8::from(k == 0))
            } else if p >= 1.0 {
                f64::from(u8::from(k == d))
            } else {
                let ln_choose = lf[d] - lf[k] - lf[d - k];
                (ln_choose + k as f64 * lp + (d - k) as f64 * lq).exp()
            };
            acc += w * (1.0 - pow_usize(s, k));
        }
        out.push(acc.clamp(0.0, 1.0));
    }
    out
}

pub fn solve_zeta_hat(
    params: &ModelParams,
    tol: f64,
    max_iter: usize,
    d_max: usize,
) -> Result<ZetaHat> {
    params.validate()?;
    let cls = classes(params, true);
    let (rho, _, _, _, _) = solve_survival(&cls, params.q, tol, max_iter)?;

    let rho_hat_h: Vec<(f64, f64)> = cls
        .iter()
        .zip(&rho)
        .filter(|(c, _)| c.ty == ReceiverType::H)
        .map(|(c, r)| (c.lambda, *r))
        .collect();
    let c_hat = cls
        .iter()
        .zip(&rho)
        .filter(|(c, _)| c.ty == ReceiverType::H)
        .map(|(c, r)| c.weight * r)
        .sum::<f64>()
        .clamp(0.0, 1.0);

    let mut num = 0.0;
    let mut den = 0.0;
    for (a, &(_, r)) in params.f_h.atoms().iter().zip(&rho_hat_h) {
        num += a.lambda * a.prob * (1.0 - r);
        den += a.lambda * a.prob;
    }
    let miss_h = if den > 0.0 { (num / den).clamp(0.0, 1.0) } else { 1.0 };

    let q_h = crate::limits::degree::same_type_prob(params, ReceiverType::H);
    let q_l = crate::limits::degree::same_type_prob(params, ReceiverType::L);
    let (h, l) = if miss_h >= 1.0 {
        (vec![0.0; d_max + 1], vec![0.0; d_max + 1])
    } else {
        (
            binomial_exposure(q_h, miss_h, d_max),
            binomial_exposure(1.0 - q_l, miss_h, d_max),
        )
    };
    Ok(ZetaHat {
        rho_hat_h,
        h,
        l,
        miss_h,
        miss: [
            1.0 - q_h * (1.0 - miss_h),
            q_l + (1.0 - q_l) * miss_h,
        ],
        c_hat,
    })
}
