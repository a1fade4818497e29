use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelParams, ReceiverType};

/// One `(type, λ)` atom of the rank-one kernel `κ(i,j) = λ_i λ_j c(t_i,t_j)`,
/// weighted by its population share `γ_t f_t(λ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Class {
    pub ty: ReceiverType,
    pub lambda: f64,
    pub weight: f64,
}

pub(crate) fn classes(params: &ModelParams, believers_only: bool) -> Vec<Class> {
    let mut out = Vec::new();
    for t in ReceiverType::ALL {
        for atom in params.connectedness(t).atoms() {
            let zeroed = believers_only && t == ReceiverType::L;
            out.push(Class {
                ty: t,
                lambda: if zeroed { 0.0 } else { atom.lambda },
                weight: params.gamma(t) * atom.prob,
            });
        }
    }
    out
}

/// Largest eigenvalue of the 2x2 mean-offspring operator of the branching
/// process explored by `classes`. The survival probability is zero iff this is
/// at most one.
pub(crate) fn spectral_radius(classes: &[Class], q: f64) -> f64 {
    let mut s2 = [0.0f64; 2];
    for c in classes {
        s2[c.ty.index()] += c.lambda * c.lambda * c.weight;
    }
    let (a, b) = (s2[0], s2[0] * q);
    let (c, d) = (s2[1] * q, s2[1]);
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - 4.0 * det).max(0.0);
    0.5 * (tr + disc.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoEntry {
    #[serde(rename = "type")]
    pub ty: ReceiverType,
    pub lambda: f64,
    pub rho: f64,
}

/// Survival probabilities `ρ(∞|t,λ)` with solver diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoTable {
    pub entries: Vec<RhoEntry>,
    pub iterations: usize,
    pub residual: f64,
    /// Every iterate was componentwise no larger than the previous one.
    pub monotone: bool,
    pub spectral_radius: f64,
}

impl RhoTable {
    pub fn get(&self, t: ReceiverType, lambda: f64) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.ty == t && e.lambda == lambda)
            .map(|e| e.rho)
    }

    pub fn of_type(&self, t: ReceiverType) -> impl Iterator<Item = &RhoEntry> {
        self.entries.iter().filter(move |e| e.ty == t)
    }
}

const CRITICAL_BAND: f64 = 1e-9;

/// Maximal fixed point of `ρ_i = 1 - exp(-λ_i Σ_j c(t_i,t_j) λ_j w_j ρ_j)`.
pub(crate) fn solve_survival(
    classes: &[Class],
    q: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, usize, f64, bool, f64)> {
    let r = spectral_radius(classes, q);
    // Near criticality the iteration crawls and the survival is O(r - 1).
    if r <= 1.0 + CRITICAL_BAND {
        return Ok((vec![0.0; classes.len()], 0, 0.0, true, r));
    }
    let mut rho = vec![1.0f64; classes.len()];
    let mut next = vec![0.0f64; classes.len()];
    let mut monotone = true;
    let mut residual = f64::INFINITY;
    for iter in 1..=max_iter {
        let mut sums = [0.0f64; 2];
        for (c, r) in classes.iter().zip(&rho) {
            sums[c.ty.index()] += c.lambda * c.weight * r;
        }
        residual = 0.0;
        for (i, c) in classes.iter().enumerate() {
            let own = sums[c.ty.index()];
            let other = sums[c.ty.other().index()];
            let v = -(-c.lambda * (own + q * other)).exp_m1();
            if v > rho[i] + 1e-15 {
                monotone = false;
            }
            residual = f64::max(residual, (v - rho[i]).abs());
            next[i] = v;
        }
        std::mem::swap(&mut rho, &mut next);
        if residual < tol {
            return Ok((rho, iter, residual, monotone, r));
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual,
        last_iterate: rho,
    })
}

pub fn solve_rho(params: &ModelParams, tol: f64, max_iter: usize) -> Result<RhoTable> {
    params.validate()?;
    let cls = classes(params, false);
    let (rho, iterations, residual, monotone, radius) =
        solve_survival(&cls, params.q, tol, max_iter)?;
    Ok(RhoTable {
        entries: cls
            .iter()
            .zip(rho)
            .map(|(c, rho)| RhoEntry {
                ty: c.ty,
                lambda: c.lambda,
                rho,
            })
            .collect(),
        iterations,
        residual,
        monotone,
        spectral_radius: radius,
    })
}

/// `c = Σ_t γ_t Σ_λ f_t(λ) ρ(∞|t,λ)`.
pub fn giant_fraction(params: &ModelParams, rho: &RhoTable) -> f64 {
    let mut c = 0.0;
    for t in ReceiverType::ALL {
        for atom in params.connectedness(t).atoms() {
            let r = rho.get(t, atom.lambda).unwrap_or(0.0);
            c += params.gamma(t) * atom.prob * r;
        }
    }
    c.clamp(0.0, 1.0)
}
