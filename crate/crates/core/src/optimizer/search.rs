//! Exhaustive search over piecewise-linear sender objectives.
//!
//! For a fixed pattern of empty-signal actions the objective is linear in the
//! strategy, and each cell's action switches on a hyperplane. The supremum is
//! therefore attained at a vertex of the arrangement formed by those
//! hyperplanes and the feasibility constraints, evaluated with ties resolved
//! to action 1 (which the sender weakly prefers). Grids and manifold solves
//! complement the vertex scan when it would be too large.

use rayon::prelude::*;

use crate::model::ModelParams;
use crate::optimizer::objective::{evaluate, ExposureTable, ReducedStrategy};

const FEAS_TOL: f64 = 1e-9;
const VALUE_TIE: f64 = 1e-12;
const SINGULAR: f64 = 1e-12;
const DEDUP_SCALE: f64 = 1e10;

/// Half-space `a·x ≤ b` in strategy coordinates `(x1, x0, y1, y0)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Linear {
    pub a: [f64; 4],
    pub b: f64,
}

/// Feasible region of the two-signal family (closure of the Int constraint).
pub(crate) fn class_constraints(params: &ModelParams) -> Vec<Linear> {
    let (mh1, ml1) = (params.mu_h1, params.mu_l1);
    let (mh0, ml0) = (1.0 - mh1, 1.0 - ml1);
    vec![
        Linear { a: [-1.0, 0.0, 0.0, 0.0], b: 0.0 },
        Linear { a: [0.0, -1.0, 0.0, 0.0], b: 0.0 },
        Linear { a: [0.0, 0.0, -1.0, 0.0], b: 0.0 },
        Linear { a: [0.0, 0.0, 0.0, -1.0], b: 0.0 },
        Linear { a: [1.0, 0.0, 1.0, 0.0], b: 1.0 },
        Linear { a: [0.0, 1.0, 0.0, 1.0], b: 1.0 },
        // s persuades sceptics.
        Linear { a: [-ml1, ml0, 0.0, 0.0], b: 0.0 },
        // s' persuades believers.
        Linear { a: [0.0, 0.0, -mh1, mh0], b: 0.0 },
        // s' does not persuade sceptics (closure).
        Linear { a: [0.0, 0.0, ml1, -ml0], b: 0.0 },
    ]
}

/// Hyperplanes where some cell's empty-signal action switches.
pub(crate) fn ratio_planes(params: &ModelParams, table: &ExposureTable) -> Vec<Linear> {
    let mut out = Vec::new();
    for c in &table.cells {
        if c.zeta == 0.0 && c.zeta_hat == 0.0 {
            continue;
        }
        let m1 = params.mu1(c.ty);
        let m0 = 1.0 - m1;
        out.push(Linear {
            a: [-m1 * c.zeta, m0 * c.zeta, -m1 * c.zeta_hat, m0 * c.zeta_hat],
            b: m0 - m1,
        });
    }
    out
}

/// Affine slice `x = c0 + M θ` of the strategy space with `θ ∈ [0,1]^dim`.
#[derive(Debug, Clone)]
pub(crate) struct Space {
    pub dim: usize,
    pub c0: [f64; 4],
    /// `m[i][j]`: coefficient of `θ_j` in coordinate `i`.
    pub m: [[f64; 4]; 4],
}

impl Space {
    pub fn full() -> Self {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Space { dim: 4, c0: [0.0; 4], m }
    }

    /// `θ = (x1, y1)` with `x0 = L x1` and `y0 = H y1`.
    pub fn restricted_frontier(l: f64, h: f64) -> Self {
        let mut m = [[0.0; 4]; 4];
        m[0][0] = 1.0;
        m[1][0] = l;
        m[2][1] = 1.0;
        m[3][1] = h;
        Space { dim: 2, c0: [0.0; 4], m }
    }

    /// `θ = (x1, y1)` with `x0 = L x1` and `y0 = 1 - L x1`.
    pub fn restricted_budget(l: f64) -> Self {
        let mut m = [[0.0; 4]; 4];
        m[0][0] = 1.0;
        m[1][0] = l;
        m[2][1] = 1.0;
        m[3][0] = -l;
        Space {
            dim: 2,
            c0: [0.0, 0.0, 0.0, 1.0],
            m,
        }
    }

    pub fn point(&self, theta: &[f64]) -> [f64; 4] {
        let mut x = self.c0;
        for (i, xi) in x.iter_mut().enumerate() {
            for j in 0..self.dim {
                *xi += self.m[i][j] * theta[j];
            }
        }
        x
    }

    /// Pulls an `x`-space half-space back to `θ` coordinates.
    fn pull(&self, l: &Linear) -> Linear {
        let mut a = [0.0; 4];
        for (j, aj) in a.iter_mut().enumerate().take(self.dim) {
            *aj = (0..4).map(|i| l.a[i] * self.m[i][j]).sum();
        }
        let shift: f64 = (0..4).map(|i| l.a[i] * self.c0[i]).sum();
        Linear { a, b: l.b - shift }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Candidate {
    pub value: f64,
    pub x: [f64; 4],
}

impl Candidate {
    /// Deterministic order: higher value, then lexicographically smaller strategy.
    pub fn beats(&self, other: &Candidate) -> bool {
        if self.value > other.value + VALUE_TIE {
            return true;
        }
        if self.value < other.value - VALUE_TIE {
            return false;
        }
        self.x
            .iter()
            .zip(&other.x)
            .find(|(a, b)| a != b)
            .is_some_and(|(a, b)| a < b)
    }
}

pub(crate) fn best_of(cands: impl IntoIterator<Item = Candidate>) -> Option<Candidate> {
    let mut best: Option<Candidate> = None;
    for c in cands {
        if best.as_ref().is_none_or(|b| c.beats(b)) {
            best = Some(c);
        }
    }
    best
}

/// Search problem: objective on an exposure table over a slice of the
/// feasible region.
pub(crate) struct Problem<'a> {
    pub params: &'a ModelParams,
    pub table: &'a ExposureTable,
    pub space: Space,
    constraints: Vec<Linear>,
    planes: Vec<Linear>,
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct SearchStats {
    pub evaluations: usize,
    pub planes: usize,
    pub exhaustive: bool,
}

impl<'a> Problem<'a> {
    pub fn new(params: &'a ModelParams, table: &'a ExposureTable, space: Space) -> Self {
        let xs_constraints = class_constraints(params);
        let constraints: Vec<Linear> = xs_constraints.iter().map(|c| space.pull(c)).collect();
        let mut planes: Vec<Linear> = xs_constraints
            .iter()
            .chain(ratio_planes(params, table).iter())
            .map(|p| space.pull(p))
            .filter_map(|p| normalise(p, space.dim))
            .collect();
        dedup_planes(&mut planes, space.dim);
        Problem {
            params,
            table,
            space,
            constraints,
            planes,
        }
    }

    pub fn plane_count(&self) -> usize {
        self.planes.len()
    }

    fn feasible(&self, theta: &[f64]) -> bool {
        self.constraints.iter().all(|c| {
            let lhs: f64 = (0..self.space.dim).map(|j| c.a[j] * theta[j]).sum();
            lhs <= c.b + FEAS_TOL
        })
    }

    fn eval(&self, theta: &[f64]) -> Option<Candidate> {
        if !self.feasible(theta) {
            return None;
        }
        let x = self.space.point(theta);
        let v = evaluate(self.params, self.table, &ReducedStrategy::from_array(x)).value;
        Some(Candidate { value: v, x })
    }

    /// Evaluates a strategy given in `x` coordinates (must lie in the slice).
    pub fn eval_x(&self, x: [f64; 4]) -> Candidate {
        let v = evaluate(self.params, self.table, &ReducedStrategy::from_array(x)).value;
        Candidate { value: v, x }
    }

    /// Every vertex of the arrangement inside the feasible region.
    pub fn vertices(&self, stats: &mut SearchStats) -> Option<Candidate> {
        let k = self.space.dim;
        let p = self.planes.len();
        if p < k {
            return None;
        }
        let results: Vec<(Option<Candidate>, usize)> = (0..p)
            .into_par_iter()
            .map(|i| {
                let mut best: Option<Candidate> = None;
                let mut evals = 0usize;
                let mut idx = vec![i];
                self.extend_combo(&mut idx, k, &mut best, &mut evals);
                (best, evals)
            })
            .collect();
        stats.evaluations += results.iter().map(|r| r.1).sum::<usize>();
        best_of(results.into_iter().filter_map(|r| r.0))
    }

    fn extend_combo(
        &self,
        idx: &mut Vec<usize>,
        k: usize,
        best: &mut Option<Candidate>,
        evals: &mut usize,
    ) {
        if idx.len() == k {
            if let Some(theta) = self.solve(idx) {
                if let Some(c) = self.eval(&theta) {
                    *evals += 1;
                    if best.as_ref().is_none_or(|b| c.beats(b)) {
                        *best = Some(c);
                    }
                }
            }
            return;
        }
        let start = idx.last().map_or(0, |&l| l + 1);
        for j in start..self.planes.len() {
            idx.push(j);
            self.extend_combo(idx, k, best, evals);
            idx.pop();
        }
    }

    /// Intersection point of the chosen planes, if unique.
    fn solve(&self, idx: &[usize]) -> Option<Vec<f64>> {
        let k = idx.len();
        let mut a = [[0.0f64; 5]; 4];
        for (r, &i) in idx.iter().enumerate() {
            for c in 0..k {
                a[r][c] = self.planes[i].a[c];
            }
            a[r][k] = self.planes[i].b;
        }
        for col in 0..k {
            let piv = (col..k).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
            if a[piv][col].abs() < SINGULAR {
                return None;
            }
            a.swap(col, piv);
            for r in 0..k {
                if r != col {
                    let f = a[r][col] / a[col][col];
                    for c in col..=k {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
        Some((0..k).map(|r| a[r][k] / a[r][r]).collect())
    }

    /// Regular grid over `lo..=hi` per axis, `per_axis` points each.
    pub fn grid(&self, lo: &[f64], hi: &[f64], per_axis: usize, stats: &mut SearchStats) -> Option<Candidate> {
        let k = self.space.dim;
        let g = per_axis.max(2);
        let total = g.pow(k as u32);
        let results: Vec<Option<Candidate>> = (0..total)
            .into_par_iter()
            .map(|mut idx| {
                let mut theta = [0.0; 4];
                for j in 0..k {
                    let step = idx % g;
                    idx /= g;
                    theta[j] = lo[j] + (hi[j] - lo[j]) * step as f64 / (g - 1) as f64;
                }
                self.eval(&theta[..k])
            })
            .collect();
        stats.evaluations += total;
        best_of(results.into_iter().flatten())
    }

    /// For each grid point on the first `dim - 1` axes, evaluates where every
    /// switching plane crosses the last axis.
    pub fn manifold(&self, per_axis: usize, stats: &mut SearchStats) -> Option<Candidate> {
        let k = self.space.dim;
        let g = per_axis.max(2);
        let lines = g.pow(k as u32 - 1);
        let results: Vec<(Option<Candidate>, usize)> = (0..lines)
            .into_par_iter()
            .map(|mut idx| {
                let mut theta = [0.0; 4];
                for t in theta.iter_mut().take(k - 1) {
                    *t = (idx % g) as f64 / (g - 1) as f64;
                    idx /= g;
                }
                let mut best: Option<Candidate> = None;
                let mut evals = 0;
                for p in &self.planes {
                    let coef = p.a[k - 1];
                    if coef.abs() < SINGULAR {
                        continue;
                    }
                    let rest: f64 = (0..k - 1).map(|j| p.a[j] * theta[j]).sum();
                    let t = (p.b - rest) / coef;
                    if !(-FEAS_TOL..=1.0 + FEAS_TOL).contains(&t) {
                        continue;
                    }
                    theta[k - 1] = t;
                    if let Some(c) = self.eval(&theta[..k]) {
                        evals += 1;
                        if best.as_ref().is_none_or(|b| c.beats(b)) {
                            best = Some(c);
                        }
                    }
                }
                (best, evals)
            })
            .collect();
        stats.evaluations += results.iter().map(|r| r.1).sum::<usize>();
        best_of(results.into_iter().filter_map(|r| r.0))
    }

    /// Zooms a grid around `center` (given in θ coordinates) `rounds` times.
    pub fn refine(
        &self,
        center: Vec<f64>,
        per_axis: usize,
        rounds: usize,
        stats: &mut SearchStats,
    ) -> Option<Candidate> {
        let k = self.space.dim;
        let g = per_axis.max(3);
        let mut half = 1.0 / (g - 1) as f64;
        let mut c = center;
        let mut best: Option<Candidate> = None;
        for _ in 0..rounds {
            let lo: Vec<f64> = (0..k).map(|j| (c[j] - half).max(0.0)).collect();
            let hi: Vec<f64> = (0..k).map(|j| (c[j] + half).min(1.0)).collect();
            if let Some(found) = self.grid(&lo, &hi, g, stats) {
                if best.as_ref().is_none_or(|b| found.beats(b)) {
                    best = Some(found);
                    if let Some(t) = self.theta_of(&found.x) {
                        c = t;
                    }
                }
            }
            half /= 10.0;
        }
        best
    }

    /// Inverts the slice map for points that lie on it.
    pub fn theta_of(&self, x: &[f64; 4]) -> Option<Vec<f64>> {
        match self.space.dim {
            4 => Some(x.to_vec()),
            2 => Some(vec![x[0], x[2]]),
            _ => None,
        }
    }
}

fn normalise(p: Linear, dim: usize) -> Option<Linear> {
    let norm = p.a[..dim].iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm < SINGULAR {
        return None;
    }
    let first = p.a[..dim].iter().copied().find(|v| v.abs() >= SINGULAR)?;
    let s = first.signum() / norm;
    let mut a = [0.0; 4];
    for j in 0..dim {
        a[j] = p.a[j] * s;
    }
    Some(Linear { a, b: p.b * s })
}

fn dedup_planes(planes: &mut Vec<Linear>, dim: usize) {
    let key = |p: &Linear| -> Vec<i64> {
        p.a[..dim]
            .iter()
            .chain(std::iter::once(&p.b))
            .map(|v| (v * DEDUP_SCALE).round() as i64)
            .collect()
    };
    let mut keyed: Vec<(Vec<i64>, Linear)> = planes.iter().map(|p| (key(p), *p)).collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    keyed.dedup_by(|a, b| a.0 == b.0);
    *planes = keyed.into_iter().map(|(_, p)| p).collect();
}
