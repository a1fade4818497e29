use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::model::{ModelParams, ReceiverType};

const HARD_DEGREE_CAP: usize = 1 << 20;
const ORDER_TOL: f64 = 1e-10;

/// Degree law truncated at `d_max = probs.len() - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeDist {
    pub probs: Vec<f64>,
    /// Probability mass beyond `d_max`.
    pub tail_mass: f64,
}

impl DegreeDist {
    pub fn from_probs(probs: Vec<f64>) -> Self {
        let total: f64 = probs.iter().sum();
        DegreeDist {
            probs,
            tail_mass: (1.0 - total).max(0.0),
        }
    }

    pub fn d_max(&self) -> usize {
        self.probs.len().saturating_sub(1)
    }

    /// `p_d`, zero beyond the table.
    pub fn get(&self, d: usize) -> f64 {
        self.probs.get(d).copied().unwrap_or(0.0)
    }

    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(d, p)| d as f64 * p)
            .sum()
    }

    /// `P(D <= d)` for d inside the table.
    pub fn cdf(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect()
    }
}

/// Expected degree `D(t, λ)` of one connectedness class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassDegree {
    #[serde(rename = "type")]
    pub ty: ReceiverType,
    pub lambda: f64,
    pub expected_degree: f64,
}

/// Limiting per-type degree laws and same-type neighbour probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeLaws {
    pub p_h: DegreeDist,
    pub p_l: DegreeDist,
    pub q_h: f64,
    pub q_l: f64,
    pub expected_degree: Vec<ClassDegree>,
    /// No receiver has positive connectedness: the network is empty.
    pub degenerate: bool,
}

impl DegreeLaws {
    pub fn dist(&self, t: ReceiverType) -> &DegreeDist {
        match t {
            ReceiverType::H => &self.p_h,
            ReceiverType::L => &self.p_l,
        }
    }

    pub fn same_type_prob(&self, t: ReceiverType) -> f64 {
        match t {
            ReceiverType::H => self.q_h,
            ReceiverType::L => self.q_l,
        }
    }

    pub fn d_max(&self) -> usize {
        self.p_h.d_max()
    }
}

pub fn poisson_pmf(d: usize, mean: f64) -> f64 {
    if mean <= 0.0 {
        return if d == 0 { 1.0 } else { 0.0 };
    }
    let d_f = d as f64;
    (d_f * mean.ln() - mean - ln_gamma(d_f + 1.0)).exp()
}

/// Intensity `E_t γ_t + q E_t' γ_t'` that scales λ into an expected degree.
pub(crate) fn degree_scale(params: &ModelParams, t: ReceiverType) -> f64 {
    let o = t.other();
    params.connectedness(t).mean() * params.gamma(t)
        + params.q * params.connectedness(o).mean() * params.gamma(o)
}

pub fn expected_degree(params: &ModelParams, t: ReceiverType, lambda: f64) -> f64 {
    lambda * degree_scale(params, t)
}

pub(crate) fn same_type_prob(params: &ModelParams, t: ReceiverType) -> f64 {
    let own = params.connectedness(t).mean() * params.gamma(t);
    let denom = degree_scale(params, t);
    if denom > 0.0 {
        own / denom
    } else {
        1.0
    }
}

/// Poisson-mixture degree laws truncated where both tails fall below `tail_cutoff`
/// (and not before `d_max_floor`).
pub fn compute_degree_dists(
    params: &ModelParams,
    tail_cutoff: f64,
    d_max_floor: usize,
) -> Result<DegreeLaws> {
    params.validate()?;
    if !(tail_cutoff > 0.0 && tail_cutoff <= 1e-3) {
        return Err(Error::OutOfRange {
            what: "tail_cutoff",
            value: tail_cutoff,
            lo: 0.0,
            hi: 1e-3,
        });
    }

    let mut expected = Vec::new();
    let mut mixtures: [Vec<(f64, f64)>; 2] = [Vec::new(), Vec::new()];
    for t in ReceiverType::ALL {
        for atom in params.connectedness(t).atoms() {
            let dd = expected_degree(params, t, atom.lambda);
            expected.push(ClassDegree {
                ty: t,
                lambda: atom.lambda,
                expected_degree: dd,
            });
            mixtures[t.index()].push((atom.prob, dd));
        }
    }
    let degenerate = expected.iter().all(|c| c.expected_degree == 0.0);

    let mut probs: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    let mut mass = [0.0f64; 2];
    let mut d = 0usize;
    loop {
        for t in 0..2 {
            let p: f64 = mixtures[t]
                .iter()
                .map(|&(w, mean)| w * poisson_pmf(d, mean))
                .sum();
            probs[t].push(p);
            mass[t] += p;
        }
        let done = mass.iter().all(|m| 1.0 - m < tail_cutoff);
        if (done && d >= d_max_floor) || d >= HARD_DEGREE_CAP {
            break;
        }
        d += 1;
    }
    let [ph, pl] = probs;

    Ok(DegreeLaws {
        p_h: DegreeDist::from_probs(ph),
        p_l: DegreeDist::from_probs(pl),
        q_h: same_type_prob(params, ReceiverType::H),
        q_l: same_type_prob(params, ReceiverType::L),
        expected_degree: expected,
        degenerate,
    })
}

/// Degree law of a uniformly chosen neighbour, minus the edge used to reach it.
pub fn forward_dist(p: &DegreeDist) -> Result<DegreeDist> {
    forward_with_mean(p, p.mean())
}

/// As [`forward_dist`] with the exact (untruncated) mean supplied, so that the
/// mass lost to truncation shows up in `tail_mass`.
pub fn forward_with_mean(p: &DegreeDist, mean: f64) -> Result<DegreeDist> {
    if !(mean > 0.0) {
        return Err(Error::ForwardUndefined);
    }
    let probs = (0..p.d_max())
        .map(|d| p.get(d + 1) * (d + 1) as f64 / mean)
        .collect();
    Ok(DegreeDist::from_probs(probs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Connectivity {
    HMore,
    LMore,
    Equal,
    Incomparable,
}

fn dominates(a: &DegreeDist, b: &DegreeDist) -> bool {
    let n = a.probs.len().max(b.probs.len());
    let (mut ca, mut cb) = (0.0, 0.0);
    for d in 0..n {
        ca += a.get(d);
        cb += b.get(d);
        if ca > cb + ORDER_TOL {
            return false;
        }
    }
    true
}

fn identical(a: &DegreeDist, b: &DegreeDist) -> bool {
    let n = a.probs.len().max(b.probs.len());
    (0..n).all(|d| (a.get(d) - b.get(d)).abs() < ORDER_TOL)
}

/// Weakly-more-connected ordering between the two types.
///
/// Equal degree laws give `Equal`. Otherwise a type is more connected when its
/// degree law first-order dominates the other's and, unless `q_h = 1 - q_l`,
/// its forward law dominates as well.
pub fn is_more_connected(laws: &DegreeLaws) -> Result<Connectivity> {
    if identical(&laws.p_h, &laws.p_l) {
        return Ok(Connectivity::Equal);
    }
    let need_forward = (laws.q_h - (1.0 - laws.q_l)).abs() > 1e-12;
    let forward = if need_forward {
        Some((forward_dist(&laws.p_h)?, forward_dist(&laws.p_l)?))
    } else {
        None
    };
    let h_more = dominates(&laws.p_h, &laws.p_l)
        && forward.as_ref().is_none_or(|(fh, fl)| dominates(fh, fl));
    let l_more = dominates(&laws.p_l, &laws.p_h)
        && forward.as_ref().is_none_or(|(fh, fl)| dominates(fl, fh));
    Ok(match (h_more, l_more) {
        (true, false) => Connectivity::HMore,
        (false, true) => Connectivity::LMore,
        (true, true) => Connectivity::Equal,
        (false, false) => Connectivity::Incomparable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Connectedness, ModelParams};

    #[test]
    fn island_unit_connectedness_is_poisson_one() {
        let p = ModelParams::island(0.5, 1.0, 1.0);
        let laws = compute_degree_dists(&p, 1e-9, 64).unwrap();
        assert!((laws.p_h.get(0) - (-1.0f64).exp()).abs() < 1e-12);
        assert!((laws.p_h.get(0) - 0.367879).abs() < 1e-6);
        for d in 0..20 {
            let direct = (-1.0f64).exp() / (1..=d).map(|k| k as f64).product::<f64>();
            assert!((laws.p_l.get(d) - direct).abs() < 1e-14);
        }
        assert!((laws.q_h - 0.5).abs() < 1e-15);
        assert!((laws.q_l - 0.5).abs() < 1e-15);
        assert!(laws.d_max() >= 64);
        assert!(laws.p_h.tail_mass < 1e-9);
    }

    #[test]
    fn same_type_probability_substitution() {
        let p = ModelParams::island(0.3, 2.0, 0.5);
        let laws = compute_degree_dists(&p, 1e-9, 64).unwrap();
        assert!((laws.q_h - 0.6 / 1.3).abs() < 1e-12);
        assert!((laws.q_h - 0.461538).abs() < 1e-6);
    }

    #[test]
    fn zero_connectedness_is_degenerate() {
        let p = ModelParams::island(0.5, 0.0, 1.0);
        let laws = compute_degree_dists(&p, 1e-9, 64).unwrap();
        assert!(laws.degenerate);
        assert_eq!(laws.p_h.get(0), 1.0);
        assert_eq!(laws.p_l.get(0), 1.0);
    }

    #[test]
    fn tail_cutoff_checked() {
        let p = ModelParams::island(0.5, 1.0, 1.0);
        assert!(compute_degree_dists(&p, 0.1, 64).is_err());
    }

    #[test]
    fn forward_examples() {
        let pois: Vec<f64> = (0..80).map(|d| poisson_pmf(d, 2.0)).collect();
        let f = forward_dist(&DegreeDist::from_probs(pois.clone())).unwrap();
        for d in 0..60 {
            assert!((f.get(d) - pois[d]).abs() < 1e-12);
        }

        let f = forward_dist(&DegreeDist::from_probs(vec![0.0, 1.0])).unwrap();
        assert_eq!(f.probs, vec![1.0]);

        let f = forward_dist(&DegreeDist::from_probs(vec![0.0, 0.5, 0.5])).unwrap();
        assert!((f.get(0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((f.get(1) - 2.0 / 3.0).abs() < 1e-15);

        assert!(matches!(
            forward_dist(&DegreeDist::from_probs(vec![1.0])),
            Err(Error::ForwardUndefined)
        ));
    }

    #[test]
    fn connectivity_examples() {
        let p = ModelParams::island(0.5, 1.5, 1.0);
        let laws = compute_degree_dists(&p, 1e-9, 64).unwrap();
        assert_eq!(is_more_connected(&laws).unwrap(), Connectivity::Equal);

        let p = ModelParams::island(0.7, 1.5, 0.5);
        let laws = compute_degree_dists(&p, 1e-9, 64).unwrap();
        assert_eq!(is_more_connected(&laws).unwrap(), Connectivity::HMore);

        let p = ModelParams::island(0.3, 1.5, 0.5);
        let laws = compute_degree_dists(&p, 1e-9, 64).unwrap();
        assert_eq!(is_more_connected(&laws).unwrap(), Connectivity::LMore);
    }

    #[test]
    fn crossing_degree_laws_are_incomparable() {
        // Believers: a spread mixture (many isolated, some hubs). Sceptics: all
        // at a middle connectedness. Same mean, so the CDFs must cross.
        let mut p = ModelParams::island(0.5, 1.0, 1.0);
        p.f_h = Connectedness::from_pairs(&[(0.1, 0.5), (1.9, 0.5)]).unwrap();
        p.f_l = Connectedness::point(1.0);
        let laws = compute_degree_dists(&p, 1e-9, 64).unwrap();
        let (ch, cl) = (laws.p_h.cdf(), laws.p_l.cdf());
        let h_below = (0..ch.len()).any(|d| ch[d] < cl[d] - 1e-6);
        let h_above = (0..ch.len()).any(|d| ch[d] > cl[d] + 1e-6);
        assert!(h_below && h_above, "oracle: CDFs should cross");
        assert_eq!(is_more_connected(&laws).unwrap(), Connectivity::Incomparable);
    }

    #[test]
    fn homophily_recovered_from_same_type_probs() {
        for &(g, q) in &[(0.3, 0.5), (0.6, 0.9), (0.5, 0.2)] {
            let mut p = ModelParams::island(g, 1.3, q);
            p.f_l = Connectedness::from_pairs(&[(0.5, 0.4), (2.0, 0.6)]).unwrap();
            let laws = compute_degree_dists(&p, 1e-9, 64).unwrap();
            let back =
                ((1.0 - laws.q_h) * (1.0 - laws.q_l) / (laws.q_h * laws.q_l)).sqrt();
            assert!((back - q).abs() < 1e-10);
        }
    }
}
