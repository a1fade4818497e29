use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limits::degree::expected_degree;
use crate::limits::kernel::classes;
use crate::model::{ModelParams, ReceiverType};
use crate::rng::RngSpec;

/// Monte Carlo component-size law of the local branching process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchingEstimate {
    /// `probs[m]` estimates `P(size = m)`; index 0 is unused.
    pub probs: Vec<f64>,
    pub se: Vec<f64>,
    /// Fraction of samples whose tree grew past `m_max`.
    pub exceeded: f64,
    pub samples: usize,
}

struct Offspring {
    class_type: Vec<ReceiverType>,
    counts: Vec<Option<Poisson<f64>>>,
    pick: [Option<WeightedIndex<f64>>; 2],
}

impl Offspring {
    fn new(params: &ModelParams) -> Self {
        let cls = classes(params, false);
        let counts = cls
            .iter()
            .map(|c| {
                let m = expected_degree(params, c.ty, c.lambda);
                (m > 0.0).then(|| Poisson::new(m).expect("positive finite mean"))
            })
            .collect();
        let pick = ReceiverType::ALL.map(|t| {
            let w: Vec<f64> = cls
                .iter()
                .map(|c| params.affinity(t, c.ty) * c.lambda * c.weight)
                .collect();
            WeightedIndex::new(&w).ok()
        });
        Offspring {
            class_type: cls.iter().map(|c| c.ty).collect(),
            counts,
            pick,
        }
    }

    /// Size of the tree rooted at a type-`t` node with `d` children, or
    /// `None` once it exceeds `m_max`.
    fn sample<R: Rng>(&self, rng: &mut R, t: ReceiverType, d: usize, m_max: usize) -> Option<usize> {
        let mut size = 1 + d;
        if size > m_max {
            return None;
        }
        let mut pending: Vec<usize> = Vec::with_capacity(m_max);
        let root_pick = self.pick[t.index()].as_ref()?;
        for _ in 0..d {
            pending.push(root_pick.sample(rng));
        }
        while let Some(j) = pending.pop() {
            let k = match &self.counts[j] {
                Some(p) => p.sample(rng) as usize,
                None => 0,
            };
            size += k;
            if size > m_max {
                return None;
            }
            if k > 0 {
                let pick = self.pick[self.class_type[j].index()].as_ref()?;
                for _ in 0..k {
                    pending.push(pick.sample(rng));
                }
            }
        }
        Some(size)
    }
}

/// Component-size distribution of a type-`t` root with `d` offspring.
///
/// The root's own connectedness `lambda` only enters through `d`; it is
/// checked against the model's atoms.
pub fn branching_size_dist(
    params: &ModelParams,
    t: ReceiverType,
    d: usize,
    lambda: f64,
    m_max: usize,
    samples: usize,
    rng: &RngSpec,
) -> Result<BranchingEstimate> {
    params.validate()?;
    if samples == 0 {
        return Err(Error::InvalidParams("samples must be at least 1".into()));
    }
    if !params.connectedness(t).atoms().iter().any(|a| a.lambda == lambda) {
        return Err(Error::InvalidParams(format!(
            "λ = {lambda} is not an atom of f_{t}"
        )));
    }
    let off = Offspring::new(params);
    if d > 0 && off.pick[t.index()].is_none() {
        return Err(Error::InvalidParams(format!(
            "a type-{t} node has no neighbours, so degree {d} has probability zero"
        )));
    }
    let sizes: Vec<Option<usize>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut r = rng.stream("branching", i);
            off.sample(&mut r, t, d, m_max)
        })
        .collect();

    let mut counts = vec![0u64; m_max + 1];
    let mut big = 0u64;
    for s in sizes {
        match s {
            Some(m) => counts[m] += 1,
            None => big += 1,
        }
    }
    let n = samples as f64;
    let probs: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    let se = probs.iter().map(|p| (p * (1.0 - p) / n).sqrt()).collect();
    Ok(BranchingEstimate {
        probs,
        se,
        exceeded: big as f64 / n,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::ln_gamma;

    /// Total progeny of `d` independent Poisson(μ) Galton–Watson trees.
    fn borel_tanner(j: usize, d: usize, mu: f64) -> f64 {
        if j < d {
            return 0.0;
        }
        if d == 0 {
            return f64::from(u8::from(j == 0));
        }
        let (jf, df) = (j as f64, d as f64);
        let ln = (df / jf).ln() - mu * jf + (jf - df) * (mu * jf).ln() - ln_gamma(jf - df + 1.0);
        ln.exp()
    }

    #[test]
    fn isolated_root() {
        let p = ModelParams::island(1.0, 2f64.sqrt(), 1.0);
        let est = branching_size_dist(&p, ReceiverType::H, 0, 2f64.sqrt(), 10, 100, &RngSpec::new(1))
            .unwrap();
        assert_eq!(est.probs[1], 1.0);
        assert_eq!(est.exceeded, 0.0);
    }

    #[test]
    fn matches_borel_tanner() {
        let p = ModelParams::island(1.0, 2f64.sqrt(), 1.0);
        for d in [1usize, 2] {
            let est =
                branching_size_dist(&p, ReceiverType::H, d, 2f64.sqrt(), 12, 60_000, &RngSpec::new(9))
                    .unwrap();
            let total: f64 = est.probs.iter().sum::<f64>() + est.exceeded;
            assert!((total - 1.0).abs() < 1e-12);
            for m in 1..=12 {
                let exact = if m == 0 { 0.0 } else { borel_tanner(m - 1, d, 2.0) };
                let tol = 5.0 * (exact * (1.0 - exact) / 60_000.0).sqrt() + 1e-3;
                assert!(
                    (est.probs[m] - exact).abs() < tol,
                    "d={d} m={m}: {} vs {exact}",
                    est.probs[m]
                );
            }
        }
        // Size two from one child means the child is a leaf.
        assert!((borel_tanner(1, 1, 2.0) - (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn thread_count_does_not_matter() {
        let p = ModelParams::island(0.5, 1.3, 0.6);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| {
                    branching_size_dist(&p, ReceiverType::L, 2, 1.3, 15, 3000, &RngSpec::new(4))
                        .unwrap()
                })
        };
        assert_eq!(run(1), run(3));
    }
}
