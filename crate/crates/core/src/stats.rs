use serde::{Deserialize, Serialize};

/// Compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut k = KahanSum::default();
        for x in iter {
            k.add(x);
        }
        k
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    /// Standard error of the mean; zero for a single observation.
    pub se: f64,
    pub count: usize,
}

impl MeanEstimate {
    pub fn of(xs: &[f64]) -> Self {
        let count = xs.len();
        if count == 0 {
            return MeanEstimate {
                mean: f64::NAN,
                se: f64::NAN,
                count,
            };
        }
        let n = count as f64;
        let mean = xs.iter().copied().collect::<KahanSum>().value() / n;
        let se = if count > 1 {
            let ss = xs.iter().map(|x| (x - mean).powi(2)).collect::<KahanSum>().value();
            (ss / (n - 1.0) / n).sqrt()
        } else {
            0.0
        };
        MeanEstimate { mean, se, count }
    }

    /// 95% normal confidence interval.
    pub fn ci95(&self) -> (f64, f64) {
        (self.mean - 1.96 * self.se, self.mean + 1.96 * self.se)
    }
}

/// `Σ_d |a_d - b_d|` over the union of supports.
pub fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| (a.get(i).copied().unwrap_or(0.0) - b.get(i).copied().unwrap_or(0.0)).abs())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_small_terms() {
        let mut k = KahanSum::default();
        k.add(1.0);
        for _ in 0..10_000 {
            k.add(1e-16);
        }
        assert!((k.value() - (1.0 + 1e-12)).abs() < 1e-15);
    }

    #[test]
    fn mean_and_se() {
        let m = MeanEstimate::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.mean, 2.5);
        assert!((m.se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!(MeanEstimate::of(&[7.0]).se, 0.0);
    }

    #[test]
    fn l1() {
        assert_eq!(l1_distance(&[0.5, 0.5], &[0.5, 0.25, 0.25]), 0.5);
    }
}
