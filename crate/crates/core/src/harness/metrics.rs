//! Summary statistics used to compare algorithm variants.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::MetricError;

/// Percentage by which `c1` exceeds the reference `c2`.
pub fn pdr(c1: f64, c2: f64) -> Result<f64, MetricError> {
    if !(c2 > 0.0) {
        return Err(MetricError::NonPositiveReference(c2));
    }
    Ok((c1 - c2) / c2 * 100.0)
}

/// Mean and sample standard deviation; the deviation of one value is 0.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    /// The first sample has significantly lower costs.
    Better,
    Equivalent,
    Worse,
}

impl Outcome {
    pub fn flipped(self) -> Self {
        match self {
            Outcome::Better => Outcome::Worse,
            Outcome::Equivalent => Outcome::Equivalent,
            Outcome::Worse => Outcome::Better,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankSum {
    /// Mann–Whitney U of the first sample.
    pub u: f64,
    pub z: f64,
    /// Two-sided p-value.
    pub p: f64,
    pub outcome: Outcome,
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 0 {
        (v[m - 1] + v[m]) / 2.0
    } else {
        v[m]
    }
}

/// Two-sided Wilcoxon rank-sum test on costs (lower is better).
///
/// Uses the normal approximation with tie and continuity corrections. When
/// significant at `alpha`, the sample with the lower median wins; equal
/// medians fall back to the rank sums.
pub fn rank_sum_test(a: &[f64], b: &[f64], alpha: f64) -> Result<RankSum, MetricError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(MetricError::TooFewSamples);
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let n = na + nb;
    let mut pooled: Vec<(f64, bool)> =
        a.iter().map(|&x| (x, true)).chain(b.iter().map(|&x| (x, false))).collect();
    pooled.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut rank_a = 0.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i;
        while j + 1 < pooled.len() && pooled[j + 1].0 == pooled[i].0 {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        rank_a += avg * pooled[i..=j].iter().filter(|x| x.1).count() as f64;
        i = j + 1;
    }
    let u = rank_a - na * (na + 1.0) / 2.0;
    let mu = na * nb / 2.0;
    let var = na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if var <= 0.0 {
        return Ok(RankSum { u, z: 0.0, p: 1.0, outcome: Outcome::Equivalent });
    }
    let diff = u - mu;
    let z = diff.signum() * (diff.abs() - 0.5).max(0.0) / var.sqrt();
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let p = (2.0 * (1.0 - std_normal.cdf(z.abs()))).min(1.0);
    let outcome = if p >= alpha {
        Outcome::Equivalent
    } else {
        let (ma, mb) = (median(a), median(b));
        if ma < mb || (ma == mb && u < mu) {
            Outcome::Better
        } else {
            Outcome::Worse
        }
    };
    Ok(RankSum { u, z, p, outcome })
}

/// Win/draw/loss counts of the first algorithm over paired instances.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wdl {
    pub win: usize,
    pub draw: usize,
    pub loss: usize,
}

impl Wdl {
    pub fn tally(outcomes: impl IntoIterator<Item = Outcome>) -> Self {
        let mut w = Wdl::default();
        for o in outcomes {
            match o {
                Outcome::Better => w.win += 1,
                Outcome::Equivalent => w.draw += 1,
                Outcome::Worse => w.loss += 1,
            }
        }
        w
    }
}

impl std::fmt::Display for Wdl {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}-{}-{}", self.win, self.draw, self.loss)
    }
}

/// Instances on which each algorithm attains the best `Best` value among
/// all algorithms (ties count for every tied algorithm).
pub fn no_best(best_per_algorithm: &[Vec<f64>]) -> Vec<usize> {
    let mut counts = vec![0; best_per_algorithm.len()];
    let n_inst = best_per_algorithm.iter().map(Vec::len).min().unwrap_or(0);
    for i in 0..n_inst {
        let lo = best_per_algorithm.iter().map(|b| b[i]).fold(f64::INFINITY, f64::min);
        for (a, b) in best_per_algorithm.iter().enumerate() {
            if b[i] == lo {
                counts[a] += 1;
            }
        }
    }
    counts
}
