//! Performance and contribution-disparity measures.

use serde::{Deserialize, Serialize};

use crate::engine::RunResult;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsFrame {
    /// Fraction of needs met in the measurement window.
    pub performance: f64,
    /// Value out per unit of cost in; `+inf` when value accrued at zero cost.
    pub efficiency: f64,
    pub gini: f64,
    /// Share of all contributions made by the top 20% of agents.
    pub top20_share: f64,
}

impl MetricsFrame {
    pub fn compute(r: &RunResult) -> Result<Self> {
        Ok(Self {
            performance: performance(r)?,
            efficiency: efficiency(r),
            gini: contribution_gini(&r.contributions),
            top20_share: top_share(&r.contributions, 0.2)?,
        })
    }
}

pub fn performance(r: &RunResult) -> Result<f64> {
    if r.window_needs_total == 0 {
        return Err(Error::config("warmup", "measurement window is empty"));
    }
    Ok((r.window_needs_met_commons + r.window_needs_met_self) as f64 / r.window_needs_total as f64)
}

pub fn efficiency(r: &RunResult) -> f64 {
    match (r.total_value_out, r.total_cost_in) {
        (v, c) if c > 0.0 => v / c,
        (v, _) if v > 0.0 => f64::INFINITY,
        _ => 0.0,
    }
}

/// Gini coefficient of non-negative counts; 0 for an all-zero sequence.
///
/// Uses the rank form `sum((2i - n - 1) x_(i)) / (n * sum(x))` over the
/// ascending order statistics, which equals the mean-absolute-difference
/// definition.
pub fn contribution_gini(counts: &[u64]) -> f64 {
    let n = counts.len();
    let total: u64 = counts.iter().sum();
    if n == 0 || total == 0 {
        return 0.0;
    }
    let mut sorted = counts.to_vec();
    sorted.sort_unstable();
    let n_f = n as f64;
    let weighted: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| (2.0 * (i as f64 + 1.0) - n_f - 1.0) * x as f64)
        .sum();
    weighted / (n_f * total as f64)
}

/// Share of the total held by the largest `ceil(q * n)` entries.
pub fn top_share(counts: &[u64], q: f64) -> Result<f64> {
    if counts.is_empty() {
        return Err(Error::Domain("top_share of an empty sequence".into()));
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::Domain(format!("top_share fraction {q} is outside (0, 1]")));
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Ok(0.0);
    }
    let k = ((q * counts.len() as f64).ceil() as usize).clamp(1, counts.len());
    let mut sorted = counts.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let top: u64 = sorted[..k].iter().sum();
    Ok(top as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelParams, PopulationMix};

    fn pairwise_gini(x: &[u64]) -> f64 {
        let n = x.len() as f64;
        let mean = x.iter().sum::<u64>() as f64 / n;
        let mut s = 0.0;
        for &a in x {
            for &b in x {
                s += (a as f64 - b as f64).abs();
            }
        }
        s / (2.0 * n * n * mean)
    }

    fn result(met_c: u64, met_s: u64, total: u64, value: f64, cost: f64) -> RunResult {
        RunResult {
            params: ModelParams::default(),
            mix: PopulationMix::general(),
            seed: 0,
            window_needs_total: total,
            window_needs_met_commons: met_c,
            window_needs_met_self: met_s,
            total_value_out: value,
            total_cost_in: cost,
            contributions: vec![1, 2],
            commons_in: 3,
            commons_out: 0,
            metrics: MetricsFrame::default(),
        }
    }

    #[test]
    fn performance_cases() {
        assert_eq!(performance(&result(10, 0, 10, 0.0, 0.0)).unwrap(), 1.0);
        assert_eq!(performance(&result(0, 0, 10, 0.0, 0.0)).unwrap(), 0.0);
        assert_eq!(performance(&result(300, 200, 1000, 0.0, 0.0)).unwrap(), 0.5);
        assert_eq!(performance(&result(0, 0, 0, 0.0, 0.0)).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn efficiency_cases() {
        assert!((efficiency(&result(0, 0, 1, 100.0, 30.0)) - 10.0 / 3.0).abs() < 1e-12);
        assert_eq!(efficiency(&result(0, 0, 1, 0.0, 0.0)), 0.0);
        assert_eq!(efficiency(&result(0, 0, 1, 5.0, 0.0)), f64::INFINITY);
    }

    #[test]
    fn gini_examples() {
        assert_eq!(contribution_gini(&[5, 5, 5, 5]), 0.0);
        assert!((contribution_gini(&[0, 0, 0, 12]) - 0.75).abs() < 1e-15);
        // pairwise |xi - xj| over [1,2,3,4] sums to 20; 20 / (2 * 16 * 2.5)
        assert!((pairwise_gini(&[1, 2, 3, 4]) - 0.25).abs() < 1e-15);
        assert!((contribution_gini(&[1, 2, 3, 4]) - 0.25).abs() < 1e-15);
        assert_eq!(contribution_gini(&[0, 0, 0]), 0.0);
    }

    #[test]
    fn gini_matches_pairwise_definition() {
        let samples: [&[u64]; 4] = [&[3, 0, 9, 1, 1], &[1000, 0, 0, 20, 7, 7, 300], &[2], &[0, 4]];
        for x in samples {
            assert!((contribution_gini(x) - pairwise_gini(x)).abs() < 1e-12, "{x:?}");
        }
    }

    #[test]
    fn top_share_examples() {
        assert_eq!(top_share(&[3, 1, 4, 1], 1.0).unwrap(), 1.0);
        assert_eq!(top_share(&[0, 0, 0, 12], 0.25).unwrap(), 1.0);
        assert_eq!(top_share(&[10, 5, 3, 2], 0.5).unwrap(), 0.75);
        assert!(top_share(&[], 0.5).is_err());
        assert!(top_share(&[1], 0.0).is_err());
    }
}
