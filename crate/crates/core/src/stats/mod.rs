//! Confidence intervals, one-way ANOVA, Tukey HSD, and sweep deltas.

pub mod dist;
pub mod special;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A labelled sample of observations.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSample {
    pub label: String,
    pub values: Vec<f64>,
}

impl GroupSample {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            label: label.into(),
            values,
        }
    }

    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseResult {
    pub labels: (String, String),
    pub mean_diff: f64,
    pub q: f64,
    pub p: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanCi {
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnovaResult {
    pub f: f64,
    pub df_between: f64,
    pub df_within: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    pub p: f64,
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Unbiased sample variance.
pub fn variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (values.len() as f64 - 1.0)
}

/// Student-t confidence interval for the mean.
pub fn mean_ci(values: &[f64], level: f64) -> Result<MeanCi> {
    if values.len() < 2 {
        return Err(Error::Domain(format!(
            "confidence interval needs at least 2 values, got {}",
            values.len()
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!("confidence level {level} is outside (0, 1)")));
    }
    let n = values.len() as f64;
    let m = mean(values);
    let sd = variance(values).sqrt();
    let half = dist::t_quantile(0.5 * (1.0 + level), n - 1.0) * sd / n.sqrt();
    Ok(MeanCi {
        mean: m,
        lower: m - half,
        upper: m + half,
    })
}

fn check_groups(groups: &[GroupSample]) -> Result<()> {
    if groups.len() < 2 {
        return Err(Error::Domain("need at least two groups".into()));
    }
    if let Some(g) = groups.iter().find(|g| g.values.len() < 2) {
        return Err(Error::Domain(format!("group {:?} has fewer than 2 values", g.label)));
    }
    if groups.iter().flat_map(|g| &g.values).any(|x| !x.is_finite()) {
        return Err(Error::Domain("non-finite observation".into()));
    }
    Ok(())
}

/// Within-group sum of squares and its degrees of freedom.
fn within(groups: &[GroupSample]) -> (f64, f64) {
    let ss = groups
        .iter()
        .map(|g| {
            let m = g.mean();
            g.values.iter().map(|x| (x - m).powi(2)).sum::<f64>()
        })
        .sum();
    let n: usize = groups.iter().map(|g| g.values.len()).sum();
    (ss, (n - groups.len()) as f64)
}

pub fn anova_oneway(groups: &[GroupSample]) -> Result<AnovaResult> {
    check_groups(groups)?;
    let all: Vec<f64> = groups.iter().flat_map(|g| g.values.iter().copied()).collect();
    let grand = mean(&all);
    if all.iter().all(|&x| x == all[0]) {
        return Err(Error::DegenerateVariance("all observations are identical".into()));
    }
    let ssb: f64 = groups
        .iter()
        .map(|g| g.values.len() as f64 * (g.mean() - grand).powi(2))
        .sum();
    let (ssw, df_within) = within(groups);
    let df_between = (groups.len() - 1) as f64;
    let f = if ssw == 0.0 {
        f64::INFINITY
    } else {
        (ssb / df_between) / (ssw / df_within)
    };
    Ok(AnovaResult {
        f,
        df_between,
        df_within,
        p: dist::f_sf(f, df_between, df_within),
    })
}

/// Pooled-variance two-sample t test, two-sided.
pub fn pooled_t_test(a: &[f64], b: &[f64]) -> Result<TTest> {
    let groups = [GroupSample::new("a", a.to_vec()), GroupSample::new("b", b.to_vec())];
    check_groups(&groups)?;
    let (ssw, df) = within(&groups);
    if ssw == 0.0 {
        return Err(Error::DegenerateVariance("both samples are constant".into()));
    }
    let sp2 = ssw / df;
    let se = (sp2 * (1.0 / a.len() as f64 + 1.0 / b.len() as f64)).sqrt();
    let t = (mean(a) - mean(b)) / se;
    Ok(TTest {
        t,
        df,
        p: dist::t_two_sided_p(t, df),
    })
}

/// Studentized range statistic for every pair under a pooled variance.
fn pair_statistics(groups: &[GroupSample], msw: f64) -> Vec<(usize, usize, f64, f64)> {
    let means: Vec<f64> = groups.iter().map(GroupSample::mean).collect();
    let mut out = Vec::with_capacity(groups.len() * (groups.len() - 1) / 2);
    for i in 0..groups.len() {
        for j in (i + 1)..groups.len() {
            let ni = groups[i].values.len() as f64;
            let nj = groups[j].values.len() as f64;
            let diff = means[i] - means[j];
            let se = (0.5 * msw * (1.0 / ni + 1.0 / nj)).sqrt();
            out.push((i, j, diff, diff.abs() / se));
        }
    }
    out
}

fn pooled_msw(groups: &[GroupSample]) -> Result<(f64, f64)> {
    let (ssw, df) = within(groups);
    if ssw <= 0.0 || df <= 0.0 {
        return Err(Error::DegenerateVariance("pooled within-group variance is zero".into()));
    }
    Ok((ssw / df, df))
}

/// Tukey's honestly significant difference test over all pairs.
///
/// p values come from the studentized range distribution with `k` groups
/// and the pooled within-group degrees of freedom.
pub fn tukey_hsd(groups: &[GroupSample], alpha: f64) -> Result<Vec<PairwiseResult>> {
    check_groups(groups)?;
    let (msw, df) = pooled_msw(groups)?;
    let k = groups.len() as u32;
    let results: Vec<PairwiseResult> = pair_statistics(groups, msw)
        .into_iter()
        .map(|(i, j, diff, q)| {
            let p = dist::ptukey_sf(q, k, df);
            PairwiseResult {
                labels: (groups[i].label.clone(), groups[j].label.clone()),
                mean_diff: diff,
                q,
                p,
                significant: p < alpha,
            }
        })
        .collect();
    debug_assert_eq!(results.len(), groups.len() * (groups.len() - 1) / 2);
    Ok(results)
}

/// Permutation version of [`tukey_hsd`] for cross-checking p values.
///
/// Each pair's p value is the fraction of label permutations whose largest
/// pairwise q reaches the observed q, with the usual +1 correction.
pub fn tukey_hsd_permutation(
    groups: &[GroupSample],
    alpha: f64,
    permutations: usize,
    seed: u64,
) -> Result<Vec<PairwiseResult>> {
    check_groups(groups)?;
    let (msw, _) = pooled_msw(groups)?;
    let observed = pair_statistics(groups, msw);
    let sizes: Vec<usize> = groups.iter().map(|g| g.values.len()).collect();
    let mut pool: Vec<f64> = groups.iter().flat_map(|g| g.values.iter().copied()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut exceed = vec![0usize; observed.len()];
    let mut shuffled = groups.to_vec();
    for _ in 0..permutations {
        pool.shuffle(&mut rng);
        let mut start = 0;
        for (g, &n) in shuffled.iter_mut().zip(&sizes) {
            g.values.clear();
            g.values.extend_from_slice(&pool[start..start + n]);
            start += n;
        }
        let Ok((msw_perm, _)) = pooled_msw(&shuffled) else {
            continue;
        };
        let max_q = pair_statistics(&shuffled, msw_perm)
            .iter()
            .map(|p| p.3)
            .fold(0.0, f64::max);
        for (count, obs) in exceed.iter_mut().zip(&observed) {
            if max_q >= obs.3 {
                *count += 1;
            }
        }
    }
    Ok(observed
        .into_iter()
        .zip(exceed)
        .map(|((i, j, diff, q), count)| {
            let p = (count + 1) as f64 / (permutations + 1) as f64;
            PairwiseResult {
                labels: (groups[i].label.clone(), groups[j].label.clone()),
                mean_diff: diff,
                q,
                p,
                significant: p < alpha,
            }
        })
        .collect())
}

/// Differences between adjacent means of a series sorted by `x`.
pub fn marginal_improvements(series: &[(f64, f64)]) -> Result<Vec<f64>> {
    if series.len() < 2 {
        return Err(Error::Domain("series needs at least two points".into()));
    }
    if series.windows(2).any(|w| w[1].0 < w[0].0) {
        return Err(Error::Domain("series is not sorted by x".into()));
    }
    Ok(series.windows(2).map(|w| w[1].1 - w[0].1).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(label: &str, v: &[f64]) -> GroupSample {
        GroupSample::new(label, v.to_vec())
    }

    #[test]
    fn ci_examples() {
        let ci = mean_ci(&[0.0, 1.0], 0.95).unwrap();
        assert_eq!(ci.mean, 0.5);
        assert!(((ci.upper - 0.5) - (0.5 - ci.lower)).abs() < 1e-12);
        let ci = mean_ci(&[0.3, 0.3, 0.3], 0.95).unwrap();
        assert_eq!((ci.mean, ci.lower, ci.upper), (0.3, 0.3, 0.3));
        assert!(mean_ci(&[1.0], 0.95).is_err());
        assert!(mean_ci(&[1.0, 2.0], 1.0).is_err());
    }

    #[test]
    fn ci_half_width_for_thirty() {
        let values: Vec<f64> = (0..30).map(|i| ((i * 7919) % 31) as f64 / 10.0).collect();
        let ci = mean_ci(&values, 0.95).unwrap();
        let sd = variance(&values).sqrt();
        let expected = 2.0452 * sd / 30f64.sqrt();
        assert!(((ci.upper - ci.mean) - expected).abs() < 1e-3);
    }

    #[test]
    fn anova_examples() {
        let r = anova_oneway(&[g("a", &[1.0, 2.0, 3.0]), g("b", &[1.0, 2.0, 3.0])]).unwrap();
        assert_eq!(r.f, 0.0);
        assert_eq!(r.p, 1.0);

        // SSB = 13.5, SSW = 4, df = (1, 4)
        let r = anova_oneway(&[g("a", &[1.0, 2.0, 3.0]), g("b", &[4.0, 5.0, 6.0])]).unwrap();
        assert!((r.f - 13.5).abs() < 1e-12);
        assert_eq!((r.df_between, r.df_within), (1.0, 4.0));
        assert!((r.p - 0.021_311_641_128_756_5).abs() < 1e-9);

        let err = anova_oneway(&[g("a", &[2.0, 2.0]), g("b", &[2.0, 2.0])]).unwrap_err();
        assert!(matches!(err, Error::DegenerateVariance(_)));
        assert!(anova_oneway(&[g("a", &[1.0, 2.0])]).is_err());
    }

    #[test]
    fn anova_two_groups_is_t_squared() {
        let a = [0.2, 0.9, 1.4, 0.3, 0.8];
        let b = [1.1, 1.9, 1.2, 2.6];
        let f = anova_oneway(&[g("a", &a), g("b", &b)]).unwrap();
        let t = pooled_t_test(&a, &b).unwrap();
        assert!((f.f - t.t * t.t).abs() <= 1e-9 * f.f);
        assert!((f.p - t.p).abs() < 1e-12);
    }

    #[test]
    fn tukey_two_groups_matches_t_test() {
        let a = [3.1, 2.7, 3.3, 2.9, 3.6, 3.0];
        let b = [3.9, 3.4, 4.2, 3.5, 3.3, 4.0];
        let pairs = tukey_hsd(&[g("a", &a), g("b", &b)], 0.05).unwrap();
        assert_eq!(pairs.len(), 1);
        let t = pooled_t_test(&a, &b).unwrap();
        assert!((pairs[0].q - std::f64::consts::SQRT_2 * t.t.abs()).abs() < 1e-12);
        assert!((pairs[0].p - t.p).abs() < 1e-3);
    }

    #[test]
    fn tukey_pair_count_and_bounds() {
        let groups = [
            g("a", &[1.0, 1.2, 0.9]),
            g("b", &[2.0, 2.1, 1.8]),
            g("c", &[1.1, 1.0, 1.3]),
            g("d", &[5.0, 5.5, 4.9]),
        ];
        let pairs = tukey_hsd(&groups, 0.05).unwrap();
        assert_eq!(pairs.len(), 6);
        assert!(pairs.iter().all(|p| (0.0..=1.0).contains(&p.p)));
        assert_eq!(pairs[0].labels, ("a".to_string(), "b".to_string()));
        let ad = pairs.iter().find(|p| p.labels.1 == "d" && p.labels.0 == "a").unwrap();
        assert!(ad.significant);
        let ac = pairs.iter().find(|p| p.labels == ("a".into(), "c".into())).unwrap();
        assert!(!ac.significant);

        let flat = [g("a", &[1.0, 1.0]), g("b", &[2.0, 2.0])];
        assert!(matches!(tukey_hsd(&flat, 0.05), Err(Error::DegenerateVariance(_))));
    }

    #[test]
    fn permutation_tukey_agrees_roughly() {
        let groups = [
            g("a", &[1.0, 1.4, 0.7, 1.1, 0.9, 1.2]),
            g("b", &[1.6, 1.9, 1.3, 2.0, 1.5, 1.7]),
            g("c", &[1.1, 0.8, 1.3, 1.0, 1.2, 0.9]),
        ];
        let exact = tukey_hsd(&groups, 0.05).unwrap();
        let perm = tukey_hsd_permutation(&groups, 0.05, 4000, 1).unwrap();
        for (e, p) in exact.iter().zip(&perm) {
            assert_eq!(e.labels, p.labels);
            assert!((e.p - p.p).abs() < 0.03, "{:?}: {} vs {}", e.labels, e.p, p.p);
        }
    }

    #[test]
    fn marginal_examples() {
        let d = marginal_improvements(&[(0.0, 0.1), (0.1, 0.6), (0.2, 0.8)]).unwrap();
        assert!((d[0] - 0.5).abs() < 1e-12 && (d[1] - 0.2).abs() < 1e-12);
        assert_eq!(marginal_improvements(&[(0.0, 0.4), (1.0, 0.4), (2.0, 0.4)]).unwrap(), vec![0.0, 0.0]);
        assert!(marginal_improvements(&[(1.0, 0.0), (0.0, 1.0)]).is_err());
        assert!(marginal_improvements(&[(1.0, 0.0)]).is_err());
    }
}
