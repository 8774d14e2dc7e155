mod common;

use common::{f_cdf_oracle, normal_sample, t_cdf_oracle, F_PROBES, T_PROBES};
use oc_lab::stats::dist::{f_cdf, t_cdf};
use oc_lab::stats::{anova_oneway, mean_ci, pooled_t_test, tukey_hsd, GroupSample};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn t_and_f_match_quadrature_oracle() {
    for (t, df) in T_PROBES {
        let (got, want) = (t_cdf(t, df), t_cdf_oracle(t, df));
        assert!((got - want).abs() < 1e-6, "t_cdf({t}, {df}) = {got}, oracle {want}");
    }
    for (f, d1, d2) in F_PROBES {
        let (got, want) = (f_cdf(f, d1, d2), f_cdf_oracle(f, d1, d2));
        assert!((got - want).abs() < 1e-6, "f_cdf({f}, {d1}, {d2}) = {got}, oracle {want}");
    }
}

#[test]
fn two_group_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [3, 10, 30] {
        let a = normal_sample(&mut rng, n);
        let b: Vec<f64> = normal_sample(&mut rng, n + 2).iter().map(|x| x + 0.5).collect();
        let groups = [GroupSample::new("a", a.clone()), GroupSample::new("b", b.clone())];
        let anova = anova_oneway(&groups).unwrap();
        let t = pooled_t_test(&a, &b).unwrap();
        assert!((anova.f - t.t * t.t).abs() <= 1e-9 * anova.f.max(1.0));
        assert!((anova.p - t.p).abs() < 1e-9);
        let tukey = tukey_hsd(&groups, 0.05).unwrap();
        assert!((tukey[0].p - t.p).abs() < 1e-3, "tukey {} t {}", tukey[0].p, t.p);
    }
}

#[test]
fn separated_groups_are_all_significant() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let groups: Vec<GroupSample> = (0..4)
        .map(|i| {
            let v = normal_sample(&mut rng, 30).iter().map(|x| x + 10.0 * f64::from(i)).collect();
            GroupSample::new(format!("g{i}"), v)
        })
        .collect();
    let pairs = tukey_hsd(&groups, 0.001).unwrap();
    assert_eq!(pairs.len(), 6);
    assert!(pairs.iter().all(|p| p.p < 0.001 && p.significant));
}

#[test]
fn ci_covers_at_nominal_rate() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let trials = 2000;
    let covered = (0..trials)
        .filter(|_| {
            let ci = mean_ci(&normal_sample(&mut rng, 12), 0.95).unwrap();
            ci.lower <= 0.0 && 0.0 <= ci.upper
        })
        .count();
    let rate = covered as f64 / f64::from(trials);
    assert!((0.935..=0.965).contains(&rate), "coverage {rate}");
}
