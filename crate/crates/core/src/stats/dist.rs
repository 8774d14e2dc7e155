//! Student t, Fisher F, and studentized range distributions.

use super::special::{beta_inc, gauss_legendre, ln_beta, ln_gamma, normal_cdf, normal_pdf};

/// `P(T <= t)` for Student's t with `df` degrees of freedom.
pub fn t_cdf(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return if t > 0.0 { 1.0 } else { 0.0 };
    }
    let x = df / (df + t * t);
    let tail = 0.5 * beta_inc(0.5 * df, 0.5, x);
    if t > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

pub fn t_pdf(t: f64, df: f64) -> f64 {
    let ln = -0.5 * (df + 1.0) * (1.0 + t * t / df).ln() - 0.5 * df.ln() - ln_beta(0.5 * df, 0.5);
    ln.exp()
}

/// Two-sided p value `P(|T| >= |t|)`.
pub fn t_two_sided_p(t: f64, df: f64) -> f64 {
    if !t.is_finite() {
        return if t.is_nan() { f64::NAN } else { 0.0 };
    }
    beta_inc(0.5 * df, 0.5, df / (df + t * t))
}

/// Inverse of [`t_cdf`]: bracketing bisection polished by Newton steps.
pub fn t_quantile(p: f64, df: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "t quantile needs p in (0, 1)");
    if p == 0.5 {
        return 0.0;
    }
    let (mut lo, mut hi) = (-1.0, 1.0);
    while t_cdf(lo, df) > p {
        lo *= 2.0;
    }
    while t_cdf(hi, df) < p {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if t_cdf(mid, df) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 * (1.0 + mid.abs()) {
            break;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..3 {
        let step = (t_cdf(x, df) - p) / t_pdf(x, df);
        if !step.is_finite() {
            break;
        }
        x -= step;
    }
    x
}

/// `P(F <= f)` for the F distribution with `(d1, d2)` degrees of freedom.
pub fn f_cdf(f: f64, d1: f64, d2: f64) -> f64 {
    if f <= 0.0 {
        return 0.0;
    }
    if f.is_infinite() {
        return 1.0;
    }
    beta_inc(0.5 * d1, 0.5 * d2, d1 * f / (d1 * f + d2))
}

/// Upper tail `P(F > f)`, computed without cancellation.
pub fn f_sf(f: f64, d1: f64, d2: f64) -> f64 {
    if f <= 0.0 {
        return 1.0;
    }
    if f.is_infinite() {
        return 0.0;
    }
    beta_inc(0.5 * d2, 0.5 * d1, d2 / (d2 + d1 * f))
}

/// Beyond this range the normal kernel is below 1e-16.
const Z_LIMIT: f64 = 8.5;
const INNER_PANELS: usize = 12;
const OUTER_PANELS: usize = 32;

/// `P(range of k standard normals <= w)`.
fn range_cdf_normal(w: f64, k: u32) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    let km1 = (k - 1) as i32;
    let inner = gauss_legendre(
        |z| {
            let band = normal_cdf(z) - normal_cdf(z - w);
            normal_pdf(z) * band.max(0.0).powi(km1)
        },
        -Z_LIMIT,
        Z_LIMIT,
        INNER_PANELS,
    );
    (f64::from(k) * inner).min(1.0)
}

/// CDF of the studentized range `Q(k, df)`.
///
/// Integrates the normal-range CDF against the density of `s = chi/sqrt(df)`.
/// The outer integral runs over `y = ln(chi^2)`, where the mixing density is
/// smooth and unimodal for every `df`.
pub fn ptukey(q: f64, k: u32, df: f64) -> f64 {
    assert!(k >= 2, "studentized range needs at least two groups");
    if q <= 0.0 {
        return 0.0;
    }
    if q.is_infinite() {
        return 1.0;
    }
    let half = 0.5 * df;
    let norm = half * std::f64::consts::LN_2 + ln_gamma(half);
    let mode = df.ln();
    let spread = (2.0 / df).sqrt();
    let lo = mode - (12.0 * spread).max(75.0 / df);
    let hi = mode + 12.0 * spread;
    let p = gauss_legendre(
        |y| {
            let density = (half * y - 0.5 * y.exp() - norm).exp();
            if density < 1e-300 {
                return 0.0;
            }
            let s = (0.5 * (y - mode)).exp();
            density * range_cdf_normal(q * s, k)
        },
        lo,
        hi,
        OUTER_PANELS,
    );
    p.clamp(0.0, 1.0)
}

/// Upper tail `P(Q > q)`.
pub fn ptukey_sf(q: f64, k: u32, df: f64) -> f64 {
    (1.0 - ptukey(q, k, df)).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_reference_points() {
        assert!((t_cdf(0.0, 5.0) - 0.5).abs() < 1e-15);
        // df = 1 is Cauchy
        assert!((t_cdf(1.0, 1.0) - 0.75).abs() < 1e-14);
        // df = 2 has closed form 1/2 + t / (2 sqrt(2 + t^2))
        let t: f64 = 1.7;
        assert!((t_cdf(t, 2.0) - (0.5 + t / (2.0 * (2.0 + t * t).sqrt()))).abs() < 1e-14);
    }

    #[test]
    fn t_quantile_inverts_cdf() {
        for &df in &[1.0, 3.0, 29.0, 200.0] {
            for &p in &[0.001, 0.2, 0.5, 0.975, 0.9999] {
                let x = t_quantile(p, df);
                assert!((t_cdf(x, df) - p).abs() < 1e-12, "df {df} p {p}");
            }
        }
        assert!((t_quantile(0.975, 29.0) - 2.045_229_642).abs() < 1e-6);
    }

    #[test]
    fn f_tails_complement() {
        for &(f, a, b) in &[(0.3, 2.0, 9.0), (4.0, 1.0, 4.0), (13.5, 1.0, 4.0)] {
            assert!((f_cdf(f, a, b) + f_sf(f, a, b) - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn f_with_one_numerator_df_is_squared_t() {
        for &(t, df) in &[(0.7, 4.0), (2.2, 12.0), (3.9, 40.0)] {
            let p_f = f_sf(t * t, 1.0, df);
            assert!((p_f - t_two_sided_p(t, df)).abs() < 1e-13);
        }
    }

    #[test]
    fn mixing_density_integrates_to_one() {
        for &df in &[1.0, 2.0, 5.0, 26.0, 116.0, 3626.0] {
            let half = 0.5 * df;
            let norm = half * std::f64::consts::LN_2 + ln_gamma(half);
            let mode = f64::ln(df);
            let spread = (2.0 / df).sqrt();
            let lo = mode - (12.0 * spread).max(75.0 / df);
            let hi = mode + 12.0 * spread;
            let total = gauss_legendre(|y| (half * y - 0.5 * y.exp() - norm).exp(), lo, hi, OUTER_PANELS);
            assert!((total - 1.0).abs() < 1e-9, "df {df}: {total}");
        }
    }

    #[test]
    fn ptukey_two_groups_is_scaled_t() {
        // Q(2, df) = sqrt(2) |T|
        for &df in &[2.0, 5.0, 30.0, 116.0] {
            for &t in &[0.3, 1.0, 2.5, 4.0] {
                let lhs = ptukey_sf(t * std::f64::consts::SQRT_2, 2, df);
                let rhs = t_two_sided_p(t, df);
                assert!((lhs - rhs).abs() < 1e-6, "df {df} t {t}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn ptukey_published_critical_values() {
        // Upper 5% points of the studentized range (standard tables).
        for &(q, k, df) in &[(3.578, 3, 20.0), (3.958, 4, 20.0), (3.737, 4, 60.0), (4.102, 5, 30.0)] {
            let p = ptukey_sf(q, k, df);
            assert!((p - 0.05).abs() < 5e-4, "q {q} k {k} df {df}: {p}");
        }
    }
}
