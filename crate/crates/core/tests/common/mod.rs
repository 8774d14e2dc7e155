//! Independent reference implementations shared by the test targets.
#![allow(dead_code)]

use libm::lgamma;
use rand::Rng;
use rand_distr::StandardNormal;

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson(f, a, m, fa, flm, fm, left, (tol / 2.0).max(1e-15), depth - 1)
            + simpson(f, m, b, fm, frm, fb, right, (tol / 2.0).max(1e-15), depth - 1)
    }
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(f, a, b, fa, fm, fb, whole, 1e-13, 40)
}

/// Student t CDF by direct integration of the density.
pub fn t_cdf_oracle(t: f64, df: f64) -> f64 {
    let ln_c = lgamma(0.5 * (df + 1.0)) - lgamma(0.5 * df) - 0.5 * (df * std::f64::consts::PI).ln();
    let pdf = move |x: f64| (ln_c - 0.5 * (df + 1.0) * (1.0 + x * x / df).ln()).exp();
    let half = integrate(&pdf, 0.0, t.abs());
    if t >= 0.0 {
        0.5 + half
    } else {
        0.5 - half
    }
}

/// F CDF by integrating the density over `x = u^2`, which removes the
/// singularity at 0 for `d1 < 2`.
pub fn f_cdf_oracle(f: f64, d1: f64, d2: f64) -> f64 {
    let ln_c = 0.5 * d1 * (d1 / d2).ln() + lgamma(0.5 * (d1 + d2)) - lgamma(0.5 * d1) - lgamma(0.5 * d2);
    let integrand = move |u: f64| {
        if u == 0.0 {
            return if d1 == 1.0 { 2.0 * ln_c.exp() } else { 0.0 };
        }
        let x = u * u;
        let ln_pdf = ln_c + (0.5 * d1 - 1.0) * x.ln() - 0.5 * (d1 + d2) * (1.0 + d1 * x / d2).ln();
        2.0 * u * ln_pdf.exp()
    };
    integrate(&integrand, 0.0, f.sqrt())
}

/// Twenty probe points: ten `(t, df)` and ten `(f, d1, d2)`.
pub const T_PROBES: [(f64, f64); 10] = [
    (-3.5, 2.0),
    (-2.0, 5.0),
    (-0.7, 1.0),
    (0.0, 10.0),
    (0.3, 3.0),
    (1.0, 30.0),
    (1.96, 120.0),
    (2.5, 8.0),
    (4.0, 15.0),
    (6.0, 58.0),
];
pub const F_PROBES: [(f64, f64, f64); 10] = [
    (0.1, 1.0, 10.0),
    (0.5, 2.0, 20.0),
    (1.0, 3.0, 116.0),
    (1.5, 1.0, 58.0),
    (2.0, 5.0, 5.0),
    (3.0, 4.0, 30.0),
    (4.5, 2.0, 87.0),
    (0.8, 10.0, 12.0),
    (7.0, 3.0, 60.0),
    (12.0, 1.0, 4.0),
];

pub fn normal_sample<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}
