use crate::error::{Error, Result};
use crate::risk::{analytic_affine_risk, analytic_shift_risk};

const INV_PHI: f64 = 0.618_033_988_749_894_8;
const TOL: f64 = 1e-10;

/// Golden-section search on `[lo, hi]`. `gap(a, b)` must have the sign of `f(a) - f(b)`.
pub fn golden_section_by(mut lo: f64, mut hi: f64, tol: f64, gap: impl Fn(f64, f64) -> f64) -> f64 {
    for _ in 0..500 {
        if hi - lo <= tol {
            break;
        }
        let w = INV_PHI * (hi - lo);
        let c = hi - w;
        let d = lo + w;
        if gap(c, d) < 0.0 {
            hi = d;
        } else {
            lo = c;
        }
    }
    0.5 * (lo + hi)
}

fn affine_bracket(p: f64) -> (f64, f64) {
    let eps = 1e-12 * (1.0 / p).abs();
    if p > 0.0 {
        (-10.0, (1.0 / p - eps).min(10.0))
    } else {
        ((1.0 / p + eps).max(-10.0), 10.0)
    }
}

/// Minimizer over `c` of the exact risk of `x_min + c t`, `t ~ Gamma(m)`.
///
/// Comparisons use `f(a) - f(b)` in a cancellation-free form so the argmin
/// is resolved well below the square root of machine precision.
pub fn minimize_affine_risk(n_i: u32, m: u32, p: f64) -> Result<f64> {
    let n = f64::from(n_i);
    if !(n > p) || p == 0.0 || m < 1 {
        return Err(Error::invalid(format!(
            "affine risk oracle needs n_i > p, p != 0, m >= 1 (n_i = {n_i}, m = {m}, p = {p})"
        )));
    }
    let (lo, hi) = affine_bracket(p);
    let w = INV_PHI * (hi - lo);
    for probe in [hi - w, lo + w] {
        if !analytic_affine_risk(probe, n_i, m, p).is_ok_and(f64::is_finite) {
            return Err(Error::NonFiniteObjective { lo, hi });
        }
    }
    let a_coef = n / (n - p);
    let mf = f64::from(m);
    let gap = |a: f64, b: f64| {
        let one_minus_pa = 1.0 - p * a;
        let ua = -mf * (-p * a).ln_1p();
        let du = -mf * (-p * (b - a) / one_minus_pa).ln_1p();
        -(a_coef * ua.exp() * du.exp_m1() - p * mf * (b - a))
    };
    Ok(golden_section_by(lo, hi, TOL, gap))
}

/// Minimizer over `alpha` in `[-10 sigma, 10 sigma]` of the exact risk of `x_min + alpha`.
pub fn minimize_shift_risk(n_i: u32, sigma_i: f64, p: f64) -> f64 {
    let n = f64::from(n_i);
    assert!(n > p && p != 0.0 && sigma_i > 0.0);
    debug_assert!(analytic_shift_risk(0.0, n_i, sigma_i, p).is_finite());
    let a_coef = n / (n - p);
    let gap = |a: f64, b: f64| {
        let zb = p * b / sigma_i;
        let dz = p * (a - b) / sigma_i;
        a_coef * zb.exp() * dz.exp_m1() - dz
    };
    golden_section_by(-10.0 * sigma_i, 10.0 * sigma_i, TOL, gap)
}

/// Minimizer over `c` of the squared-error risk `E[(E/n + c G)^2]`, `G ~ Gamma(m)`.
pub fn minimize_squared_error_affine(n_i: u32, m: u32) -> f64 {
    let n = f64::from(n_i);
    let mf = f64::from(m);
    let f = |c: f64| 2.0 / (n * n) + 2.0 * c * mf / n + c * c * mf * (mf + 1.0);
    golden_section_by(-10.0, 10.0, TOL, |a, b| f(a) - f(b))
}
