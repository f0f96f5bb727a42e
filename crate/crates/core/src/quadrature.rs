//! Adaptive Simpson quadrature and the limiting constant `C(α)`.

use crate::error::{Error, Result};
use crate::stats::{normal_cdf, normal_pdf};
use crate::stochastic::LengthLaw;

const MAX_DEPTH: u32 = 50;

/// Integral of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(&f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// `C(α) = ∫_{2|α|}^{∞} φ(u) (2Φ(u m / σ) - 1) du` for a law with mean `m`
/// and standard deviation `σ`, truncated at `2|α| + 10` (the tail beyond is
/// below `1e-22`).
pub fn c_alpha(alpha: f64, mean: f64, sd: f64) -> Result<f64> {
    if !(alpha.is_finite() && mean > 0.0 && sd > 0.0) {
        return Err(Error::ConfigInvalid(format!("C(alpha) needs finite alpha and positive moments, got ({alpha}, {mean}, {sd})")));
    }
    let lo = 2.0 * alpha.abs();
    let ratio = mean / sd;
    Ok(adaptive_simpson(|u| normal_pdf(u) * (2.0 * normal_cdf(u * ratio) - 1.0), lo, lo + 10.0, 1e-12))
}

pub fn compute_c_alpha<L: LengthLaw>(alpha: f64, model: &L) -> Result<f64> {
    c_alpha(alpha, model.mean(), model.variance().sqrt())
}
