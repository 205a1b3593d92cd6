use std::cell::RefCell;

use serde::Serialize;

use crate::constants::bliss_constant;
use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate, integrate_pieces, QuadratureSpec};

/// The Bliss quotient `I / J^{l/k}` with its ingredients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlissRatio {
    pub ratio: f64,
    /// `I = ∫_0^∞ y^l / x^{l-α} dx`, with `f` taken as zero beyond `x_max`.
    pub i: f64,
    /// `J = ∫_0^{x_max} f^k dx`
    pub j: f64,
    /// Sharp constant `C_b(k, l)`.
    pub c_b: f64,
    /// Rough size of the neglected `∫_{x_max}^∞ f^k`, when above `1e-8 J`.
    pub truncation_warning: Option<f64>,
}

fn breakpoints(x_max: f64) -> Vec<f64> {
    // Geometric breakpoints resolve both the origin and a slowly decaying tail.
    let q = 2f64.powf(0.25);
    let lowest = 1e-3 * x_max.min(1.0);
    let mut pts = vec![x_max];
    let mut x = x_max;
    while x / q > lowest {
        x /= q;
        pts.push(x);
    }
    pts.push(0.0);
    pts.reverse();
    pts
}

/// Evaluates `I / J^{l/k}` for `f ≥ 0` on `[0, x_max]`, `y = ∫_0^x f`.
///
/// `f` is treated as vanishing beyond `x_max`, so `y` is constant there and
/// the remaining part of `I` is added in closed form.
pub fn bliss_ratio<F>(f: F, k: f64, l: f64, x_max: f64, spec: &QuadratureSpec) -> Result<BlissRatio>
where
    F: Fn(f64) -> f64,
{
    let params = bliss_constant(k, l)?;
    if !(x_max.is_finite() && x_max > 0.0) {
        return Err(invalid("x_max must be finite and > 0"));
    }
    let alpha = params.alpha;
    let power = l - alpha;
    let pts = breakpoints(x_max);

    let j = integrate_pieces(|x| f(x).max(0.0).powf(k), &pts, spec)?.value;
    if !(j >= 1e-300) {
        return Err(Error::DegenerateInput(format!("J = {j} is too small")));
    }

    // The cumulative integral y is resolved two digits beyond the outer
    // tolerance, but not below what binary64 can deliver.
    let inner = QuadratureSpec {
        abs_tol: (spec.abs_tol * 1e-2).max(1e-15),
        rel_tol: (spec.rel_tol * 1e-2).max(1e-13),
        max_subdivisions: spec.max_subdivisions,
    };
    let pieces = (pts.len() - 1) as f64;
    let outer = QuadratureSpec {
        abs_tol: spec.abs_tol / pieces,
        ..*spec
    };
    let mut y_left = 0.0;
    let mut i_val = 0.0;
    // First failure of an inner integral; reported instead of the NaN it
    // leaves in the outer integrand.
    let inner_failure = RefCell::new(None);
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let y0 = y_left;
        let f = &f;
        let integrand = |x: f64| {
            let y = match integrate(f, a, x, &inner) {
                Ok(r) => y0 + r.value,
                Err(e) => {
                    inner_failure.borrow_mut().get_or_insert(e);
                    f64::NAN
                }
            };
            y.powf(l) / x.powf(power)
        };
        let outer_result = integrate(integrand, a, b, &outer);
        if let Some(e) = inner_failure.borrow_mut().take() {
            return Err(e);
        }
        i_val += outer_result?.value;
        y_left += integrate(f, a, b, &inner)?.value;
    }
    i_val += y_left.powf(l) * x_max.powf(1.0 - power) / (power - 1.0);

    let edge = f(x_max).abs().powf(k) * x_max;
    let truncation_warning = (edge > 1e-8 * j).then_some(edge);

    Ok(BlissRatio {
        ratio: i_val / j.powf(l / k),
        i: i_val,
        j,
        c_b: params.c_b,
        truncation_warning,
    })
}
