//! Closed-form constants: the sharp energy coefficient, the optimal additive
//! constant `C_n`, the rough (non-sharp) constants, the radial Moser bound,
//! the Bliss constant and the volumes of unit spheres.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate, QuadratureSpec};
use crate::special::{gamma, harmonic, ln_gamma};

fn check_exponent(n: f64) -> Result<()> {
    if n.is_finite() && n > 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("exponent n must be finite and > 1, got {n}")))
    }
}

/// `((n-1)/n)^{n-1}`, the coefficient in front of the energy.
pub fn sharp_coefficient(n: f64) -> Result<f64> {
    check_exponent(n)?;
    Ok(((n - 1.0) / n).powf(n - 1.0))
}

/// `∫_lower^1 (1 - (1-t)^p) / t dt` for `p ∈ [0, 1)`.
///
/// With `lower = 0` this is the integral part of `C_n` (`p = n - [n]`).
pub fn log_gap_integral(p: f64, lower: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(0.0..1.0).contains(&lower) {
        return Err(invalid(format!("lower limit must lie in [0, 1), got {lower}")));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    // 1 - (1-t)^p = -expm1(p ln(1-t)); avoids cancellation near t = 0.
    let r = integrate(
        |t: f64| -(p * (-t).ln_1p()).exp_m1() / t,
        lower,
        1.0,
        spec,
    )?;
    Ok(r.value)
}

/// The optimal additive constant
/// `C_n = ∫_0^1 (1 - (1-t)^{n-[n]})/t dt + Σ_{i=1}^{[n]-1} 1/(n-i)`.
pub fn c_n(n: f64) -> Result<f64> {
    check_exponent(n)?;
    if n.fract() == 0.0 {
        return Ok(harmonic(n as u64 - 1));
    }
    let floor = n.floor();
    let integral = log_gap_integral(n - floor, 0.0, &QuadratureSpec::tight())?;
    // Empty for 1 < n < 2.
    let sum: f64 = (1..floor as u64).rev().map(|i| 1.0 / (n - i as f64)).sum();
    Ok(integral + sum)
}

/// Threshold `((n-1)/n)^{(n-1)/n}` that `beta0` must exceed.
pub fn rough_threshold(n: f64) -> Result<f64> {
    check_exponent(n)?;
    Ok(((n - 1.0) / n).powf((n - 1.0) / n))
}

/// Decay rate `n - (n-1) beta0^{-n/(n-1)}` of the rough majorant.
pub(crate) fn rough_rate(n: f64, beta0: f64) -> Result<f64> {
    let threshold = rough_threshold(n)?;
    if !(beta0.is_finite() && beta0 > threshold) {
        return Err(Error::BelowThreshold { beta0, threshold });
    }
    let rate = n - (n - 1.0) * beta0.powf(-n / (n - 1.0));
    if rate > 0.0 {
        Ok(rate)
    } else {
        Err(Error::BelowThreshold { beta0, threshold })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoughConstants {
    /// `∫_0^∞ e^{[(n-1)beta0^{-n/(n-1)} - n] r} dr`
    pub c: f64,
    /// `ln c`
    pub c1: f64,
}

/// The non-sharp constants for a coefficient `beta0^n` above the sharp one.
pub fn rough_constants(n: f64, beta0: f64) -> Result<RoughConstants> {
    let rate = rough_rate(n, beta0)?;
    Ok(RoughConstants {
        c: 1.0 / rate,
        c1: -rate.ln(),
    })
}

/// Bound `1 / (n - beta a^{1/(n-1)})` on `∫ e^{beta u^{n/(n-1)} - n r} dr`
/// over functions with `∫|u_r|^n ≤ a`.
pub fn moser_bound(n: f64, a: f64, beta: f64) -> Result<f64> {
    check_exponent(n)?;
    if !(a.is_finite() && a > 0.0) {
        return Err(invalid(format!("energy budget a must be > 0, got {a}")));
    }
    let threshold = n * a.powf(1.0 / (1.0 - n));
    let rate = n - beta * a.powf(1.0 / (n - 1.0));
    if !(beta < threshold) || rate <= 0.0 {
        return Err(Error::AboveThreshold { beta, threshold });
    }
    Ok(1.0 / rate)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlissParams {
    pub k: f64,
    pub l: f64,
    pub alpha: f64,
    pub c_b: f64,
}

/// Bliss constant
/// `C_b = 1/(l-α-1) [α Γ(l/α) / (Γ(1/α) Γ((l-1)/α))]^α`, `α = l/k - 1`.
pub fn bliss_constant(k: f64, l: f64) -> Result<BlissParams> {
    if !(k.is_finite() && l.is_finite() && k > 1.0 && l > k) {
        return Err(invalid(format!("need l > k > 1, got k = {k}, l = {l}")));
    }
    let alpha = l / k - 1.0;
    let log_bracket =
        alpha.ln() + ln_gamma(l / alpha) - ln_gamma(1.0 / alpha) - ln_gamma((l - 1.0) / alpha);
    let c_b = (alpha * log_bracket).exp() / (l - alpha - 1.0);
    Ok(BlissParams { k, l, alpha, c_b })
}

/// Surface measure `ω_m` of the unit sphere `S^m ⊂ R^{m+1}`.
pub fn sphere_volume(m: u32) -> Result<f64> {
    if m == 0 {
        return Err(invalid("sphere dimension must be >= 1"));
    }
    let h = (m as f64 + 1.0) / 2.0;
    Ok(2.0 * PI.powf(h) / gamma(h))
}
