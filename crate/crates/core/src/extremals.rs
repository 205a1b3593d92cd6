//! The closed-form constrained minimizers
//! `v(r) = ln((λ₀ + 1) / (λ₀ + e^{-nr/(n-1)}))`
//! and everything known about them in closed form: mass, multiplier,
//! energy and the deficit of the sharp inequality.

use serde::Serialize;

use crate::constants::{log_gap_integral, sharp_coefficient};
use crate::error::{invalid, Result};
use crate::quadrature::{integrate, QuadratureSpec};
use crate::radial::Grid;

/// `(n, λ₀)` with the derived mass `a` and Euler–Lagrange multiplier `τ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtremalParams {
    pub n: f64,
    pub lambda0: f64,
    /// `(λ₀ + 1) / (n λ₀)`
    pub a: f64,
    /// `(n/(n-1))^n λ₀ / (λ₀ + 1)^n`
    pub tau: f64,
}

impl ExtremalParams {
    pub fn new(n: f64, lambda0: f64) -> Result<Self> {
        if !(n.is_finite() && n > 1.0) {
            return Err(invalid(format!("exponent n must be > 1, got {n}")));
        }
        if !(lambda0.is_finite() && lambda0 > 0.0) {
            return Err(invalid(format!("lambda0 must be > 0, got {lambda0}")));
        }
        let kappa = n / (n - 1.0);
        Ok(Self {
            n,
            lambda0,
            a: (lambda0 + 1.0) / (n * lambda0),
            tau: kappa.powf(n) * lambda0 / (lambda0 + 1.0).powf(n),
        })
    }

    /// The member of the family with weighted mass `a`.
    pub fn from_mass(n: f64, a: f64) -> Result<Self> {
        Self::new(n, lambda_from_mass(n, a)?)
    }

    /// Decay rate `n/(n-1)` of `e^{-nr/(n-1)}`.
    pub fn kappa(&self) -> f64 {
        self.n / (self.n - 1.0)
    }

    pub fn eval(&self, r: f64) -> f64 {
        extremal_eval(self, r)
    }

    /// `v_r = κ e^{-κr} / (λ₀ + e^{-κr})`
    pub fn slope(&self, r: f64) -> f64 {
        let x = (-self.kappa() * r).exp();
        self.kappa() * x / (self.lambda0 + x)
    }

    /// `v_rr = -κ² λ₀ e^{-κr} / (λ₀ + e^{-κr})²`
    pub fn curvature(&self, r: f64) -> f64 {
        let k = self.kappa();
        let x = (-k * r).exp();
        -k * k * self.lambda0 * x / ((self.lambda0 + x) * (self.lambda0 + x))
    }

    /// `lim_{r→∞} v(r) = ln((λ₀+1)/λ₀) = ln(na)`
    pub fn limit(&self) -> f64 {
        (1.0 / self.lambda0).ln_1p()
    }
}

/// `v(r; λ₀)`. Exactly zero at `r = 0`, strictly increasing.
pub fn extremal_eval(p: &ExtremalParams, r: f64) -> f64 {
    let gap = -(-p.kappa() * r).exp_m1();
    -(-gap / (p.lambda0 + 1.0)).ln_1p()
}

/// `λ₀ = 1 / (na - 1)`, defined for `a > 1/n`.
pub fn lambda_from_mass(n: f64, a: f64) -> Result<f64> {
    if !(n.is_finite() && n > 1.0) {
        return Err(invalid(format!("exponent n must be > 1, got {n}")));
    }
    if !(a.is_finite() && n * a > 1.0) {
        return Err(invalid(format!("mass a = {a} must exceed 1/n = {}", 1.0 / n)));
    }
    Ok(1.0 / (n * a - 1.0))
}

/// `(λ₀ + 1) / (n λ₀)`
pub fn mass_from_lambda(p: &ExtremalParams) -> f64 {
    (p.lambda0 + 1.0) / (p.n * p.lambda0)
}

/// `∫_0^∞ |v_r|^n dr` in closed form (integer `n`) or through the reduced
/// one-dimensional integral `(n/(n-1))^{n-1} ∫_{λ₀/(λ₀+1)}^1 (1-t)^{n-1}/t dt`.
pub fn closed_energy(p: &ExtremalParams) -> Result<f64> {
    let n = p.n;
    let lead = p.kappa().powf(n - 1.0);
    // q = 1/(λ₀+1) = (na-1)/(na)
    let q = 1.0 / (p.lambda0 + 1.0);
    if n.fract() == 0.0 {
        let m = n as i32;
        let ln_na = (1.0 / p.lambda0).ln_1p();
        let sum: f64 = (1..m).map(|j| q.powi(j) / j as f64).sum();
        return Ok(lead * (ln_na - sum));
    }
    let t0 = p.lambda0 / (p.lambda0 + 1.0);
    let r = integrate(
        |t: f64| ((n - 1.0) * (-t).ln_1p()).exp() / t,
        t0,
        1.0,
        &QuadratureSpec::tight(),
    )?;
    Ok(lead * r.value)
}

/// Deficit of the normalization-consistent statement at `v(·; λ₀)`:
/// `∫_0^{t₀} (1-(1-t)^{n-[n]})/t dt + Σ_{i=1}^{[n]-1} (1 - q^{n-i})/(n-i)`
/// with `t₀ = 1/(na)` and `q = (na-1)/(na)`.
///
/// This equals `C_n` minus the bracket of the general-`n` energy chain; the
/// subtraction is carried out analytically so the value stays accurate as
/// `a → ∞`.
pub fn extremal_deficit(p: &ExtremalParams) -> Result<f64> {
    let n = p.n;
    let floor = n.floor();
    let frac = n - floor;
    let t0 = p.lambda0 / (p.lambda0 + 1.0);
    // ∫_0^{t0} = ∫_0^1 - ∫_{t0}^1, evaluated directly on [0, t0].
    let head = if frac == 0.0 {
        0.0
    } else {
        let g = |t: f64| -(frac * (-t).ln_1p()).exp_m1() / t;
        integrate(g, 0.0, t0, &QuadratureSpec::tight())?.value
    };
    let ln_q = -p.lambda0.ln_1p();
    let sum: f64 = (1..floor as u64)
        .map(|i| {
            let m = n - i as f64;
            -(m * ln_q).exp_m1() / m
        })
        .sum();
    Ok(head + sum)
}

/// Same deficit assembled from the closed energy and mass:
/// `coeff·closed_energy + C_n - ln(n a)`. Independent of [`extremal_deficit`]
/// and used to cross-check it.
pub fn extremal_deficit_from_energy(p: &ExtremalParams) -> Result<f64> {
    let coeff = sharp_coefficient(p.n)?;
    let cn = crate::constants::c_n(p.n)?;
    Ok(coeff * closed_energy(p)? + cn - (p.n * p.a).ln())
}

/// Literal form `C_n - [∫_{λ₀/(λ₀+1)}^1 (1-(1-t)^{n-[n]})/t dt + Σ q^{n-i}/(n-i)]`.
pub fn extremal_deficit_literal(p: &ExtremalParams) -> Result<f64> {
    let n = p.n;
    let floor = n.floor();
    let t0 = p.lambda0 / (p.lambda0 + 1.0);
    let gap = log_gap_integral(n - floor, t0, &QuadratureSpec::tight())?;
    let q = 1.0 / (p.lambda0 + 1.0);
    let sum: f64 = (1..floor as u64)
        .map(|i| q.powf(n - i as f64) / (n - i as f64))
        .sum();
    Ok(crate::constants::c_n(n)? - (gap + sum))
}

/// `x ↦ c (1 + d x^α)^{-(α+1)/α}`
pub fn bliss_extremal(c: f64, d: f64, alpha: f64) -> Result<impl Fn(f64) -> f64 + Copy> {
    if !(c > 0.0 && d > 0.0 && alpha > 0.0) {
        return Err(invalid("Bliss extremal parameters must be positive"));
    }
    let e = -(alpha + 1.0) / alpha;
    Ok(move |x: f64| c * (1.0 + d * x.powf(alpha)).powf(e))
}

/// Grid on `[0, radius]` with half of the nodes spread uniformly in `r` and
/// half concentrated where `v_r` changes, i.e. equidistributed in
/// `r/R + (v_r(0) - v_r(r)) / (v_r(0) - v_r(R))`.
pub fn graded_grid(p: &ExtremalParams, radius: f64, nodes: usize) -> Result<Grid> {
    if nodes < 3 || !(radius.is_finite() && radius > 0.0) {
        return Err(invalid("graded grid needs radius > 0 and at least 3 nodes"));
    }
    let s0 = p.slope(0.0);
    let span = s0 - p.slope(radius);
    let phi = |r: f64| {
        let lin = r / radius;
        if span > 0.0 {
            lin + (s0 - p.slope(r)) / span
        } else {
            2.0 * lin
        }
    };
    let cells = nodes - 1;
    let mut out = Vec::with_capacity(nodes);
    out.push(0.0);
    for i in 1..cells {
        let target = 2.0 * i as f64 / cells as f64;
        let (mut lo, mut hi) = (0.0, radius);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if phi(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * radius {
                break;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    out.push(radius);
    Grid::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_halfline;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::LN_2;

    fn p(n: f64, l: f64) -> ExtremalParams {
        ExtremalParams::new(n, l).unwrap()
    }

    #[test]
    fn eval_examples() {
        for (n, l) in [(2.0, 1.0), (3.0, 0.2), (1.5, 7.0)] {
            assert_eq!(extremal_eval(&p(n, l), 0.0), 0.0);
        }
        assert_abs_diff_eq!(extremal_eval(&p(2.0, 1.0), 60.0), LN_2, epsilon = 1e-15);
        assert_abs_diff_eq!(
            extremal_eval(&p(2.0, 1.0), 5.0),
            (2.0 / (1.0 + (-10f64).exp())).ln(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(extremal_eval(&p(2.0, 1.0), 5.0), 0.693_101_781_660_728_4, epsilon = 1e-15);
        assert_abs_diff_eq!(p(2.0, 1.0).limit(), LN_2, epsilon = 1e-15);
    }

    #[test]
    fn eval_strictly_increasing() {
        let q = p(2.5, 0.3);
        let mut prev = -1.0;
        for i in 0..1000 {
            let v = q.eval(i as f64 * 0.01);
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn mass_lambda_dictionary() {
        assert_eq!(lambda_from_mass(2.0, 1.0).unwrap(), 1.0);
        assert!(lambda_from_mass(2.0, 0.5).is_err());
        assert_abs_diff_eq!(lambda_from_mass(3.0, 1.0).unwrap(), 0.5, epsilon = 1e-15);
        assert_eq!(mass_from_lambda(&p(2.0, 1.0)), 1.0);
        assert_abs_diff_eq!(mass_from_lambda(&p(2.5, 1.0)), 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(mass_from_lambda(&p(2.0, 1e12)), 0.5, epsilon = 1e-12);
        for a in [0.6, 1.0, 7.0, 1e4] {
            let q = ExtremalParams::from_mass(2.0, a).unwrap();
            assert_relative_eq!(q.a, a, max_relative = 1e-12);
        }
    }

    #[test]
    fn tau_examples() {
        assert_abs_diff_eq!(p(2.0, 1.0).tau, 1.0, epsilon = 1e-15);
        // n = 2: v_rr(0) = -τ e^{0}
        let q = p(2.0, 0.37);
        assert_relative_eq!(q.curvature(0.0), -q.tau, max_relative = 1e-14);
    }

    #[test]
    fn closed_energy_examples() {
        assert_abs_diff_eq!(closed_energy(&p(2.0, 1.0)).unwrap(), 2.0 * LN_2 - 1.0, epsilon = 1e-14);
        let want = 2.25 * (3f64.ln() - 2.0 / 9.0 - 2.0 / 3.0);
        assert_abs_diff_eq!(closed_energy(&p(3.0, 0.5)).unwrap(), want, epsilon = 1e-14);
        // mpmath: 0.242774413555905202...
        assert_abs_diff_eq!(closed_energy(&p(2.5, 1.0)).unwrap(), 0.242_774_413_555_905_2, epsilon = 1e-11);
    }

    #[test]
    fn closed_energy_matches_direct_quadrature() {
        for n in [1.5, 2.0, 2.5, 3.0, 4.0] {
            for l in [0.1, 1.0, 10.0] {
                let q = p(n, l);
                let direct =
                    integrate_halfline(|r| q.slope(r).powf(n), &QuadratureSpec::tight()).unwrap();
                assert_abs_diff_eq!(closed_energy(&q).unwrap(), direct.value, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn reduction_substitution_identity() {
        // ∫_0^{1/λ₀} x^{n-1}/(1+x)^n dx = ∫_{λ₀/(λ₀+1)}^1 (1-t)^{n-1}/t dt
        for n in [1.5, 2.5, 3.7] {
            for l in [0.1, 1.0, 10.0] {
                let spec = QuadratureSpec::tight();
                let lhs = integrate(|x: f64| x.powf(n - 1.0) / (1.0 + x).powf(n), 0.0, 1.0 / l, &spec)
                    .unwrap()
                    .value;
                let rhs = integrate(|t: f64| (1.0 - t).powf(n - 1.0) / t, l / (l + 1.0), 1.0, &spec)
                    .unwrap()
                    .value;
                assert_relative_eq!(lhs, rhs, max_relative = 1e-11);
            }
        }
    }

    #[test]
    fn deficit_examples() {
        assert_abs_diff_eq!(
            extremal_deficit(&ExtremalParams::from_mass(2.0, 1.0).unwrap()).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            extremal_deficit(&ExtremalParams::from_mass(2.0, 50.0).unwrap()).unwrap(),
            0.01,
            epsilon = 1e-15
        );
        // mpmath: ∫_0^{1/2}(1-√(1-t))/t dt + (1 - 2^{-1.5})/1.5 = 0.700056476257305919...
        let q = ExtremalParams::from_mass(2.5, 0.8).unwrap();
        assert_abs_diff_eq!(extremal_deficit(&q).unwrap(), 0.700_056_476_257_305_9, epsilon = 1e-11);
    }

    #[test]
    fn deficit_routes_agree() {
        for n in [1.5, 2.0, 2.5, 3.0, 4.0, 5.3] {
            for a in [0.7, 1.0, 3.0, 40.0] {
                if n * a <= 1.0 {
                    continue;
                }
                let q = ExtremalParams::from_mass(n, a).unwrap();
                let d = extremal_deficit(&q).unwrap();
                assert_abs_diff_eq!(d, extremal_deficit_literal(&q).unwrap(), epsilon = 1e-10);
                assert_abs_diff_eq!(d, extremal_deficit_from_energy(&q).unwrap(), epsilon = 1e-10);
                assert!(d > 0.0);
            }
        }
    }

    #[test]
    fn bliss_extremal_examples() {
        let f = bliss_extremal(1.0, 1.0, 1.0).unwrap();
        assert_eq!(f(0.0), 1.0);
        assert_eq!(f(1.0), 0.25);
        let g = bliss_extremal(2.0, 1.0, 1.0).unwrap();
        assert_eq!(g(3.0), 0.125);
        assert!(bliss_extremal(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn graded_grid_is_valid() {
        let q = p(1.5, 0.1);
        let g = graded_grid(&q, 20.0, 400).unwrap();
        assert_eq!(g.len(), 400);
        assert_eq!(g.radius(), 20.0);
        // Finer than uniform around the transition radius.
        let r_star = (1.0 / 0.1f64).ln() / q.kappa();
        let nodes = g.nodes();
        let j = nodes.partition_point(|&r| r < r_star);
        assert!(nodes[j] - nodes[j - 1] < 20.0 / 399.0);
    }
}
