//! Geometry on the disk and the round 2-sphere: the ball-to-half-line
//! reduction, the explicit disk infimum, stereographic coordinates and the
//! Onofri inequality for axisymmetric functions.
//!
//! Sphere integrals of axisymmetric `g(x₃)` use `∫_{S²} g dσ = 2π∫_{-1}^1 g(t) dt`
//! with a fixed Gauss–Legendre rule, checked against a coarser rule.

mod axi;
mod disk;

use std::borrow::Cow;
use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::quadrature::{gauss_legendre, integrate, QuadratureSpec};

pub use axi::{mobius_factor, random_band_limited, AxiFunction};
pub use disk::{
    corollary2_halfline, corollary2_infimum, corollary3, corollary3_deficit, disk_reduce,
    Corollary3Report, DiskFunction, DiskIntegrals, DiskSpec,
};

const FINE: usize = 400;
const COARSE: usize = 300;
// Per-interval points of the composite rule used for spline data.
const FINE_PIECE: usize = 16;
const COARSE_PIECE: usize = 10;

type Rule = (Vec<f64>, Vec<f64>);

fn rule(points: usize) -> &'static Rule {
    static FINE_RULE: OnceLock<Rule> = OnceLock::new();
    static COARSE_RULE: OnceLock<Rule> = OnceLock::new();
    match points {
        FINE => FINE_RULE.get_or_init(|| gauss_legendre(FINE)),
        COARSE => COARSE_RULE.get_or_init(|| gauss_legendre(COARSE)),
        _ => unreachable!("only the two cached rules are used"),
    }
}

/// Nodes and weights on `[-1, 1]` for `u`: the global rule for smooth
/// functions, a composite rule over the knots for splines, whose third
/// derivative jumps at every knot.
fn rule_for(u: &AxiFunction, fine: bool) -> Cow<'static, Rule> {
    let Some(knots) = u.knots() else {
        return Cow::Borrowed(rule(if fine { FINE } else { COARSE }));
    };
    let (x, w) = gauss_legendre(if fine { FINE_PIECE } else { COARSE_PIECE });
    let mut nodes = Vec::with_capacity(x.len() * knots.len());
    let mut weights = Vec::with_capacity(x.len() * knots.len());
    for k in knots.windows(2) {
        let (mid, half) = (0.5 * (k[0] + k[1]), 0.5 * (k[1] - k[0]));
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(mid + half * xi);
            weights.push(half * wi);
        }
    }
    Cow::Owned((nodes, weights))
}

/// Stereographic projection from the north pole `N = (0, 0, 1)`:
/// `x_i = 2y_i/(1+|y|²)`, `x₃ = (|y|²-1)/(|y|²+1)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct StereographicChart;

impl StereographicChart {
    /// `S² \ {N} → R²`.
    pub fn forward(&self, x: [f64; 3]) -> Result<[f64; 2]> {
        let norm = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        if !((norm - 1.0).abs() <= 1e-9) {
            return Err(invalid(format!("point is not on the unit sphere (|x| = {norm})")));
        }
        let d = 1.0 - x[2];
        if !(d > 0.0) {
            return Err(Error::PoleSingularity);
        }
        Ok([x[0] / d, x[1] / d])
    }

    pub fn inverse(&self, y: [f64; 2]) -> [f64; 3] {
        let q = y[0] * y[0] + y[1] * y[1];
        let s = 1.0 + q;
        [2.0 * y[0] / s, 2.0 * y[1] / s, (q - 1.0) / s]
    }

    /// `φ(y) = ln(2/(1+|y|²))`; `e^{2φ}` is the pulled-back round metric.
    pub fn phi(&self, y: [f64; 2]) -> f64 {
        phi_radial(y[0].hypot(y[1]))
    }
}

fn phi_radial(rho: f64) -> f64 {
    std::f64::consts::LN_2 - (rho * rho).ln_1p()
}

/// `Δφ + e^{2φ}` at radius `ρ > 0`, with the radial Laplacian
/// `φ'' + φ'/ρ` taken by central differences.
pub fn laplace_residual(rho: f64) -> Result<f64> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(invalid("radius must be > 0"));
    }
    let h = 1e-3 * rho;
    let (a, b, c) = (phi_radial(rho - h), phi_radial(rho), phi_radial(rho + h));
    let lap = (a - 2.0 * b + c) / (h * h) + (c - a) / (2.0 * h * rho);
    Ok(lap + (2.0 * b).exp())
}

fn check_radius(r: f64) -> Result<()> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("R must be > 0, got {r}")))
    }
}

/// `∫_{B_R}|∇φ|² = 4π[ln(1+R²) + 1/(1+R²) - 1]`.
pub fn phi_dirichlet(r: f64) -> Result<f64> {
    check_radius(r)?;
    let x = r * r;
    Ok(4.0 * PI * (x.ln_1p() - x / (1.0 + x)))
}

/// The same integral by radial quadrature of `|∇φ|² = 4ρ²/(1+ρ²)²`.
pub fn phi_dirichlet_quadrature(r: f64) -> Result<f64> {
    check_radius(r)?;
    let f = |rho: f64| {
        let s = 1.0 + rho * rho;
        2.0 * PI * rho * 4.0 * rho * rho / (s * s)
    };
    let spec = QuadratureSpec::new(1e-13, 1e-13, 4000)?;
    Ok(integrate(f, 0.0, r, &spec)?.value)
}

/// `(1/4π)∫(|∇u|²+2u)`, `ln((1/4π)∫e^{2u})` and their difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OnofriReport {
    pub energy_term: f64,
    pub log_mass: f64,
    pub deficit: f64,
}

fn onofri_with(u: &AxiFunction, fine: bool) -> Result<OnofriReport> {
    let r = rule_for(u, fine);
    let (t, w) = (&r.0, &r.1);
    let mut energy = 0.0;
    let mut exps = Vec::with_capacity(t.len());
    for (&ti, &wi) in t.iter().zip(w) {
        let v = u.eval(ti);
        let dv = u.derivative(ti);
        if !(v.is_finite() && dv.is_finite()) {
            return Err(Error::NonFinite { at: ti });
        }
        energy += wi * ((1.0 - ti * ti) * dv * dv + 2.0 * v);
        exps.push((wi, 2.0 * v));
    }
    // (1/4π)·2π = 1/2; the mass is summed with its largest exponent factored out.
    let top = exps.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
    let scaled: f64 = exps.iter().map(|&(wi, e)| wi * (e - top).exp()).sum();
    let energy_term = 0.5 * energy;
    let log_mass = top + (0.5 * scaled).ln();
    Ok(OnofriReport {
        energy_term,
        log_mass,
        deficit: energy_term - log_mass,
    })
}

fn fine_len(u: &AxiFunction) -> usize {
    u.knots().map_or(FINE, |k| FINE_PIECE * (k.len() - 1))
}

/// The Onofri terms of `u`, accepted only when the fine and coarse sphere
/// rules agree to `1e-11` relative.
pub fn onofri(u: &AxiFunction) -> Result<OnofriReport> {
    let fine = onofri_with(u, true)?;
    let coarse = onofri_with(u, false)?;
    let gap = (fine.deficit - coarse.deficit).abs();
    let scale = 1.0 + fine.energy_term.abs() + fine.log_mass.abs();
    if gap > 1e-11 * scale {
        return Err(Error::NonConvergent {
            value: fine.deficit,
            error_estimate: gap,
            subdivisions: fine_len(u),
        });
    }
    Ok(fine)
}

/// `(1/4π)∫(|∇u|²+2u) - ln((1/4π)∫e^{2u})`, nonnegative on `S²`.
pub fn onofri_deficit(u: &AxiFunction) -> Result<f64> {
    Ok(onofri(u)?.deficit)
}

/// Two sides of `∫_{B_R}|∇w|² = ∫_{S²}|∇u|² + 2∫_{S²}u + ∫_{B_R}|∇φ|²`
/// for `w = u∘π⁻¹ + φ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransferReport {
    pub plane: f64,
    pub sphere: f64,
    pub mismatch: f64,
}

/// Evaluates the plane side by radial quadrature of `|∇w|²` on `B_R` and the
/// sphere side by Gauss–Legendre in `x₃` plus [`phi_dirichlet`]. `u` must
/// vanish on the cap `x₃ ≥ (R²-1)/(R²+1)` that lies outside `B_R`.
pub fn transfer_identity(u: &AxiFunction, r: f64) -> Result<TransferReport> {
    check_radius(r)?;
    let cap = (r * r - 1.0) / (r * r + 1.0);
    for i in 0..=256 {
        let t = cap + (1.0 - cap) * i as f64 / 256.0;
        let v = u.eval(t);
        if !(v.abs() <= 1e-12) {
            return Err(Error::SupportViolation { t, value: v });
        }
    }

    let slope = |rho: f64| {
        let s = 1.0 + rho * rho;
        let t = (rho * rho - 1.0) / s;
        u.derivative(t) * 4.0 * rho / (s * s) - 2.0 * rho / s
    };
    let spec = QuadratureSpec::new(1e-13, 1e-13, 8000)?;
    let inner = r.min(1.0);
    let mut plane = integrate(|rho| 2.0 * PI * rho * slope(rho).powi(2), 0.0, inner, &spec)?.value;
    if r > 1.0 {
        plane += integrate(|rho| 2.0 * PI * rho * slope(rho).powi(2), 1.0, r, &spec)?.value;
    }

    let rule = rule_for(u, true);
    let (t, w) = (&rule.0, &rule.1);
    let mut body = 0.0;
    for (&ti, &wi) in t.iter().zip(w) {
        let dv = u.derivative(ti);
        body += wi * ((1.0 - ti * ti) * dv * dv + 2.0 * u.eval(ti));
    }
    let sphere = 2.0 * PI * body + phi_dirichlet(r)?;
    Ok(TransferReport {
        plane,
        sphere,
        mismatch: (plane - sphere).abs(),
    })
}

pub fn transfer_identity_check(u: &AxiFunction, r: f64) -> Result<f64> {
    Ok(transfer_identity(u, r)?.mismatch)
}

/// One entry of an Onofri sweep, keyed by Möbius parameter or seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OnofriPoint {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub deficit: f64,
}

pub fn onofri_mobius_sweep(lambdas: &[f64]) -> Result<Vec<OnofriPoint>> {
    lambdas
        .iter()
        .map(|&l| {
            Ok(OnofriPoint {
                lambda: Some(l),
                seed: None,
                deficit: onofri_deficit(&mobius_factor(l)?)?,
            })
        })
        .collect()
}

pub fn onofri_random_sweep(seeds: std::ops::Range<u64>, max_degree: usize) -> Result<Vec<OnofriPoint>> {
    seeds
        .map(|s| {
            Ok(OnofriPoint {
                lambda: None,
                seed: Some(s),
                deficit: onofri_deficit(&random_band_limited(s, max_degree)?)?,
            })
        })
        .collect()
}
