//! Independent reconstructions of the constrained minimizer: direct
//! minimization of the discretized energy over the mass constraint set, and
//! shooting on the Euler–Lagrange equation `v_r^{n-2} v_rr = -τ e^{nv-nr}`.

mod minimize;
mod shoot;
pub(crate) mod tridiag;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::radial::{Grid, RadialFunction};

pub use minimize::{default_radius, minimize};
pub use shoot::{shoot, shoot_with, ShootOptions};

/// How the minimizer is started.
#[derive(Debug, Clone, PartialEq)]
pub enum Initialization {
    /// `min(r, ln(na))`
    Ramp,
    /// The closed-form extremal for `a`, with `λ₀` scaled by `1 + factor`.
    PerturbedExtremal { factor: f64 },
    /// Caller-supplied start; must live on the solve grid.
    Given(RadialFunction),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub grid: Grid,
    /// `ε` in the smoothed energy `Σ (s² + ε²)^{n/2} h`.
    pub epsilon_smooth: f64,
    pub constraint_tol: f64,
    /// Bound on the square root of the Newton decrement of each inner solve.
    pub grad_tol: f64,
    /// Budget of inner (Newton) iterations summed over all outer rounds.
    pub max_iters: usize,
    pub penalty_growth: f64,
    pub init: Initialization,
}

impl SolveOptions {
    pub fn new(grid: Grid) -> Self {
        Self {
            grid,
            epsilon_smooth: 1e-8,
            constraint_tol: 1e-10,
            grad_tol: 1e-9,
            max_iters: 2000,
            penalty_growth: 10.0,
            init: Initialization::Ramp,
        }
    }

    pub fn with_init(mut self, init: Initialization) -> Self {
        self.init = init;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon_smooth >= 0.0) {
            return Err(invalid("epsilon_smooth must be >= 0"));
        }
        if !(self.constraint_tol > 0.0 && self.grad_tol > 0.0) {
            return Err(invalid("tolerances must be positive"));
        }
        if self.max_iters == 0 {
            return Err(invalid("max_iters must be >= 1"));
        }
        if !(self.penalty_growth > 1.0) {
            return Err(invalid("penalty_growth must be > 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub n: f64,
    pub a: f64,
    pub u_star: RadialFunction,
    /// Unsmoothed energy of `u_star`.
    pub xi_hat: f64,
    /// `|weighted_mass(u_star) - a|`
    pub constraint_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Lagrange multiplier of the mass constraint.
    pub multiplier: f64,
}

/// The JSON-facing part of a [`SolveReport`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveSummary {
    pub n: f64,
    pub a: f64,
    pub xi_hat: f64,
    pub constraint_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl SolveReport {
    pub fn summary(&self) -> SolveSummary {
        SolveSummary {
            n: self.n,
            a: self.a,
            xi_hat: self.xi_hat,
            constraint_residual: self.constraint_residual,
            iterations: self.iterations,
            converged: self.converged,
        }
    }
}

/// `sup_i |u_r^{n-2} u_rr + τ e^{n u - n r}|` over interior nodes, with
/// three-point stencils on the (possibly non-uniform) grid.
pub fn el_residual(u: &RadialFunction, n: f64, tau: f64) -> Result<f64> {
    if !(n.is_finite() && n > 1.0) {
        return Err(invalid(format!("exponent n must be > 1, got {n}")));
    }
    let r = u.nodes();
    let v = u.values();
    let mut worst: f64 = 0.0;
    for i in 1..r.len() - 1 {
        let hm = r[i] - r[i - 1];
        let hp = r[i + 1] - r[i];
        let denom = hp * hm * (hp + hm);
        let d1 = (hm * hm * v[i + 1] - hp * hp * v[i - 1] - (hm * hm - hp * hp) * v[i]) / denom;
        let d2 = 2.0 * (hm * v[i + 1] - (hp + hm) * v[i] + hp * v[i - 1]) / denom;
        let lead = if d1 == 0.0 && n < 2.0 {
            if d2 == 0.0 {
                0.0
            } else {
                return Err(invalid(format!(
                    "u_r vanishes at r = {} where n < 2 makes u_r^(n-2) singular",
                    r[i]
                )));
            }
        } else {
            d1.abs().powf(n - 2.0) * d2
        };
        let res = (lead + tau * (n * (v[i] - r[i])).exp()).abs();
        worst = worst.max(res);
    }
    Ok(worst)
}
