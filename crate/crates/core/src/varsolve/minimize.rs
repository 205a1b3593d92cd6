use super::tridiag::SymTridiag;
use super::{Initialization, SolveOptions, SolveReport};
use crate::cellexp::{cell_exp, cell_exp_value};
use crate::error::{invalid, Error, Result};
use crate::extremals::{lambda_from_mass, ExtremalParams};
use crate::radial::{energy, weighted_mass, RadialFunction};

/// Smallest truncation radius with `tail_bound(v, n, 1, R) < 1e-10 a` for the
/// extremal of mass `a`. With `β₀ = 1` the majorant is `e^{ξ - R}`.
pub fn default_radius(n: f64, a: f64) -> Result<f64> {
    let p = ExtremalParams::from_mass(n, a)?;
    let xi = crate::extremals::closed_energy(&p)?;
    Ok((xi - (1e-10 * a).ln()).max(1.0).ceil())
}

/// Smoothed energy, mass and their derivatives at a full value vector
/// (index 0 is the pinned origin).
struct Problem<'a> {
    r: &'a [f64],
    n: f64,
    eps2: f64,
}

struct Derivs {
    grad_e: Vec<f64>,
    hess_e: SymTridiag,
    mass: f64,
    grad_m: Vec<f64>,
    hess_m: SymTridiag,
}

impl Problem<'_> {
    fn phi(&self, s: f64) -> f64 {
        (s * s + self.eps2).powf(0.5 * self.n)
    }

    fn energy(&self, u: &[f64]) -> f64 {
        (0..self.r.len() - 1)
            .map(|j| {
                let h = self.r[j + 1] - self.r[j];
                self.phi((u[j + 1] - u[j]) / h) * h
            })
            .sum()
    }

    fn tail(&self, u: &[f64]) -> f64 {
        let last = self.r.len() - 1;
        (self.n * (u[last] - self.r[last])).exp()
    }

    fn mass(&self, u: &[f64]) -> f64 {
        let n = self.n;
        let body: f64 = (0..self.r.len() - 1)
            .map(|j| {
                cell_exp_value(
                    n * (u[j] - self.r[j]),
                    n * (u[j + 1] - self.r[j + 1]),
                    self.r[j + 1] - self.r[j],
                )
            })
            .sum();
        body + self.tail(u) / n
    }

    /// Derivatives with respect to `u[1..]`.
    fn derivs(&self, u: &[f64]) -> Derivs {
        let n = self.n;
        let m = self.r.len() - 1;
        let mut grad_e = vec![0.0; m];
        let mut hess_e = SymTridiag::zeros(m);
        let mut grad_m = vec![0.0; m];
        let mut hess_m = SymTridiag::zeros(m);
        let mut mass = 0.0;
        for j in 0..m {
            let h = self.r[j + 1] - self.r[j];
            let s = (u[j + 1] - u[j]) / h;
            let q = s * s + self.eps2;
            let d1 = n * s * q.powf(0.5 * n - 1.0);
            let d2 = n * q.powf(0.5 * n - 1.0) + n * (n - 2.0) * s * s * q.powf(0.5 * n - 2.0);
            let c = cell_exp(n * (u[j] - self.r[j]), n * (u[j + 1] - self.r[j + 1]), h);
            mass += c.value;
            // Unknown k corresponds to node k + 1; node 0 is pinned.
            let right = j;
            grad_e[right] += d1;
            hess_e.diag[right] += d2 / h;
            grad_m[right] += n * c.d_right;
            hess_m.diag[right] += n * n * c.d2_rr;
            if j > 0 {
                let left = j - 1;
                grad_e[left] -= d1;
                hess_e.diag[left] += d2 / h;
                hess_e.off[left] -= d2 / h;
                grad_m[left] += n * c.d_left;
                hess_m.diag[left] += n * n * c.d2_ll;
                hess_m.off[left] += n * n * c.d2_lr;
            }
        }
        let t = self.tail(u);
        mass += t / n;
        grad_m[m - 1] += t;
        hess_m.diag[m - 1] += n * t;
        Derivs {
            grad_e,
            hess_e,
            mass,
            grad_m,
            hess_m,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn initial_values(n: f64, a: f64, opts: &SolveOptions) -> Result<Vec<f64>> {
    let grid = &opts.grid;
    Ok(match &opts.init {
        Initialization::Ramp => {
            let top = (n * a).ln();
            grid.nodes().iter().map(|&r| r.min(top)).collect()
        }
        Initialization::PerturbedExtremal { factor } => {
            let p = ExtremalParams::from_mass(n, a)?;
            let q = ExtremalParams::new(n, p.lambda0 * (1.0 + factor))?;
            grid.nodes().iter().map(|&r| q.eval(r)).collect()
        }
        Initialization::Given(u) => {
            if u.grid() != grid {
                return Err(invalid("initial function must live on the solve grid"));
            }
            u.values().to_vec()
        }
    })
}

/// Minimizes `∫|u_r|^n` over piecewise-linear `u` with `u(0) = 0` and
/// `∫_0^∞ e^{nu-nr} dr = a`, by an augmented Lagrangian outer loop with
/// damped Newton inner solves.
pub fn minimize(n: f64, a: f64, opts: &SolveOptions) -> Result<SolveReport> {
    lambda_from_mass(n, a)?;
    opts.validate()?;
    let r = opts.grid.nodes();
    let prob = Problem {
        r,
        n,
        eps2: opts.epsilon_smooth * opts.epsilon_smooth,
    };
    let mut u = initial_values(n, a, opts)?;
    u[0] = 0.0;
    let m = u.len() - 1;

    // Least-squares multiplier estimate at the start.
    let d0 = prob.derivs(&u);
    let gm2 = dot(&d0.grad_m, &d0.grad_m);
    let mut lambda = if gm2 > 0.0 {
        -dot(&d0.grad_e, &d0.grad_m) / gm2
    } else {
        0.0
    };
    // The constraint gradient scales with the cell size; so must the penalty
    // for μ g gᵀ to convexify the Lagrangian across the constraint.
    let mut mu = if gm2 > 0.0 { 10.0f64.max(1.0 / gm2) } else { 10.0 };
    let mut iterations = 0;
    let mut prev_c = f64::INFINITY;
    let mut converged = false;

    'outer: for _ in 0..200 {
        let inner_ok;
        loop {
            if iterations >= opts.max_iters {
                break 'outer;
            }
            iterations += 1;
            let d = prob.derivs(&u);
            let c = d.mass - a;
            let (grad, step) = loop {
                let w = lambda + mu * c;
                let grad: Vec<f64> = (0..m).map(|k| d.grad_e[k] + w * d.grad_m[k]).collect();
                let mut t = d.hess_e.clone();
                for k in 0..m {
                    t.diag[k] += w * d.hess_m.diag[k];
                }
                for k in 0..m - 1 {
                    t.off[k] += w * d.hess_m.off[k];
                }
                // With one negative eigenvalue in T, T + μ g gᵀ is definite
                // exactly when 1 + μ gᵀT⁻¹g < 0; raise μ past that point
                // rather than shifting, which would cost quadratic convergence.
                if let Some((f, 1)) = t.factor_inertia(0.0) {
                    let gz = dot(&d.grad_m, &f.solve(&d.grad_m));
                    let need = -1.0 / gz;
                    if gz < 0.0 && mu <= need && need * gm2 <= 1e10 {
                        mu = 4.0 * need;
                        continue;
                    }
                }
                let scale = t.diag.iter().fold(0.0f64, |s, x| s.max(x.abs())).max(1e-300);
                let mut shift = 0.0;
                let neg: Vec<f64> = grad.iter().map(|g| -g).collect();
                let step = loop {
                    let definite = match t.factor_inertia(shift) {
                        Some((f, 0)) => Some(f),
                        Some((f, 1)) => {
                            let gz = dot(&d.grad_m, &f.solve(&d.grad_m));
                            (1.0 + mu * gz < 0.0).then_some(f)
                        }
                        _ => None,
                    };
                    if let Some(f) = definite {
                        let step = f.solve_rank_one(mu, &d.grad_m, &neg);
                        if dot(&step, &grad) < 0.0 || grad.iter().all(|g| *g == 0.0) {
                            break step;
                        }
                    }
                    shift = if shift == 0.0 { 1e-12 * scale } else { shift * 10.0 };
                    if shift > 1e12 * scale {
                        break grad.iter().map(|g| -g / scale).collect();
                    }
                };
                break (grad, step);
            };

            let merit = |v: &[f64]| {
                let c = prob.mass(v) - a;
                prob.energy(v) + lambda * c + 0.5 * mu * c * c
            };
            let f0 = prob.energy(&u) + lambda * c + 0.5 * mu * c * c;
            let decrement = -dot(&step, &grad);
            // Below a few ulps of the merit value no decrease is measurable.
            if decrement.max(0.0).sqrt() <= opts.grad_tol || decrement <= 16.0 * f64::EPSILON * f0.abs() {
                inner_ok = true;
                break;
            }
            let mut alpha = 1.0;
            let mut trial = u.clone();
            let mut accepted = false;
            for _ in 0..60 {
                for k in 0..m {
                    trial[k + 1] = u[k + 1] + alpha * step[k];
                }
                let f1 = merit(&trial);
                if f1.is_finite() && f1 < f0 && f1 <= f0 - 1e-4 * alpha * decrement {
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted {
                // No representable decrease left: the inner problem is solved
                // to rounding level.
                inner_ok = true;
                break;
            }
            u.copy_from_slice(&trial);
        }

        let c = prob.mass(&u) - a;
        if c.abs() <= opts.constraint_tol && inner_ok {
            converged = true;
            break;
        }
        lambda += mu * c;
        if c.abs() > 0.25 * prev_c {
            mu *= opts.penalty_growth;
        }
        prev_c = c.abs();
    }

    let u_star = RadialFunction::new(opts.grid.clone(), u)?;
    let residual = (weighted_mass(&u_star, n)?.mass - a).abs();
    let report = SolveReport {
        n,
        a,
        xi_hat: energy(&u_star, n)?,
        u_star,
        constraint_residual: residual,
        iterations,
        converged,
        multiplier: lambda,
    };
    if converged {
        Ok(report)
    } else {
        Err(Error::NotConverged(Box::new(report)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extremals::closed_energy;
    use crate::radial::Grid;
    use crate::varsolve::SolveOptions;
    use approx::assert_relative_eq;

    fn opts(radius: f64, cells: usize) -> SolveOptions {
        SolveOptions::new(Grid::uniform(radius, cells).unwrap())
    }

    #[test]
    fn recovers_n2_a1_energy() {
        let rep = minimize(2.0, 1.0, &opts(15.0, 600)).unwrap();
        let want = closed_energy(&ExtremalParams::from_mass(2.0, 1.0).unwrap()).unwrap();
        assert_relative_eq!(rep.xi_hat, want, max_relative = 1e-2);
        assert!(rep.constraint_residual <= 1e-10);
        assert_eq!(rep.u_star.values()[0], 0.0);
    }

    #[test]
    fn near_degenerate_mass_gives_flat_minimizer() {
        let rep = minimize(2.0, 0.5 + 1e-9, &opts(15.0, 300)).unwrap();
        assert!(rep.xi_hat < 1e-12, "{}", rep.xi_hat);
        assert!(rep.u_star.values().iter().all(|v| v.abs() < 1e-6));
    }

    #[test]
    fn rejects_inadmissible_mass() {
        assert!(matches!(
            minimize(2.0, 0.5, &opts(10.0, 50)),
            Err(Error::InvalidParam(_))
        ));
    }

    #[test]
    fn tiny_budget_reports_not_converged() {
        let mut o = opts(15.0, 200);
        o.max_iters = 1;
        match minimize(3.0, 1.0, &o) {
            Err(Error::NotConverged(rep)) => assert!(!rep.converged),
            other => panic!("expected NotConverged, got {other:?}"),
        }
    }

    #[test]
    fn default_radius_rule() {
        let r = default_radius(2.0, 1.0).unwrap();
        // e^{ξ - R} < 1e-10 with ξ = 2 ln 2 - 1.
        assert!((0.386_294_f64 - r).exp() < 1e-10);
        assert!((0.386_294_f64 - (r - 1.0)).exp() >= 1e-10);
    }
}
