//! Executable acceptance checks. Each criterion returns named checks with the
//! measured worst-case value and the tolerance it was held to; the CLI's
//! `verify` command and the acceptance test both run these.

use std::f64::consts::{LN_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::constants::{bliss_constant, c_n, moser_bound, rough_constants, rough_threshold, sharp_coefficient};
use crate::error::Result;
use crate::extremals::{bliss_extremal, closed_energy, extremal_deficit, ExtremalParams};
use crate::quadrature::{integrate_halfline, QuadratureSpec};
use crate::radial::{
    bliss_ratio, deficit, deficit_n1, energy, mass_beyond, moser_functional, random_admissible, random_bliss_profile, tail_bound,
    Grid, RadialFunction, Statement,
};
use crate::special::harmonic;
use crate::sphere::{
    corollary2_halfline, corollary2_infimum, corollary3_deficit, mobius_factor, onofri_deficit, phi_dirichlet,
    phi_dirichlet_quadrature, random_band_limited, transfer_identity_check, AxiFunction, DiskFunction, DiskSpec,
};
use crate::varsolve::{el_residual, minimize, shoot, Initialization, SolveOptions};

/// One measured quantity against its tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    /// `None` for qualitative checks (signs, monotonicity).
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub checks: Vec<Check>,
}

pub const CRITERIA: [(u32, &str); 10] = [
    (1, "constants"),
    (2, "extremal mass and energy identities"),
    (3, "sharpness of the constant"),
    (4, "printed versus consistent statement"),
    (5, "random admissible functions"),
    (6, "variational reconstruction"),
    (7, "shooting on the Euler-Lagrange equation"),
    (8, "Moser bound, rough constants and tails"),
    (9, "Bliss inequality"),
    (10, "disk and sphere geometry"),
];

#[derive(Default)]
struct Checks(Vec<Check>);

impl Checks {
    /// `value ≤ tol`; a `NaN` value fails.
    fn le(&mut self, name: impl Into<String>, value: f64, tol: f64) {
        self.0.push(Check {
            name: name.into(),
            passed: value <= tol,
            value,
            tolerance: Some(tol),
            error: None,
        });
    }

    fn holds(&mut self, name: impl Into<String>, ok: bool, value: f64) {
        self.0.push(Check {
            name: name.into(),
            passed: ok,
            value,
            tolerance: None,
            error: None,
        });
    }

    /// Records a computation that could not be carried out as a failed check.
    fn attempt(&mut self, name: &str, f: impl FnOnce(&mut Checks) -> Result<()>) {
        if let Err(e) = f(self) {
            self.0.push(Check {
                name: name.into(),
                passed: false,
                value: f64::NAN,
                tolerance: None,
                error: Some(e.to_string()),
            });
        }
    }
}

pub fn run(id: u32) -> Option<CriterionReport> {
    let (_, title) = *CRITERIA.iter().find(|c| c.0 == id)?;
    let mut c = Checks::default();
    match id {
        1 => constants(&mut c),
        2 => extremal_identities(&mut c),
        3 => sharpness(&mut c),
        4 => statement_gap(&mut c),
        5 => random_validity(&mut c),
        6 => reconstruction(&mut c),
        7 => shooting(&mut c),
        8 => moser(&mut c),
        9 => bliss(&mut c),
        10 => geometry(&mut c),
        _ => unreachable!(),
    }
    let passed = !c.0.is_empty() && c.0.iter().all(|k| k.passed);
    Some(CriterionReport {
        id,
        title,
        passed,
        checks: c.0,
    })
}

pub fn run_all() -> Vec<CriterionReport> {
    CRITERIA.iter().filter_map(|&(id, _)| run(id)).collect()
}

const EXPONENTS: [f64; 5] = [1.5, 2.0, 2.5, 3.0, 4.0];

fn constants(c: &mut Checks) {
    c.attempt("constants", |c| {
        let mut worst: f64 = 0.0;
        for m in 2..=6u64 {
            worst = worst.max((c_n(m as f64)? - harmonic(m - 1)).abs());
        }
        c.le("c_n(m) = H_{m-1}, m = 2..6", worst, 1e-12);
        let hand = 2.0 - 2.0 * LN_2 + 2.0 / 3.0;
        c.le("c_n(2.5) = 2 - 2 ln 2 + 2/3", (c_n(2.5)? - hand).abs(), 1e-8);
        let s = (sharp_coefficient(2.0)? - 0.5).abs().max((sharp_coefficient(3.0)? - 4.0 / 9.0).abs());
        c.le("sharp coefficient at n = 2, 3", s, 1e-15);
        Ok(())
    });
}

fn extremal_identities(c: &mut Checks) {
    c.attempt("extremal identities", |c| {
        let spec = QuadratureSpec::tight();
        let (mut mass_err, mut energy_err) = (0.0f64, 0.0f64);
        for n in EXPONENTS {
            for l in [0.1, 1.0, 10.0] {
                let p = ExtremalParams::new(n, l)?;
                let m = integrate_halfline(|r| (n * (p.eval(r) - r)).exp(), &spec)?.value;
                mass_err = mass_err.max((m - (l + 1.0) / (n * l)).abs());
                let e = integrate_halfline(|r| p.slope(r).powf(n), &spec)?.value;
                energy_err = energy_err.max((e - closed_energy(&p)?).abs());
            }
        }
        c.le("mass identity (λ₀+1)/(nλ₀)", mass_err, 1e-6);
        c.le("energy identity against the closed form", energy_err, 1e-8);
        Ok(())
    });
}

fn sharpness(c: &mut Checks) {
    c.attempt("sharpness", |c| {
        let mut worst: f64 = 0.0;
        for a in [1.0, 10.0, 100.0, 1e4] {
            let d = extremal_deficit(&ExtremalParams::from_mass(2.0, a)?)?;
            worst = worst.max((d - 1.0 / (2.0 * a)).abs());
        }
        c.le("n = 2 deficit equals 1/(2a)", worst, 1e-9);
        let masses: Vec<f64> = (0..=16).map(|k| 10f64.powf(k as f64 / 4.0)).collect();
        for n in EXPONENTS {
            let ds = masses
                .iter()
                .map(|&a| extremal_deficit(&ExtremalParams::from_mass(n, a)?))
                .collect::<Result<Vec<f64>>>()?;
            let positive = ds.iter().all(|&d| d > 0.0);
            let decreasing = ds.windows(2).all(|w| w[1] < w[0]);
            let last = *ds.last().expect("non-empty");
            c.holds(format!("n = {n}: deficit positive and decreasing"), positive && decreasing, last);
            c.le(format!("n = {n}: deficit at a = 1e4"), last, 1e-2);
        }
        Ok(())
    });
}

fn sample(seed: u64) -> Result<RadialFunction> {
    let pieces = 1 + (seed % 12) as usize;
    let radius = 1.0 + (seed % 7) as f64 * 2.0;
    let amplitude = 0.25 + (seed % 5) as f64;
    random_admissible(seed, pieces, radius, amplitude)
}

fn statement_gap(c: &mut Checks) {
    c.attempt("statement gap", |c| {
        let mut worst: f64 = 0.0;
        // Bounded slopes keep both deficits O(1), so the identity is visible
        // at 1e-12 above the rounding of the right-hand side.
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let values = (0..=8).map(|i| if i == 0 { 0.0 } else { rng.gen_range(0.0..2.0) }).collect();
            let u = RadialFunction::new(Grid::uniform(10.0, 8)?, values)?;
            let n = EXPONENTS[seed as usize % EXPONENTS.len()];
            let gap = deficit(&u, n, Statement::AsPrinted)?.deficit - deficit(&u, n, Statement::Consistent)?.deficit;
            worst = worst.max((gap - n.ln()).abs());
        }
        c.le("printed minus consistent deficit equals ln n", worst, 1e-12);
        Ok(())
    });
}

fn random_validity(c: &mut Checks) {
    c.attempt("random functions", |c| {
        let mut min_d = f64::INFINITY;
        let mut min_n1 = f64::INFINITY;
        for seed in 0..1000 {
            let u = sample(seed)?;
            for n in EXPONENTS {
                min_d = min_d.min(deficit(&u, n, Statement::Consistent)?.deficit);
            }
            min_n1 = min_n1.min(deficit_n1(&u)?.deficit);
        }
        c.holds("consistent deficit > 0 on 1000 functions x 5 exponents", min_d > 0.0, min_d);
        c.le("n = 1 deficit >= -1e-9", -min_n1, 1e-9);
        let zero = RadialFunction::zero(Grid::uniform(5.0, 10)?);
        c.le("n = 1 equality at u = 0", deficit_n1(&zero)?.deficit.abs(), 1e-9);
        Ok(())
    });
}

fn sup_distance(u: &RadialFunction, p: &ExtremalParams) -> f64 {
    u.nodes()
        .iter()
        .zip(u.values())
        .map(|(&r, &v)| (v - p.eval(r)).abs())
        .fold(0.0, f64::max)
}

fn reconstruction(c: &mut Checks) {
    for (n, a) in [(2.0, 1.0), (2.0, 2.0), (2.0, 5.0), (3.0, 1.0)] {
        c.attempt(&format!("minimize n = {n}, a = {a}"), |c| {
            let grid = Grid::uniform(15.0, 2999)?;
            let p = ExtremalParams::from_mass(n, a)?;
            let target = closed_energy(&p)?;
            let cold = minimize(n, a, &SolveOptions::new(grid.clone()))?;
            let warm = minimize(
                n,
                a,
                &SolveOptions::new(grid).with_init(Initialization::PerturbedExtremal { factor: 0.2 }),
            )?;
            c.le(
                format!("n = {n}, a = {a}: relative energy error"),
                (cold.xi_hat - target).abs() / target,
                1e-2,
            );
            if n == 2.0 {
                c.le(format!("n = {n}, a = {a}: sup distance to extremal"), sup_distance(&cold.u_star, &p), 5e-3);
            }
            c.le(
                format!("n = {n}, a = {a}: cold versus warm start"),
                (cold.xi_hat - warm.xi_hat).abs() / cold.xi_hat,
                1e-3,
            );
            Ok(())
        });
    }
}

fn shooting(c: &mut Checks) {
    c.attempt("shooting", |c| {
        let grid = Grid::uniform(20.0, 400)?;
        let fine = Grid::uniform(20.0, 99_999)?;
        let (mut worst, mut resid) = (0.0f64, 0.0f64);
        for n in [2.0, 3.0] {
            for l in [0.5, 1.0, 2.0] {
                let p = ExtremalParams::new(n, l)?;
                worst = worst.max(sup_distance(&shoot(n, l, &grid)?, &p));
                let v = RadialFunction::sample(fine.clone(), |r| p.eval(r))?;
                resid = resid.max(el_residual(&v, n, p.tau)?);
            }
        }
        c.le("shooting against the closed form on [0, 20]", worst, 1e-6);
        c.le("Euler-Lagrange residual of the closed form, 1e5 nodes", resid, 1e-6);
        Ok(())
    });
}

fn moser(c: &mut Checks) {
    c.attempt("moser", |c| {
        let mut worst = f64::NEG_INFINITY;
        for seed in 0..200u64 {
            let n = if seed % 2 == 0 { 2.0 } else { 3.0 };
            let a: f64 = [0.5, 1.0, 2.0][(seed % 3) as usize];
            let beta = 0.5 * n * a.powf(1.0 / (1.0 - n));
            let base = sample(seed)?;
            let e = energy(&base, n)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let target = a * rng.gen_range(0.05..1.0);
            let scale = if e > 0.0 { (target / e).powf(1.0 / n) } else { 0.0 };
            let u = base.scaled(scale)?;
            worst = worst.max(moser_functional(&u, n, beta)? - moser_bound(n, a, beta)?);
        }
        c.le("moser functional minus bound on 200 samples", worst, 1e-8);

        for n in [2.0, 3.0] {
            let t = rough_threshold(n)?;
            let cs = (1..=8)
                .map(|k| rough_constants(n, t * (1.0 + 10f64.powi(-k))).map(|r| r.c))
                .collect::<Result<Vec<f64>>>()?;
            let increasing = cs.windows(2).all(|w| w[1] > w[0]);
            let last = *cs.last().expect("non-empty");
            c.holds(format!("n = {n}: rough constant grows as beta0 decreases"), increasing && last > 1e6, last);
        }

        let mut tail_gap = f64::NEG_INFINITY;
        for seed in 0..200 {
            let u = sample(seed)?;
            for from in [0.5, 2.0, 5.0, 12.0] {
                tail_gap = tail_gap.max(mass_beyond(&u, 2.0, from)? - tail_bound(&u, 2.0, 1.0, from)?);
            }
        }
        c.le("measured tail minus tail bound, n = 2, beta0 = 1", tail_gap, 1e-10);
        Ok(())
    });
}

fn bliss(c: &mut Checks) {
    c.attempt("bliss", |c| {
        let spec = QuadratureSpec::default();
        for (k, l) in [(2.0, 4.0), (3.0, 6.0)] {
            let cb = bliss_constant(k, l)?.c_b;
            let mut worst: f64 = 0.0;
            for seed in 0..200 {
                let r = bliss_ratio(random_bliss_profile(seed), k, l, 40.0, &spec)?;
                worst = worst.max(r.ratio / cb);
            }
            c.le(format!("(k, l) = ({k}, {l}): ratio / C_b on 200 samples"), worst, 1.0 + 1e-6);
            let params = bliss_constant(k, l)?;
            let mut attained: f64 = 0.0;
            for (cc, d) in [(1.0, 1.0), (2.0, 0.5), (0.3, 3.0)] {
                let f = bliss_extremal(cc, d, params.alpha)?;
                let r = bliss_ratio(f, k, l, 1e5, &spec)?;
                attained = attained.max((r.ratio / cb - 1.0).abs());
            }
            c.le(format!("(k, l) = ({k}, {l}): extremal family attains C_b"), attained, 1e-6);
        }
        c.le("C_b(2, 4) = 3/2", (bliss_constant(2.0, 4.0)?.c_b - 1.5).abs(), 1e-12);
        Ok(())
    });
}

fn geometry(c: &mut Checks) {
    c.attempt("geometry", |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let r = rng.gen_range(0.2..3.0);
            let b = rng.gen_range(-1.5..1.5);
            let spec0 = DiskSpec::new(r, b, 1.0)?;
            let a = spec0.min_mass() * rng.gen_range(1.0..50.0);
            let spec = DiskSpec::new(r, b, a)?;
            worst = worst.max((corollary2_infimum(&spec)? - corollary2_halfline(&spec)?).abs());
        }
        c.le("disk infimum against 2π times the half-line form", worst, 1e-10);
        let at = corollary2_infimum(&DiskSpec::new(1.0, 0.0, 2.0 * PI)?)?;
        c.le("disk infimum at (b, r, a) = (0, 1, 2π) is 4π(ln 2 - 1/2)", (at - 4.0 * PI * (LN_2 - 0.5)).abs(), 1e-12);

        let mut phi_gap: f64 = 0.0;
        for r in [0.5, 1.0, 10.0, 100.0] {
            phi_gap = phi_gap.max((phi_dirichlet(r)? - phi_dirichlet_quadrature(r)?).abs());
        }
        c.le("Dirichlet energy of φ: closed form against quadrature", phi_gap, 1e-8);

        let bump = AxiFunction::analytic(
            |t: f64| if t < 0.0 { 0.8 * t.powi(4) } else { 0.0 },
            Some(Box::new(|t: f64| if t < 0.0 { 3.2 * t.powi(3) } else { 0.0 })),
        );
        let cut = 0.5;
        let u3 = mobius_factor(3.0)?;
        let shift = u3.eval(cut);
        let truncated = AxiFunction::analytic(
            move |t: f64| if t < cut { (u3.eval(t) - shift) * ((cut - t) / (cut + 1.0)).powi(4) } else { 0.0 },
            None,
        );
        let mut mismatch: f64 = 0.0;
        for r in [10.0, 100.0] {
            mismatch = mismatch.max(transfer_identity_check(&AxiFunction::constant(0.0)?, r)?);
            mismatch = mismatch.max(transfer_identity_check(&bump, r)?);
            mismatch = mismatch.max(transfer_identity_check(&truncated, r)?);
        }
        c.le("transfer identity mismatch", mismatch, 1e-6);

        let mut min_onofri = f64::INFINITY;
        for seed in 0..500 {
            min_onofri = min_onofri.min(onofri_deficit(&random_band_limited(seed, 6)?)?);
        }
        c.le("Onofri deficit >= -1e-9 on 500 random functions", -min_onofri, 1e-9);
        let mut mobius: f64 = 0.0;
        for l in [0.25, 0.5, 2.0, 4.0] {
            mobius = mobius.max(onofri_deficit(&mobius_factor(l)?)?.abs());
        }
        c.le("Onofri deficit on the Möbius family", mobius, 1e-6);
        let t = AxiFunction::polynomial(vec![0.0, 1.0])?;
        let hand = 2.0 / 3.0 - (2f64.sinh() / 2.0).ln();
        c.le("Onofri deficit of u = x₃ is 2/3 - ln(sinh 2 / 2)", (onofri_deficit(&t)? - hand).abs(), 1e-6);

        let parabola = DiskFunction::smooth(|s| 1.0 - s * s, |s| -2.0 * s);
        let e2 = 2f64.exp();
        let hand3 = 1.5 - ((e2 - 1.0) / 2.0).ln();
        c.le(
            "disk deficit of 1 - s², n = 2, is 3/2 - ln((e² - 1)/2)",
            (corollary3_deficit(&parabola, 2)? - hand3).abs(),
            1e-5,
        );
        Ok(())
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_criterion() {
        assert!(run(0).is_none());
        assert!(run(11).is_none());
    }

    #[test]
    fn cheap_criteria_pass() {
        for id in [1, 4, 10] {
            let rep = run(id).unwrap();
            assert!(rep.passed, "{rep:#?}");
        }
    }

    #[test]
    fn failures_are_reported_not_raised() {
        let mut c = Checks::default();
        c.attempt("broken", |_| Err(crate::error::invalid("boom")));
        c.le("nan fails", f64::NAN, 1.0);
        assert!(c.0.iter().all(|k| !k.passed));
        assert_eq!(c.0[0].error.as_deref(), Some("invalid parameter: boom"));
    }
}
