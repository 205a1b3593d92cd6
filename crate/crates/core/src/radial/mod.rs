//! Radial functions on the half-line and the functionals of the sharp
//! exponential-weight inequality.
//!
//! A [`RadialFunction`] is piecewise linear on a [`Grid`] starting at `r = 0`,
//! vanishes at the origin, and is extended as a constant beyond the last
//! node. Under that extension every functional here is evaluated exactly for
//! the interpolant: the energy is a finite sum, the weighted mass is a sum of
//! closed-form exponential cell integrals plus an analytic tail.

mod bliss;
mod random;

use std::io::{Read, Write};

use serde::Serialize;

use crate::cellexp::cell_exp_value;
use crate::constants::{c_n, rough_rate, sharp_coefficient};
use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate, QuadratureSpec};

pub use bliss::{bliss_ratio, BlissRatio};
pub use random::{random_admissible, random_bliss_profile};

/// Strictly increasing nodes `0 = r_0 < r_1 < … < r_N`, `N ≥ 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    nodes: Vec<f64>,
}

impl Grid {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(invalid("a grid needs at least three nodes"));
        }
        if nodes[0] != 0.0 {
            return Err(invalid("the first grid node must be exactly 0"));
        }
        if nodes.iter().any(|r| !r.is_finite()) {
            return Err(invalid("grid nodes must be finite"));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("grid nodes must be strictly increasing"));
        }
        Ok(Self { nodes })
    }

    /// `cells` equal cells on `[0, radius]`.
    pub fn uniform(radius: f64, cells: usize) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) || cells < 2 {
            return Err(invalid("uniform grid needs radius > 0 and at least two cells"));
        }
        let h = radius / cells as f64;
        let mut nodes: Vec<f64> = (0..cells).map(|i| i as f64 * h).collect();
        nodes.push(radius);
        Self::new(nodes)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Truncation radius `r_N`.
    pub fn radius(&self) -> f64 {
        *self.nodes.last().expect("grid is non-empty")
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn cells(&self) -> usize {
        self.nodes.len() - 1
    }
}

/// Piecewise-linear `u` on a grid with `u(0) = 0`, constant past `r_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl RadialFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid(format!(
                "{} values for {} grid nodes",
                values.len(),
                grid.len()
            )));
        }
        if values[0] != 0.0 {
            return Err(invalid(format!("u(0) must be 0, got {}", values[0])));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("function values must be finite"));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at the grid nodes. `f(0)` must be exactly 0.
    pub fn sample(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::new(grid, values)
    }

    pub fn zero(grid: Grid) -> Self {
        let values = vec![0.0; grid.len()];
        Self { grid, values }
    }

    /// `c·u` on the same grid.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.grid.clone(), self.values.iter().map(|v| c * v).collect())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn nodes(&self) -> &[f64] {
        self.grid.nodes()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn last_value(&self) -> f64 {
        *self.values.last().expect("non-empty")
    }

    /// Interpolated value, constant beyond the grid.
    pub fn value_at(&self, r: f64) -> f64 {
        let nodes = self.nodes();
        if r <= 0.0 {
            return 0.0;
        }
        if r >= self.grid.radius() {
            return self.last_value();
        }
        let j = nodes.partition_point(|&x| x <= r) - 1;
        let t = (r - nodes[j]) / (nodes[j + 1] - nodes[j]);
        self.values[j] + t * (self.values[j + 1] - self.values[j])
    }

    /// Cell slopes `Δu_i / Δr_i`.
    pub fn slopes(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes()
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(r, u)| (u[1] - u[0]) / (r[1] - r[0]))
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    fn check_nonnegative(&self) -> Result<()> {
        match self.values.iter().position(|&v| v < 0.0) {
            Some(index) => Err(Error::NegativeValues {
                index,
                value: self.values[index],
            }),
            None => Ok(()),
        }
    }

    /// CSV with header `r,u`, 17 significant digits per number.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["r", "u"])?;
        for (r, u) in self.nodes().iter().zip(&self.values) {
            w.write_record([format!("{r:.16e}"), format!("{u:.16e}")])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let headers = rdr.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "r" || &headers[1] != "u" {
            return Err(Error::Parse(format!(
                "expected header `r,u`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut rs = Vec::new();
        let mut us = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad number `{s}`: {e}")))
            };
            rs.push(parse(&rec[0])?);
            us.push(parse(&rec[1])?);
        }
        Self::new(Grid::new(rs)?, us)
    }
}

fn check_n_at_least_one(n: f64) -> Result<()> {
    if n.is_finite() && n >= 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("exponent n must be >= 1, got {n}")))
    }
}

/// `∫_0^∞ |u'|^n dr` for the interpolant (exact).
pub fn energy(u: &RadialFunction, n: f64) -> Result<f64> {
    check_n_at_least_one(n)?;
    Ok(u.slopes()
        .zip(u.nodes().windows(2))
        .map(|(s, r)| s.abs().powf(n) * (r[1] - r[0]))
        .sum())
}

/// Weighted mass split into the part over the grid and the analytic tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mass {
    /// `∫_0^∞ e^{n u - n r} dr`, tail included.
    pub mass: f64,
    /// `∫_{r_N}^∞ e^{n u_N - n r} dr = e^{n(u_N - r_N)}/n`.
    pub tail: f64,
}

/// `∫_0^∞ e^{n u - n r} dr` for the interpolant (exact per cell).
pub fn weighted_mass(u: &RadialFunction, n: f64) -> Result<Mass> {
    check_n_at_least_one(n)?;
    let nodes = u.nodes();
    let vals = u.values();
    let mut body = 0.0;
    for j in 0..nodes.len() - 1 {
        let left = n * (vals[j] - nodes[j]);
        let right = n * (vals[j + 1] - nodes[j + 1]);
        body += cell_exp_value(left, right, nodes[j + 1] - nodes[j]);
    }
    let tail = (n * (u.last_value() - u.grid.radius())).exp() / n;
    Ok(Mass {
        mass: body + tail,
        tail,
    })
}

/// `∫_R^∞ e^{n u - n r} dr` (exact for the interpolant).
pub fn mass_beyond(u: &RadialFunction, n: f64, from: f64) -> Result<f64> {
    check_n_at_least_one(n)?;
    if !(from >= 0.0) {
        return Err(invalid("cut radius must be >= 0"));
    }
    let nodes = u.nodes();
    let vals = u.values();
    let radius = u.grid.radius();
    if from >= radius {
        return Ok((n * (u.last_value() - from)).exp() / n);
    }
    let mut total = (n * (u.last_value() - radius)).exp() / n;
    let start = nodes.partition_point(|&x| x <= from) - 1;
    for j in start..nodes.len() - 1 {
        let (r0, u0) = if j == start {
            (from, u.value_at(from))
        } else {
            (nodes[j], vals[j])
        };
        let (r1, u1) = (nodes[j + 1], vals[j + 1]);
        if r1 > r0 {
            total += cell_exp_value(n * (u0 - r0), n * (u1 - r1), r1 - r0);
        }
    }
    Ok(total)
}

/// Which form of the inequality a [`DeficitReport`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Statement {
    /// `ln ∫ e^{nu-nr} ≤ coeff·∫|u'|^n + C_n`.
    AsPrinted,
    /// `ln (n ∫ e^{nu-nr}) ≤ coeff·∫|u'|^n + C_n`; the form for which `C_n` is sharp.
    Consistent,
    /// `ln ∫ e^{u-r} ≤ ∫|u'|`.
    N1,
}

/// One evaluation of an inequality at a function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeficitReport {
    pub n: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`
    pub deficit: f64,
    pub energy: f64,
    pub mass: f64,
    pub tail_estimate: f64,
    pub quad_error: f64,
    pub statement: Statement,
}

fn rounding_bound(u: &RadialFunction, mass: f64) -> f64 {
    4.0 * f64::EPSILON * u.grid.cells() as f64 * mass
}

/// Evaluates the sharp inequality at a nonnegative `u`.
pub fn deficit(u: &RadialFunction, n: f64, statement: Statement) -> Result<DeficitReport> {
    if statement == Statement::N1 {
        if n != 1.0 {
            return Err(invalid("the N1 statement is the n = 1 case"));
        }
        return deficit_n1(u);
    }
    u.check_nonnegative()?;
    let coeff = sharp_coefficient(n)?;
    let cn = c_n(n)?;
    let e = energy(u, n)?;
    let m = weighted_mass(u, n)?;
    let lhs = match statement {
        Statement::AsPrinted => m.mass.ln(),
        Statement::Consistent => m.mass.ln() + n.ln(),
        Statement::N1 => unreachable!(),
    };
    let rhs = coeff * e + cn;
    Ok(DeficitReport {
        n,
        lhs,
        rhs,
        deficit: rhs - lhs,
        energy: e,
        mass: m.mass,
        tail_estimate: m.tail,
        quad_error: rounding_bound(u, m.mass),
        statement,
    })
}

/// The `n = 1` inequality: `ln ∫ e^{u-r} ≤ ∫|u'|`.
pub fn deficit_n1(u: &RadialFunction) -> Result<DeficitReport> {
    u.check_nonnegative()?;
    let e = energy(u, 1.0)?;
    let m = weighted_mass(u, 1.0)?;
    let lhs = m.mass.ln();
    Ok(DeficitReport {
        n: 1.0,
        lhs,
        rhs: e,
        deficit: e - lhs,
        energy: e,
        mass: m.mass,
        tail_estimate: m.tail,
        quad_error: rounding_bound(u, m.mass),
        statement: Statement::N1,
    })
}

/// `∫_0^∞ e^{β u^{n/(n-1)} - n r} dr`, per-cell quadrature plus analytic tail.
pub fn moser_functional(u: &RadialFunction, n: f64, beta: f64) -> Result<f64> {
    if !(n.is_finite() && n > 1.0) {
        return Err(invalid(format!("exponent n must be > 1, got {n}")));
    }
    u.check_nonnegative()?;
    let p = n / (n - 1.0);
    let nodes = u.nodes();
    let vals = u.values();
    let cells = u.grid.cells();
    let spec = QuadratureSpec {
        abs_tol: 1e-13 / cells as f64,
        rel_tol: 1e-12,
        max_subdivisions: 200,
    };
    let mut total = 0.0;
    for j in 0..cells {
        let (r0, r1) = (nodes[j], nodes[j + 1]);
        let (u0, u1) = (vals[j], vals[j + 1]);
        let slope = (u1 - u0) / (r1 - r0);
        let g = |r: f64| {
            let v = (u0 + slope * (r - r0)).max(0.0);
            (beta * v.powf(p) - n * r).exp()
        };
        total += integrate(g, r0, r1, &spec)?.value;
    }
    let radius = u.grid.radius();
    total += (beta * u.last_value().powf(p) - n * radius).exp() / n;
    Ok(total)
}

/// Majorant `exp{β₀ⁿ ∫|u'|^n} ∫_R^∞ e^{[(n-1)β₀^{-n/(n-1)} - n] r} dr`
/// of `∫_R^∞ e^{nu - nr} dr`.
pub fn tail_bound(u: &RadialFunction, n: f64, beta0: f64, from: f64) -> Result<f64> {
    let rate = rough_rate(n, beta0)?;
    if !(from >= 0.0) {
        return Err(invalid("cut radius must be >= 0"));
    }
    let e = energy(u, n)?;
    Ok((beta0.powf(n) * e - rate * from).exp() / rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::LN_2;

    fn ramp(radius: f64, scale: f64) -> RadialFunction {
        let grid = Grid::new(vec![0.0, 0.5 * radius, radius, radius + 1.0]).unwrap();
        RadialFunction::sample(grid, |r| scale * r.min(radius)).unwrap()
    }

    fn extremal_n2(cells: usize) -> RadialFunction {
        // n = 2, lambda0 = 1: v = ln(2 / (1 + e^{-2r})).
        let grid = Grid::uniform(20.0, cells).unwrap();
        RadialFunction::sample(grid, |r| LN_2 - (-2.0 * r).exp().ln_1p()).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(vec![0.0, 1.0]).is_err());
        assert!(Grid::new(vec![0.1, 1.0, 2.0]).is_err());
        assert!(Grid::new(vec![0.0, 1.0, 1.0]).is_err());
        assert!(Grid::new(vec![0.0, 1.0, f64::INFINITY]).is_err());
        assert!(Grid::uniform(5.0, 1).is_err());
        let g = Grid::uniform(5.0, 10).unwrap();
        assert_eq!(g.len(), 11);
        assert_eq!(g.radius(), 5.0);
    }

    #[test]
    fn function_validation() {
        let g = Grid::uniform(1.0, 2).unwrap();
        assert!(RadialFunction::new(g.clone(), vec![0.1, 0.0, 0.0]).is_err());
        assert!(RadialFunction::new(g.clone(), vec![0.0, 0.0]).is_err());
        assert!(RadialFunction::new(g, vec![0.0, f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn interpolation_and_extension() {
        let u = ramp(1.0, 1.0);
        assert_abs_diff_eq!(u.value_at(0.25), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(u.value_at(7.0), 1.0, epsilon = 1e-15);
        assert_eq!(u.value_at(-1.0), 0.0);
    }

    #[test]
    fn energy_examples() {
        let g = Grid::uniform(3.0, 6).unwrap();
        assert_eq!(energy(&RadialFunction::zero(g), 2.0).unwrap(), 0.0);
        assert_abs_diff_eq!(energy(&ramp(1.0, 1.0), 2.0).unwrap(), 1.0, epsilon = 1e-15);
        let e = energy(&extremal_n2(8000), 2.0).unwrap();
        assert_abs_diff_eq!(e, 2.0 * LN_2 - 1.0, epsilon = 1e-5);
        assert!(energy(&ramp(1.0, 1.0), 0.5).is_err());
    }

    #[test]
    fn mass_examples() {
        let g = Grid::uniform(40.0, 10).unwrap();
        let z = RadialFunction::zero(g);
        assert_abs_diff_eq!(weighted_mass(&z, 2.0).unwrap().mass, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(weighted_mass(&z, 3.0).unwrap().mass, 1.0 / 3.0, epsilon = 1e-15);
        let m = weighted_mass(&extremal_n2(8000), 2.0).unwrap();
        assert_abs_diff_eq!(m.mass, 1.0, epsilon = 1e-6);
        assert!(m.tail < 1e-15);
    }

    #[test]
    fn mass_agrees_with_cellwise_quadrature() {
        let u = random_admissible(3, 7, 6.0, 2.5).unwrap();
        for n in [1.0, 1.5, 2.0, 3.5] {
            let exact = weighted_mass(&u, n).unwrap();
            let mut q = exact.tail;
            for w in u.nodes().windows(2) {
                q += integrate(
                    |r| (n * (u.value_at(r) - r)).exp(),
                    w[0],
                    w[1],
                    &QuadratureSpec::tight(),
                )
                .unwrap()
                .value;
            }
            assert_abs_diff_eq!(exact.mass, q, epsilon = 1e-12 * q);
        }
    }

    #[test]
    fn mass_beyond_consistency() {
        let u = random_admissible(11, 5, 4.0, 1.0).unwrap();
        let total = weighted_mass(&u, 2.0).unwrap().mass;
        assert_abs_diff_eq!(mass_beyond(&u, 2.0, 0.0).unwrap(), total, epsilon = 1e-14);
        let m = weighted_mass(&u, 2.0).unwrap();
        assert_abs_diff_eq!(mass_beyond(&u, 2.0, 4.0).unwrap(), m.tail, epsilon = 1e-15);
        let a = mass_beyond(&u, 2.0, 1.3).unwrap();
        let b = mass_beyond(&u, 2.0, 2.9).unwrap();
        assert!(a > b && b > 0.0);
        assert!(mass_beyond(&u, 2.0, 9.0).unwrap() < m.tail);
    }

    #[test]
    fn deficit_zero_function() {
        let u = RadialFunction::zero(Grid::uniform(40.0, 4).unwrap());
        let d = deficit(&u, 2.0, Statement::Consistent).unwrap();
        assert_abs_diff_eq!(d.lhs, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.rhs, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.deficit, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn deficit_extremal_n2() {
        let d = deficit(&extremal_n2(20000), 2.0, Statement::Consistent).unwrap();
        assert_abs_diff_eq!(d.deficit, 0.5, epsilon = 1e-6);
    }

    #[test]
    fn statements_differ_by_ln_n() {
        let u = random_admissible(5, 6, 8.0, 2.0).unwrap();
        for n in [1.5, 2.0, 3.0] {
            let p = deficit(&u, n, Statement::AsPrinted).unwrap();
            let c = deficit(&u, n, Statement::Consistent).unwrap();
            assert_abs_diff_eq!(p.deficit - c.deficit, n.ln(), epsilon = 1e-12);
        }
    }

    #[test]
    fn deficit_rejects_negative_values() {
        let g = Grid::uniform(2.0, 2).unwrap();
        let u = RadialFunction::new(g, vec![0.0, -0.1, 0.3]).unwrap();
        assert!(matches!(
            deficit(&u, 2.0, Statement::Consistent),
            Err(Error::NegativeValues { index: 1, .. })
        ));
        assert!(deficit_n1(&u).is_err());
        assert!(deficit(&u, 1.0, Statement::Consistent).is_err());
    }

    #[test]
    fn n1_examples() {
        let z = RadialFunction::zero(Grid::uniform(50.0, 3).unwrap());
        let d = deficit_n1(&z).unwrap();
        assert_abs_diff_eq!(d.deficit, 0.0, epsilon = 1e-15);

        // u = r on [0, 1], then 1: mass = 1 + 1 = 2.
        let d = deficit_n1(&ramp(1.0, 1.0)).unwrap();
        assert_abs_diff_eq!(d.mass, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(d.lhs, LN_2, epsilon = 1e-14);
        assert_abs_diff_eq!(d.rhs, 1.0, epsilon = 1e-15);

        let d = deficit_n1(&ramp(1.0, 0.5)).unwrap();
        assert!(d.deficit >= 0.0);
        let via_enum = deficit(&ramp(1.0, 0.5), 1.0, Statement::N1).unwrap();
        assert_eq!(d, via_enum);
    }

    #[test]
    fn moser_functional_examples() {
        let z = RadialFunction::zero(Grid::uniform(40.0, 4).unwrap());
        assert_abs_diff_eq!(moser_functional(&z, 2.0, 1.0).unwrap(), 0.5, epsilon = 1e-14);
        for n in [1.5, 2.0, 4.0] {
            assert_abs_diff_eq!(moser_functional(&z, n, 0.0).unwrap(), 1.0 / n, epsilon = 1e-14);
        }
        // u = r on [0, 1]: energy 1, so the Moser bound 1/(2 - 1) = 1.
        let u = ramp(1.0, 1.0);
        let v = moser_functional(&u, 2.0, 1.0).unwrap();
        // ∫_0^1 e^{r^2 - 2r} dr + e^{1-2}/2
        let q = integrate(|r| (r * r - 2.0 * r).exp(), 0.0, 1.0, &QuadratureSpec::tight())
            .unwrap()
            .value
            + (-1f64).exp() / 2.0;
        assert_abs_diff_eq!(v, q, epsilon = 1e-12);
        assert!(v <= 1.0);
    }

    #[test]
    fn tail_bound_examples() {
        let z = RadialFunction::zero(Grid::uniform(10.0, 4).unwrap());
        assert_abs_diff_eq!(tail_bound(&z, 2.0, 1.0, 0.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            tail_bound(&z, 2.0, 1.0, 4f64.ln()).unwrap(),
            0.25,
            epsilon = 1e-15
        );
        let u = random_admissible(2, 4, 5.0, 1.0).unwrap();
        let mut prev = f64::INFINITY;
        for r in [0.0, 1.0, 5.0, 20.0, 80.0] {
            let t = tail_bound(&u, 2.0, 1.0, r).unwrap();
            assert!(t < prev);
            prev = t;
        }
        assert!(prev < 1e-30);
        assert!(matches!(
            tail_bound(&u, 2.0, 0.5, 0.0),
            Err(Error::BelowThreshold { .. })
        ));
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let u = random_admissible(9, 5, 3.0, 1.7).unwrap();
        let mut buf = Vec::new();
        u.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("r,u\n"));
        let back = RadialFunction::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, u);
        assert!(RadialFunction::read_csv("x,y\n0,0\n".as_bytes()).is_err());
    }
}
