use std::fs::File;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use sharpineq::constants::{bliss_constant, c_n, moser_bound, rough_constants, rough_threshold, sharp_coefficient};
use sharpineq::extremals::{closed_energy, extremal_deficit, mass_from_lambda, ExtremalParams};
use sharpineq::quadrature::{integrate_halfline, QuadratureSpec};
use sharpineq::radial::{
    bliss_ratio, deficit, deficit_n1, energy, moser_functional, random_admissible, random_bliss_profile, Grid,
    RadialFunction, Statement,
};
use sharpineq::sphere::{mobius_factor, onofri, random_band_limited, AxiFunction};
use sharpineq::varsolve::{default_radius, minimize, shoot_with, Initialization, ShootOptions, SolveOptions, SolveReport};
use sharpineq::{verify, Error};

use crate::args::*;
use crate::output::profile_csv;

/// What a command produced: the report body plus, for `--emit-profile`, a
/// sampled profile as CSV.
pub struct Outcome {
    pub passed: bool,
    pub parameters: Value,
    pub result: Value,
    pub profile: Option<String>,
}

#[derive(Debug)]
pub struct Failure {
    pub kind: &'static str,
    pub message: String,
}

impl Failure {
    pub fn new(kind: &'static str, message: impl Into<String>) -> Self {
        Self { kind, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::new(e.kind(), e.to_string())
    }
}

type Res = Result<Outcome, Failure>;

/// Tolerance on the `n = 1` deficit, which is exactly zero for constants.
const N1_SLACK: f64 = 1e-9;
const ONOFRI_SLACK: f64 = 1e-9;
const GOLDEN: f64 = 0.618_033_988_749_894_8;

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn open(path: &Path) -> Result<File, Failure> {
    File::open(path).map_err(|e| Failure::new("io", format!("cannot open {}: {e}", path.display())))
}

fn uniform_grid(radius: f64, nodes: usize) -> Result<Grid, Failure> {
    if nodes < 3 {
        return Err(Failure::new("invalid_param", format!("nodes must be >= 3, got {nodes}")));
    }
    Ok(Grid::uniform(radius, nodes - 1)?)
}

fn sup_distance(u: &RadialFunction, p: &ExtremalParams) -> f64 {
    u.nodes()
        .iter()
        .zip(u.values())
        .map(|(&r, &v)| (v - p.eval(r)).abs())
        .fold(0.0, f64::max)
}

fn extremal_from(n: f64, a: Option<f64>, lambda0: Option<f64>) -> Result<ExtremalParams, Failure> {
    Ok(match (a, lambda0) {
        (Some(a), None) => ExtremalParams::from_mass(n, a)?,
        (None, Some(l)) => ExtremalParams::new(n, l)?,
        _ => return Err(Failure::new("usage", "give exactly one of --a and --lambda0")),
    })
}

pub fn constants(args: &ConstantsArgs) -> Res {
    let n = args.n;
    let mut result = Map::new();
    result.insert("n".into(), n.into());
    result.insert("sharp_coefficient".into(), sharp_coefficient(n)?.into());
    result.insert("c_n".into(), c_n(n)?.into());
    result.insert("rough_threshold".into(), rough_threshold(n)?.into());
    if let Some(beta0) = args.beta0 {
        let r = rough_constants(n, beta0)?;
        result.insert("rough".into(), json!({"beta0": beta0, "c": r.c, "c1": r.c1}));
    }
    if let (Some(k), Some(l)) = (args.k, args.l) {
        result.insert("bliss".into(), to_value(&bliss_constant(k, l)?));
    }
    Ok(Outcome {
        passed: true,
        parameters: json!({"n": n, "beta0": args.beta0, "k": args.k, "l": args.l}),
        result: Value::Object(result),
        profile: None,
    })
}

pub fn deficit_cmd(args: &DeficitArgs) -> Res {
    let u = match &args.input {
        Some(path) => RadialFunction::read_csv(open(path)?)?,
        None => random_admissible(args.seed, args.pieces, args.radius, args.amplitude)?,
    };
    let report = if args.n == 1.0 {
        deficit_n1(&u)?
    } else {
        let statement = match args.statement {
            StatementArg::Consistent => Statement::Consistent,
            StatementArg::AsPrinted => Statement::AsPrinted,
        };
        deficit(&u, args.n, statement)?
    };
    let passed = if args.n == 1.0 {
        report.deficit >= -N1_SLACK
    } else {
        report.deficit > 0.0
    };
    let source = match &args.input {
        Some(path) => json!({"input": path.display().to_string()}),
        None => json!({
            "seed": args.seed,
            "pieces": args.pieces,
            "radius": args.radius,
            "amplitude": args.amplitude,
        }),
    };
    let mut parameters = json!({"n": args.n, "statement": report.statement});
    parameters["function"] = source;
    Ok(Outcome {
        passed,
        parameters,
        result: to_value(&report),
        profile: None,
    })
}

pub fn extremal(args: &ExtremalArgs) -> Res {
    let p = extremal_from(args.n, args.a, args.lambda0)?;
    let radius = match args.radius {
        Some(r) => r,
        None => default_radius(p.n, p.a)?,
    };
    let spec = QuadratureSpec::tight();
    let quad_mass = integrate_halfline(|r| (p.n * (p.eval(r) - r)).exp(), &spec)?.value;
    let mass = mass_from_lambda(&p);
    let mass_error = (quad_mass - mass).abs();
    let profile = if args.emit_profile {
        let grid = uniform_grid(radius, args.nodes)?;
        let v = RadialFunction::sample(grid, |r| p.eval(r))?;
        Some(profile_csv(["r", "u"], v.nodes(), v.values()))
    } else {
        None
    };
    Ok(Outcome {
        passed: mass_error <= 1e-6,
        parameters: json!({
            "n": p.n,
            "a": args.a,
            "lambda0": args.lambda0,
            "nodes": args.nodes,
            "radius": radius,
            "emit_profile": args.emit_profile,
        }),
        result: json!({
            "n": p.n,
            "lambda0": p.lambda0,
            "tau": p.tau,
            "mass": mass,
            "mass_quadrature": quad_mass,
            "mass_error": mass_error,
            "closed_energy": closed_energy(&p)?,
            "deficit": extremal_deficit(&p)?,
            "limit": p.limit(),
        }),
        profile,
    })
}

fn solve_result(report: &SolveReport, p: &ExtremalParams) -> Result<(Value, f64), Failure> {
    let xi = closed_energy(p)?;
    let rel = (report.xi_hat - xi).abs() / xi;
    let mut v = to_value(&report.summary());
    v["multiplier"] = report.multiplier.into();
    v["tau"] = p.tau.into();
    v["closed_energy"] = xi.into();
    v["relative_energy_error"] = rel.into();
    v["sup_distance"] = sup_distance(&report.u_star, p).into();
    Ok((v, rel))
}

pub fn minimize_cmd(args: &MinimizeArgs) -> Res {
    let p = ExtremalParams::from_mass(args.n, args.a)?;
    let radius = match args.radius {
        Some(r) => r,
        None => default_radius(args.n, args.a)?,
    };
    let init = match args.init {
        InitArg::Ramp => Initialization::Ramp,
        InitArg::Extremal => Initialization::PerturbedExtremal { factor: args.perturbation },
    };
    let mut opts = SolveOptions::new(uniform_grid(radius, args.nodes)?).with_init(init);
    opts.epsilon_smooth = args.epsilon;
    opts.constraint_tol = args.constraint_tol;
    opts.grad_tol = args.grad_tol;
    opts.max_iters = args.max_iters;
    opts.penalty_growth = args.penalty_growth;

    let parameters = json!({
        "n": args.n,
        "a": args.a,
        "nodes": args.nodes,
        "radius": radius,
        "init": match args.init { InitArg::Ramp => "ramp", InitArg::Extremal => "extremal" },
        "perturbation": args.perturbation,
        "epsilon": args.epsilon,
        "constraint_tol": args.constraint_tol,
        "grad_tol": args.grad_tol,
        "max_iters": args.max_iters,
        "penalty_growth": args.penalty_growth,
        "tolerance": args.tolerance,
        "emit_profile": args.emit_profile,
    });
    // A solve that ran out of budget is still reported, as a failed check.
    let report = match minimize(args.n, args.a, &opts) {
        Ok(r) => r,
        Err(Error::NotConverged(r)) => *r,
        Err(e) => return Err(e.into()),
    };
    let (result, rel) = solve_result(&report, &p)?;
    let profile = args
        .emit_profile
        .then(|| profile_csv(["r", "u"], report.u_star.nodes(), report.u_star.values()));
    Ok(Outcome {
        passed: report.converged && rel <= args.tolerance,
        parameters,
        result,
        profile,
    })
}

pub fn shoot_cmd(args: &ShootArgs) -> Res {
    let p = extremal_from(args.n, args.a, args.lambda0)?;
    let grid = uniform_grid(args.radius, args.nodes)?;
    let opts = ShootOptions {
        rel_tol: args.rel_tol,
        abs_tol: args.abs_tol,
    };
    let u = shoot_with(p.n, p.lambda0, &grid, &opts)?;
    let dist = sup_distance(&u, &p);
    let profile = args.emit_profile.then(|| profile_csv(["r", "u"], u.nodes(), u.values()));
    Ok(Outcome {
        passed: dist <= args.tolerance,
        parameters: json!({
            "n": p.n,
            "a": args.a,
            "lambda0": args.lambda0,
            "radius": args.radius,
            "nodes": args.nodes,
            "rel_tol": args.rel_tol,
            "abs_tol": args.abs_tol,
            "tolerance": args.tolerance,
            "emit_profile": args.emit_profile,
        }),
        result: json!({
            "n": p.n,
            "lambda0": p.lambda0,
            "a": p.a,
            "tau": p.tau,
            "sup_distance": dist,
            "final_value": u.last_value(),
            "limit": p.limit(),
        }),
        profile,
    })
}

fn onofri_entry(key: (&str, Value), u: &AxiFunction) -> Result<Value, Failure> {
    let r = onofri(u)?;
    let mut m = Map::new();
    m.insert(key.0.into(), key.1);
    m.insert("energy_term".into(), r.energy_term.into());
    m.insert("log_mass".into(), r.log_mass.into());
    m.insert("deficit".into(), r.deficit.into());
    Ok(Value::Object(m))
}

pub fn onofri_cmd(args: &OnofriArgs) -> Res {
    if args.lambda.is_empty() && args.samples.is_none() && args.polynomial.is_empty() && args.input.is_none() {
        return Err(Failure::new(
            "usage",
            "give at least one of --lambda, --samples, --polynomial, --input",
        ));
    }
    let mut rows = Vec::new();
    for &l in &args.lambda {
        rows.push(onofri_entry(("lambda", l.into()), &mobius_factor(l)?)?);
    }
    if let Some(count) = args.samples {
        let end = args
            .seed
            .checked_add(count)
            .ok_or_else(|| Failure::new("invalid_param", "seed range overflows"))?;
        let random: Vec<Value> = (args.seed..end)
            .into_par_iter()
            .map(|s| onofri_entry(("seed", s.into()), &random_band_limited(s, args.max_degree)?))
            .collect::<Result<_, _>>()?;
        rows.extend(random);
    }
    if !args.polynomial.is_empty() {
        let u = AxiFunction::polynomial(args.polynomial.clone())?;
        rows.push(onofri_entry(("polynomial", json!(args.polynomial)), &u)?);
    }
    if let Some(path) = &args.input {
        let u = AxiFunction::read_csv(open(path)?)?;
        rows.push(onofri_entry(("input", path.display().to_string().into()), &u)?);
    }
    let passed = rows
        .iter()
        .all(|r| r["deficit"].as_f64().is_some_and(|d| d >= -ONOFRI_SLACK));
    Ok(Outcome {
        passed,
        parameters: json!({
            "lambda": args.lambda,
            "samples": args.samples,
            "seed": args.seed,
            "max_degree": args.max_degree,
            "polynomial": args.polynomial,
            "input": args.input.as_ref().map(|p| p.display().to_string()),
        }),
        result: Value::Array(rows),
        profile: None,
    })
}

pub fn bliss_cmd(args: &BlissArgs) -> Res {
    let params = bliss_constant(args.k, args.l)?;
    let spec = QuadratureSpec::default();
    let end = args
        .seed
        .checked_add(args.samples)
        .ok_or_else(|| Failure::new("invalid_param", "seed range overflows"))?;
    let ratios: Vec<(u64, f64)> = (args.seed..end)
        .into_par_iter()
        .map(|s| Ok((s, bliss_ratio(random_bliss_profile(s), args.k, args.l, args.x_max, &spec)?.ratio)))
        .collect::<Result<_, Failure>>()?;
    let (worst_seed, worst) = ratios
        .iter()
        .copied()
        .fold((None, f64::NEG_INFINITY), |acc, (s, r)| if r > acc.1 { (Some(s), r) } else { acc });
    let worst_over = if ratios.is_empty() { 0.0 } else { worst / params.c_b };
    Ok(Outcome {
        passed: worst_over <= 1.0 + 1e-6,
        parameters: json!({
            "k": args.k,
            "l": args.l,
            "samples": args.samples,
            "seed": args.seed,
            "x_max": args.x_max,
        }),
        result: json!({
            "alpha": params.alpha,
            "c_b": params.c_b,
            "max_ratio": if ratios.is_empty() { Value::Null } else { worst.into() },
            "max_ratio_over_c_b": worst_over,
            "worst_seed": worst_seed,
        }),
        profile: None,
    })
}

pub fn moser_cmd(args: &MoserArgs) -> Res {
    let n = args.n;
    let beta = match args.beta {
        Some(b) => b,
        None => 0.5 * n * args.a.powf(1.0 / (1.0 - n)),
    };
    let bound = moser_bound(n, args.a, beta)?;
    let end = args
        .seed
        .checked_add(args.samples)
        .ok_or_else(|| Failure::new("invalid_param", "seed range overflows"))?;
    // Each sample is a random admissible function rescaled so that its energy
    // is a seed-dependent fraction of the budget in [0.05, 1), spread by the
    // golden-ratio sequence.
    let values: Vec<(u64, f64)> = (args.seed..end)
        .into_par_iter()
        .map(|s| {
            let base = random_admissible(s, args.pieces, args.radius, 2.0)?;
            let e = energy(&base, n)?;
            let fraction = 0.05 + 0.95 * ((s as f64 + 1.0) * GOLDEN).fract();
            let scale = if e > 0.0 { (fraction * args.a / e).powf(1.0 / n) } else { 0.0 };
            Ok((s, moser_functional(&base.scaled(scale)?, n, beta)?))
        })
        .collect::<Result<_, Failure>>()?;
    let (worst_seed, worst) = values
        .iter()
        .copied()
        .fold((None, f64::NEG_INFINITY), |acc, (s, v)| if v > acc.1 { (Some(s), v) } else { acc });
    let excess = if values.is_empty() { f64::NEG_INFINITY } else { worst - bound };
    Ok(Outcome {
        passed: excess <= 1e-8,
        parameters: json!({
            "n": n,
            "a": args.a,
            "beta": beta,
            "samples": args.samples,
            "seed": args.seed,
            "pieces": args.pieces,
            "radius": args.radius,
        }),
        result: json!({
            "bound": bound,
            "max_functional": if values.is_empty() { Value::Null } else { worst.into() },
            "excess": if values.is_empty() { Value::Null } else { excess.into() },
            "worst_seed": worst_seed,
        }),
        profile: None,
    })
}

fn sweep_points(args: &SweepArgs) -> Result<Vec<f64>, Failure> {
    let (from, to, m) = (args.from, args.to, args.points);
    if m == 0 {
        return Err(Failure::new("invalid_param", "empty range: points must be >= 1"));
    }
    if !(from.is_finite() && to.is_finite()) {
        return Err(Failure::new("invalid_param", "range ends must be finite"));
    }
    if m > 1 && from == to {
        return Err(Failure::new("invalid_param", format!("empty range: from = to = {from}")));
    }
    if args.spacing == Spacing::Log && !(from > 0.0 && to > 0.0) {
        return Err(Failure::new("invalid_param", "log spacing needs positive range ends"));
    }
    if m == 1 {
        return Ok(vec![from]);
    }
    Ok((0..m)
        .map(|i| {
            let s = i as f64 / (m - 1) as f64;
            if i == m - 1 {
                to
            } else {
                match args.spacing {
                    Spacing::Lin => from + s * (to - from),
                    Spacing::Log => (from.ln() + s * (to.ln() - from.ln())).exp(),
                }
            }
        })
        .collect())
}

fn sweep_row(param: SweepParam, n: f64, x: f64) -> Result<Value, Failure> {
    Ok(match param {
        SweepParam::A => {
            let p = ExtremalParams::from_mass(n, x)?;
            json!({
                "a": x,
                "lambda0": p.lambda0,
                "tau": p.tau,
                "closed_energy": closed_energy(&p)?,
                "deficit": extremal_deficit(&p)?,
            })
        }
        SweepParam::Beta0 => {
            let r = rough_constants(n, x)?;
            json!({"beta0": x, "c": r.c, "c1": r.c1})
        }
        SweepParam::Lambda => {
            let r = onofri(&mobius_factor(x)?)?;
            json!({
                "lambda": x,
                "energy_term": r.energy_term,
                "log_mass": r.log_mass,
                "deficit": r.deficit,
            })
        }
    })
}

pub fn sweep(args: &SweepArgs) -> Res {
    let xs = sweep_points(args)?;
    let rows: Vec<Value> = xs
        .par_iter()
        .map(|&x| sweep_row(args.param, args.n, x))
        .collect::<Result<_, _>>()?;
    let passed = match args.param {
        SweepParam::A => rows.iter().all(|r| r["deficit"].as_f64().is_some_and(|d| d > 0.0)),
        SweepParam::Beta0 => true,
        SweepParam::Lambda => rows.iter().all(|r| r["deficit"].as_f64().is_some_and(|d| d.abs() <= 1e-6)),
    };
    let param = match args.param {
        SweepParam::A => "a",
        SweepParam::Beta0 => "beta0",
        SweepParam::Lambda => "lambda",
    };
    Ok(Outcome {
        passed,
        parameters: json!({
            "param": param,
            "n": args.n,
            "from": args.from,
            "to": args.to,
            "points": args.points,
            "spacing": match args.spacing { Spacing::Lin => "lin", Spacing::Log => "log" },
        }),
        result: Value::Array(rows),
        profile: None,
    })
}

pub fn verify_cmd(args: &VerifyArgs) -> Res {
    let ids: Vec<u32> = if args.all {
        verify::CRITERIA.iter().map(|c| c.0).collect()
    } else {
        args.criterion.clone()
    };
    if let Some(bad) = ids.iter().find(|&&id| !verify::CRITERIA.iter().any(|c| c.0 == id)) {
        return Err(Failure::new("invalid_param", format!("no criterion {bad}; valid ids are 1-10")));
    }
    let reports: Vec<_> = ids
        .par_iter()
        .map(|&id| verify::run(id).expect("id checked above"))
        .collect();
    Ok(Outcome {
        passed: reports.iter().all(|r| r.passed),
        parameters: json!({"criteria": ids}),
        result: to_value(&reports),
        profile: None,
    })
}
