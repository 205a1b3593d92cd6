use std::io::{Read, Write};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::varsolve::tridiag::SymTridiag;

type Scalar = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Function on `S²` depending only on `t = x₃ ∈ [-1, 1]`.
#[derive(Clone)]
pub struct AxiFunction {
    kind: Kind,
    offset: f64,
}

#[derive(Clone)]
enum Kind {
    /// Monomial coefficients, lowest degree first.
    Polynomial(Vec<f64>),
    Analytic { u: Scalar, du: Option<Scalar> },
    Tabulated(Spline),
}

impl std::fmt::Debug for AxiFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match &self.kind {
            Kind::Polynomial(c) => format!("Polynomial({c:?})"),
            Kind::Analytic { du, .. } => format!("Analytic(derivative: {})", du.is_some()),
            Kind::Tabulated(s) => format!("Tabulated({} nodes)", s.t.len()),
        };
        write!(f, "AxiFunction {{ {kind}, offset: {} }}", self.offset)
    }
}

impl AxiFunction {
    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(invalid("polynomial needs at least one finite coefficient"));
        }
        Ok(Self {
            kind: Kind::Polynomial(coeffs),
            offset: 0.0,
        })
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::polynomial(vec![c])
    }

    /// Closure-defined function; the derivative falls back to central
    /// differences when `du` is `None`.
    pub fn analytic(
        u: impl Fn(f64) -> f64 + Send + Sync + 'static,
        du: Option<Box<dyn Fn(f64) -> f64 + Send + Sync>>,
    ) -> Self {
        Self {
            kind: Kind::Analytic {
                u: Arc::new(u),
                du: du.map(Arc::from),
            },
            offset: 0.0,
        }
    }

    /// Natural cubic spline through `(t_i, u_i)`, `t` strictly increasing
    /// from exactly -1 to exactly 1.
    pub fn tabulated(t: Vec<f64>, u: Vec<f64>) -> Result<Self> {
        Ok(Self {
            kind: Kind::Tabulated(Spline::new(t, u)?),
            offset: 0.0,
        })
    }

    /// `u + c`.
    pub fn shifted(&self, c: f64) -> Self {
        Self {
            kind: self.kind.clone(),
            offset: self.offset + c,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.offset
            + match &self.kind {
                Kind::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &a| acc * t + a),
                Kind::Analytic { u, .. } => u(t),
                Kind::Tabulated(s) => s.eval(t),
            }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::Polynomial(c) => c
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, &a)| acc * t + k as f64 * a),
            Kind::Analytic { du: Some(du), .. } => du(t),
            Kind::Tabulated(s) => s.derivative(t),
            Kind::Analytic { du: None, .. } => {
                // Stay inside [-1, 1], where the closure may not be defined.
                let h = 1e-4f64.min(0.5 * (1.0 - t.abs())).max(1e-7);
                (self.eval(t + h) - self.eval(t - h)) / (2.0 * h)
            }
        }
    }

    /// Spline knots of tabulated data, `None` for smooth inputs.
    pub(crate) fn knots(&self) -> Option<&[f64]> {
        match &self.kind {
            Kind::Tabulated(s) => Some(&s.t),
            _ => None,
        }
    }

    /// Samples at `points` equispaced values of `t` as CSV rows `t,u`.
    pub fn write_csv<W: Write>(&self, out: W, points: usize) -> Result<()> {
        if points < 2 {
            return Err(invalid("need at least two sample points"));
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "u"])?;
        for i in 0..points {
            let t = -1.0 + 2.0 * i as f64 / (points - 1) as f64;
            w.write_record([format!("{t:.17e}"), format!("{:.17e}", self.eval(t))])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads CSV rows `t,u` with a header into a tabulated function.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let headers = rd.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "t" || &headers[1] != "u" {
            return Err(Error::Parse("expected header `t,u`".into()));
        }
        let mut ts = Vec::new();
        let mut us = Vec::new();
        for (line, rec) in rd.records().enumerate() {
            let rec = rec?;
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {}: {e}", line + 1)))
            };
            ts.push(parse(&rec[0])?);
            us.push(parse(&rec[1])?);
        }
        Self::tabulated(ts, us)
    }
}

/// Seeded polynomial in `t` of degree 1 to `max_degree` with coefficients
/// uniform in `[-2, 2]`.
pub fn random_band_limited(seed: u64, max_degree: usize) -> Result<AxiFunction> {
    if max_degree == 0 {
        return Err(invalid("max_degree must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let degree = rng.gen_range(1..=max_degree);
    let coeffs = (0..=degree).map(|_| rng.gen_range(-2.0..=2.0)).collect();
    AxiFunction::polynomial(coeffs)
}

/// Log conformal factor of the dilation by `λ` in the stereographic chart,
/// `u_λ(t) = ln(2λ/((1-t) + λ²(1+t)))`.
pub fn mobius_factor(lambda: f64) -> Result<AxiFunction> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(invalid(format!("lambda must be > 0, got {lambda}")));
    }
    let l2 = lambda * lambda;
    let denom = move |t: f64| (1.0 - t) + l2 * (1.0 + t);
    Ok(AxiFunction::analytic(
        move |t| (2.0 * lambda / denom(t)).ln(),
        Some(Box::new(move |t| -(l2 - 1.0) / denom(t))),
    ))
}

#[derive(Debug, Clone)]
struct Spline {
    t: Vec<f64>,
    u: Vec<f64>,
    // Second derivatives at the nodes.
    m: Vec<f64>,
}

impl Spline {
    fn new(t: Vec<f64>, u: Vec<f64>) -> Result<Self> {
        if t.len() != u.len() || t.len() < 4 {
            return Err(invalid("tabulated data needs at least four (t, u) pairs"));
        }
        if t[0] != -1.0 || t[t.len() - 1] != 1.0 {
            return Err(invalid("tabulated nodes must run from -1 to 1"));
        }
        if t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("tabulated nodes must be strictly increasing"));
        }
        if u.iter().any(|v| !v.is_finite()) {
            return Err(invalid("tabulated values must be finite"));
        }
        let k = t.len();
        let h: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
        let mut sys = SymTridiag::zeros(k - 2);
        let mut rhs = vec![0.0; k - 2];
        for i in 1..k - 1 {
            sys.diag[i - 1] = 2.0 * (h[i - 1] + h[i]);
            if i < k - 2 {
                sys.off[i - 1] = h[i];
            }
            rhs[i - 1] = 6.0 * ((u[i + 1] - u[i]) / h[i] - (u[i] - u[i - 1]) / h[i - 1]);
        }
        let inner = sys
            .factor(0.0)
            .ok_or_else(|| invalid("spline system is singular"))?
            .solve(&rhs);
        let mut m = Vec::with_capacity(k);
        m.push(0.0);
        m.extend(inner);
        m.push(0.0);
        Ok(Self { t, u, m })
    }

    fn interval(&self, x: f64) -> usize {
        self.t.partition_point(|&s| s <= x).clamp(1, self.t.len() - 1) - 1
    }

    fn derivative(&self, x: f64) -> f64 {
        let j = self.interval(x);
        let h = self.t[j + 1] - self.t[j];
        let p = (self.t[j + 1] - x) / h;
        let q = (x - self.t[j]) / h;
        (self.u[j + 1] - self.u[j]) / h
            + h / 6.0 * ((1.0 - 3.0 * p * p) * self.m[j] + (3.0 * q * q - 1.0) * self.m[j + 1])
    }

    fn eval(&self, x: f64) -> f64 {
        let j = self.interval(x);
        let (a, b) = (self.t[j], self.t[j + 1]);
        let h = b - a;
        let p = (b - x) / h;
        let q = (x - a) / h;
        p * self.u[j]
            + q * self.u[j + 1]
            + h * h / 6.0 * ((p * p * p - p) * self.m[j] + (q * q * q - q) * self.m[j + 1])
    }
}
