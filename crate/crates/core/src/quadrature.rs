//! Adaptive one-dimensional quadrature.
//!
//! The workhorse is a globally adaptive Gauss–Kronrod (10/21 point) scheme
//! with bisection. Nodes are strictly interior to each subinterval, so
//! integrands that are bounded but evaluate to `0/0` at an endpoint, and
//! integrable endpoint singularities of type `t^{-s}` with `s < 1`, are fine.
//!
//! Half-line integrals `∫_0^∞ g(r) dr` are mapped to `(0, 1]` with
//! `s = e^{-r}`, which turns the exponential weights that every integrand in
//! this crate carries into powers of `s`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerances and subdivision budget for the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let spec = Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Tight spec used by the constants and extremal oracles.
    pub fn tight() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_subdivisions: 4000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol >= 0.0 && self.rel_tol >= 0.0) {
            return Err(Error::InvalidParam("tolerances must be non-negative".into()));
        }
        if self.abs_tol == 0.0 && self.rel_tol == 0.0 {
            return Err(Error::InvalidParam(
                "at least one of abs_tol, rel_tol must be positive".into(),
            ));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidParam("max_subdivisions must be >= 1".into()));
        }
        Ok(())
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Outcome of a converged integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegralResult {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions_used: usize,
}

// Kronrod abscissae, Kronrod weights and the embedded 10-point Gauss weights.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_980_898_126,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_328,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One 21-point Kronrod evaluation with the QUADPACK-style error scaling.
fn kronrod21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Segment> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |x: f64| -> Result<f64> {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::NonFinite { at: x })
        }
    };

    let fc = eval(center)?;
    let mut res_k = WGK[10] * fc;
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Segment { a, b, value, error })
}

fn too_narrow(seg: &Segment) -> bool {
    let mid = 0.5 * (seg.a + seg.b);
    let width = seg.b - seg.a;
    mid <= seg.a
        || mid >= seg.b
        || width < 1e3 * f64::MIN_POSITIVE
        || width < 100.0 * f64::EPSILON * seg.a.abs().max(seg.b.abs())
}

/// Integrates `f` over the finite interval `[a, b]`.
pub fn integrate<F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<IntegralResult>
where
    F: Fn(f64) -> f64,
{
    spec.validate()?;
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(Error::InvalidDomain { a, b });
    }

    let first = kronrod21(&f, a, b)?;
    let mut total = first.value;
    let mut total_err = first.error;
    let mut heap = BinaryHeap::with_capacity(spec.max_subdivisions + 1);
    heap.push(first);

    loop {
        if total_err <= spec.target(total) {
            return Ok(IntegralResult {
                value: total,
                error_estimate: total_err,
                subdivisions_used: heap.len(),
            });
        }
        if heap.len() >= spec.max_subdivisions {
            break;
        }
        let worst = heap.pop().expect("heap is never empty");
        if too_narrow(&worst) {
            heap.push(worst);
            break;
        }
        let mid = 0.5 * (worst.a + worst.b);
        let left = kronrod21(&f, worst.a, mid)?;
        let right = kronrod21(&f, mid, worst.b)?;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // Re-sum to shed accumulated cancellation in the running totals.
    let (value, error_estimate) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
    if error_estimate <= spec.target(value) {
        return Ok(IntegralResult {
            value,
            error_estimate,
            subdivisions_used: heap.len(),
        });
    }
    Err(Error::NonConvergent {
        value,
        error_estimate,
        subdivisions: heap.len(),
    })
}

/// Integrates `g` over `[0, ∞)` through the substitution `s = e^{-r}`.
pub fn integrate_halfline<G>(g: G, spec: &QuadratureSpec) -> Result<IntegralResult>
where
    G: Fn(f64) -> f64,
{
    integrate(
        |s: f64| {
            let v = g(-s.ln());
            if v == 0.0 {
                0.0
            } else {
                v / s
            }
        },
        0.0,
        1.0,
        spec,
    )
}

/// Integrates `f` over `[a, b]` split at the given interior breakpoints.
///
/// The absolute tolerance is shared evenly among the pieces.
pub fn integrate_pieces<F>(
    f: F,
    breakpoints: &[f64],
    spec: &QuadratureSpec,
) -> Result<IntegralResult>
where
    F: Fn(f64) -> f64,
{
    if breakpoints.len() < 2 {
        return Err(Error::InvalidParam("need at least two breakpoints".into()));
    }
    let pieces = breakpoints.len() - 1;
    let piece_spec = QuadratureSpec {
        abs_tol: spec.abs_tol / pieces as f64,
        ..*spec
    };
    let mut out = IntegralResult {
        value: 0.0,
        error_estimate: 0.0,
        subdivisions_used: 0,
    };
    for w in breakpoints.windows(2) {
        if w[1] == w[0] {
            continue;
        }
        let r = integrate(&f, w[0], w[1], &piece_spec)?;
        out.value += r.value;
        out.error_estimate += r.error_estimate;
        out.subdivisions_used += r.subdivisions_used;
    }
    Ok(out)
}

/// Running integrals `y(x_i) = ∫_0^{x_i} f`.
pub fn cumulative<F>(f: F, xs: &[f64], spec: &QuadratureSpec) -> Result<Vec<f64>>
where
    F: Fn(f64) -> f64,
{
    if xs.is_empty() {
        return Err(Error::InvalidParam("xs must be non-empty".into()));
    }
    if xs[0] < 0.0 || xs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParam(
            "xs must be strictly increasing and start at or above 0".into(),
        ));
    }
    let mut out = Vec::with_capacity(xs.len());
    let mut acc = 0.0;
    let mut prev = 0.0;
    for &x in xs {
        if x > prev {
            acc += integrate(&f, prev, x, spec)?.value;
        }
        out.push(acc);
        prev = x;
    }
    Ok(out)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(points: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(points >= 1, "need at least one node");
    let m = points.div_ceil(2);
    let nf = points as f64;
    let mut x = vec![0.0; points];
    let mut w = vec![0.0; points];
    for i in 0..m {
        // Tricomi initial guess, refined by Newton on P_n.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(points, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(points, z);
        if d != 0.0 {
            dp = d;
        }
        let weight = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[points - 1 - i] = z;
        w[i] = weight;
        w[points - 1 - i] = weight;
    }
    if points % 2 == 1 {
        x[m - 1] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn kronrod_weights_sum_to_two() {
        let k: f64 = 2.0 * WGK[..10].iter().sum::<f64>() + WGK[10];
        let g: f64 = 2.0 * WG.iter().sum::<f64>();
        assert_abs_diff_eq!(k, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn single_panel_exact_for_high_degree_polynomials() {
        // 21-point Kronrod is exact through degree 31.
        for deg in [0u32, 5, 17, 31] {
            let s = kronrod21(&|x: f64| x.powi(deg as i32), 0.0, 1.0).unwrap();
            assert_abs_diff_eq!(s.value, 1.0 / (deg as f64 + 1.0), epsilon = 1e-15);
        }
    }

    #[test]
    fn linear_integrand() {
        let r = integrate(|t| 1.0 - t, 0.0, 1.0, &spec()).unwrap();
        assert_abs_diff_eq!(r.value, 0.5, epsilon = 1e-14);
        assert!(r.error_estimate <= 1e-10);
    }

    #[test]
    fn bounded_zero_over_zero_endpoint() {
        // (1 - sqrt(1 - t)) / t: substitute s = sqrt(1 - t) to get 2 - 2 ln 2.
        let exact = 2.0 - 2.0 * std::f64::consts::LN_2;
        let r = integrate(|t| (1.0 - (1.0 - t).sqrt()) / t, 0.0, 1.0, &spec()).unwrap();
        assert!((r.value - exact).abs() <= r.error_estimate);
        assert_abs_diff_eq!(r.value, exact, epsilon = 1e-10);
    }

    #[test]
    fn divergent_integrand_is_flagged() {
        let err = integrate(|t| 1.0 / t, 0.0, 1.0, &spec()).unwrap_err();
        assert!(matches!(err, Error::NonConvergent { .. }), "{err:?}");
    }

    #[test]
    fn integrable_power_singularity() {
        let r = integrate(|t: f64| t.powf(-0.5), 0.0, 1.0, &spec()).unwrap();
        assert_abs_diff_eq!(r.value, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn domain_and_finiteness_errors() {
        assert!(matches!(
            integrate(|t| t, 1.0, 1.0, &spec()),
            Err(Error::InvalidDomain { .. })
        ));
        assert!(matches!(
            integrate(|t| t, 2.0, 1.0, &spec()),
            Err(Error::InvalidDomain { .. })
        ));
        assert!(matches!(
            integrate(|_| f64::NAN, 0.0, 1.0, &spec()),
            Err(Error::NonFinite { .. })
        ));
        assert!(QuadratureSpec::new(0.0, 0.0, 10).is_err());
        assert!(QuadratureSpec::new(1e-8, 0.0, 0).is_err());
    }

    #[test]
    fn halfline_basics() {
        let r = integrate_halfline(|r| (-2.0 * r).exp(), &spec()).unwrap();
        assert_abs_diff_eq!(r.value, 0.5, epsilon = 1e-12);
        let r = integrate_halfline(|r| r * (-r).exp(), &spec()).unwrap();
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn halfline_extremal_energy_n2() {
        // |v_r|^2 for the n = 2, lambda0 = 1 extremal: v_r = 2 e^{-2r} / (1 + e^{-2r}).
        let g = |r: f64| {
            let x = (-2.0 * r).exp();
            let d = 2.0 * x / (1.0 + x);
            d * d
        };
        let r = integrate_halfline(g, &spec()).unwrap();
        assert_abs_diff_eq!(r.value, 2.0 * std::f64::consts::LN_2 - 1.0, epsilon = 1e-10);
    }

    #[test]
    fn cumulative_examples() {
        let y = cumulative(|x| 1.0 / ((1.0 + x) * (1.0 + x)), &[1.0], &spec()).unwrap();
        assert_abs_diff_eq!(y[0], 0.5, epsilon = 1e-12);
        let y = cumulative(|_| 0.0, &[0.0, 0.3, 2.0], &spec()).unwrap();
        assert_eq!(y, vec![0.0, 0.0, 0.0]);
        let y = cumulative(|_| 1.0, &[1.0, 2.0, 3.0], &spec()).unwrap();
        for (got, want) in y.iter().zip([1.0, 2.0, 3.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-13);
        }
        assert!(cumulative(|_| 1.0, &[2.0, 1.0], &spec()).is_err());
        assert!(cumulative(|_| 1.0, &[], &spec()).is_err());
    }

    #[test]
    fn gauss_legendre_rules() {
        let (x, w) = gauss_legendre(5);
        assert_abs_diff_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(x[2], 0.0, epsilon = 0.0);
        // Degree 2n - 1 exactness at n = 128.
        let (x, w) = gauss_legendre(128);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(254)).sum();
        assert_abs_diff_eq!(s, 2.0 / 255.0, epsilon = 1e-13);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.exp()).sum();
        assert_abs_diff_eq!(s, 1f64.exp() - (-1f64).exp(), epsilon = 1e-13);
    }
}
