use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::constants::{sharp_coefficient, sphere_volume};
use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate, QuadratureSpec};
use crate::radial::{energy, weighted_mass, RadialFunction};
use crate::special::harmonic;

type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Radial function on the unit ball `B_1 ⊂ R^n`, vanishing on the boundary.
#[derive(Clone)]
pub enum DiskFunction {
    /// Piecewise linear in `r = -ln s`; `u(r) = w(e^{-r})`.
    HalfLine(RadialFunction),
    /// Smooth profile `w(s)` with its derivative `w'(s)`, `s ∈ (0, 1]`.
    Smooth { w: Profile, dw: Profile },
}

impl std::fmt::Debug for DiskFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DiskFunction::HalfLine(u) => f.debug_tuple("HalfLine").field(&u.nodes().len()).finish(),
            DiskFunction::Smooth { .. } => f.write_str("Smooth"),
        }
    }
}

impl DiskFunction {
    pub fn smooth(
        w: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dw: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        DiskFunction::Smooth {
            w: Arc::new(w),
            dw: Arc::new(dw),
        }
    }

    /// Value at radius `s ∈ (0, 1]`.
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            DiskFunction::HalfLine(u) => u.value_at(-s.ln()),
            DiskFunction::Smooth { w, .. } => w(s),
        }
    }

    fn check_boundary(&self) -> Result<()> {
        if let DiskFunction::Smooth { w, .. } = self {
            let b = w(1.0);
            if !(b.abs() <= 1e-12) {
                return Err(invalid(format!("w(1) must vanish, got {b}")));
            }
        }
        Ok(())
    }

    fn check_nonnegative(&self) -> Result<()> {
        match self {
            DiskFunction::HalfLine(u) => {
                if u.is_nonnegative() {
                    Ok(())
                } else {
                    Err(invalid("disk function must be nonnegative"))
                }
            }
            DiskFunction::Smooth { w, .. } => {
                for i in 1..=512 {
                    let s = i as f64 / 512.0;
                    let v = w(s);
                    if !(v >= -1e-12) {
                        return Err(invalid(format!("disk function is negative at s = {s}: {v}")));
                    }
                }
                Ok(())
            }
        }
    }
}

fn check_dimension(n: u32) -> Result<()> {
    if n >= 2 {
        Ok(())
    } else {
        Err(invalid(format!("dimension must be an integer >= 2, got {n}")))
    }
}

/// `∫_{B_1} |∇w|^n` and `∫_{B_1} e^{nw}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiskIntegrals {
    pub energy: f64,
    pub mass: f64,
}

/// Disk energy and mass, evaluated through `r = -ln s` for half-line data and
/// by quadrature in `s` for smooth profiles.
pub fn disk_reduce(w: &DiskFunction, n: u32) -> Result<DiskIntegrals> {
    check_dimension(n)?;
    w.check_boundary()?;
    let omega = sphere_volume(n - 1)?;
    let nf = n as f64;
    match w {
        DiskFunction::HalfLine(u) => Ok(DiskIntegrals {
            energy: omega * energy(u, nf)?,
            mass: omega * weighted_mass(u, nf)?.mass,
        }),
        DiskFunction::Smooth { w, dw } => {
            let spec = QuadratureSpec::tight();
            let radial = |s: f64| s.powi(n as i32 - 1);
            let e = integrate(|s| dw(s).abs().powf(nf) * radial(s), 0.0, 1.0, &spec)?;
            let m = integrate(|s| (nf * w(s)).exp() * radial(s), 0.0, 1.0, &spec)?;
            Ok(DiskIntegrals {
                energy: omega * e.value,
                mass: omega * m.value,
            })
        }
    }
}

/// Boundary value problem data on `B_r ⊂ R^2`: `f = b` on `∂B_r`, `∫ e^{2f} = a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiskSpec {
    pub r: f64,
    pub b: f64,
    pub a: f64,
}

impl DiskSpec {
    pub fn new(r: f64, b: f64, a: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(invalid("disk radius must be > 0"));
        }
        if !(b.is_finite() && a.is_finite() && a > 0.0) {
            return Err(invalid("boundary value must be finite and mass positive"));
        }
        Ok(Self { r, b, a })
    }

    /// `πr²e^{2b}`, the mass of the constant `f ≡ b`.
    pub fn min_mass(&self) -> f64 {
        PI * self.r * self.r * (2.0 * self.b).exp()
    }

    /// Half-line mass after rescaling to `B_1` and shifting by `b`.
    pub fn alpha(&self) -> f64 {
        self.a * (-2.0 * self.b).exp() / (2.0 * PI * self.r * self.r)
    }

    fn check_admissible(&self) -> Result<()> {
        let min = self.min_mass();
        // The boundary a = πr²e^{2b} is kept: the infimum is 0 there.
        if self.a >= min * (1.0 - 4.0 * f64::EPSILON) {
            Ok(())
        } else {
            Err(Error::Inadmissible { a: self.a, min })
        }
    }
}

/// `inf ∫_{B_r}|∇f|² = 4π(ln X + 1/X - 1)`, `X = ae^{-2b}/(πr²)`.
pub fn corollary2_infimum(spec: &DiskSpec) -> Result<f64> {
    spec.check_admissible()?;
    let x = spec.a * (-2.0 * spec.b).exp() / (PI * spec.r * spec.r);
    Ok(4.0 * PI * (x.ln() + 1.0 / x - 1.0))
}

/// The same infimum as `2π · 2{ln 2α + 1/(2α) - 1}`, the half-line extremal
/// energy at mass `α` times `ω_1`.
pub fn corollary2_halfline(spec: &DiskSpec) -> Result<f64> {
    spec.check_admissible()?;
    let alpha = spec.alpha();
    Ok(2.0 * PI * 2.0 * ((2.0 * alpha).ln() + 1.0 / (2.0 * alpha) - 1.0))
}

/// Both sides of the strict disk inequality
/// `ln(n∫e^{nu}/ω) < ((n-1)/n)^{n-1} ω^{-1}∫|∇u|^n + F(1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Corollary3Report {
    pub n: u32,
    pub lhs: f64,
    pub rhs: f64,
    pub deficit: f64,
    pub energy: f64,
    pub mass: f64,
}

pub fn corollary3(u: &DiskFunction, n: u32) -> Result<Corollary3Report> {
    check_dimension(n)?;
    u.check_nonnegative()?;
    let d = disk_reduce(u, n)?;
    let omega = sphere_volume(n - 1)?;
    let nf = n as f64;
    let lhs = (nf * d.mass / omega).ln();
    let rhs = sharp_coefficient(nf)? * d.energy / omega + harmonic(n as u64 - 1);
    Ok(Corollary3Report {
        n,
        lhs,
        rhs,
        deficit: rhs - lhs,
        energy: d.energy,
        mass: d.mass,
    })
}

pub fn corollary3_deficit(u: &DiskFunction, n: u32) -> Result<f64> {
    Ok(corollary3(u, n)?.deficit)
}
