use crate::dd::Dd;
use crate::error::{invalid, Error, Result};
use crate::extremals::ExtremalParams;
use crate::radial::{Grid, RadialFunction};

/// Local error tolerances of the extrapolation integrator. The state is
/// carried in double-double arithmetic, so tolerances down to 1e-30 are
/// meaningful.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-28,
            abs_tol: 1e-28,
        }
    }
}

// Extrapolation depth: midpoint sequences 2, 4, ..., 2K.
const K: usize = 8;
const MIN_COLUMN: usize = 3;

type State = [Dd; 2];

struct System {
    n: f64,
    tau: Dd,
    // p^{2-n} as an integer reciprocal power where possible.
    int_power: Option<u32>,
    exponent: Dd,
}

impl System {
    /// `(v, p)' = (p, -τ e^{n(v-r)} p^{2-n})`; `None` where `p^{2-n}` is undefined.
    fn rhs(&self, r: Dd, y: State) -> Option<State> {
        let [v, p] = y;
        let forcing = self.tau * ((v - r) * self.n).exp();
        let dp = if self.n == 2.0 {
            -forcing
        } else if p.hi > 0.0 {
            let w = match self.int_power {
                Some(k) => Dd::ONE / p.powi(k),
                None => p.powf(self.exponent),
            };
            -(forcing * w)
        } else {
            return None;
        };
        dp.is_finite().then_some([p, dp])
    }

    /// One Gragg–Bulirsch–Stoer step of size `big_h`. Columns are added
    /// until the last two extrapolants agree to `scale`; returns the state,
    /// the scaled error and the column index used.
    fn step(
        &self,
        r: Dd,
        y: State,
        f0: State,
        big_h: Dd,
        scale: impl Fn(State, State) -> f64,
    ) -> Option<(State, f64, usize)> {
        let mut table: Vec<Vec<State>> = Vec::with_capacity(K);
        let mut err = f64::INFINITY;
        for j in 0..K {
            let nj = 2 * (j + 1);
            let h = big_h / nj as f64;
            let mut prev = y;
            let mut cur = [y[0] + h * f0[0], y[1] + h * f0[1]];
            for m in 1..nj {
                let f = self.rhs(r + h * m as f64, cur)?;
                let next = [prev[0] + h * f[0] * 2.0, prev[1] + h * f[1] * 2.0];
                prev = cur;
                cur = next;
            }
            let f_end = self.rhs(r + big_h, cur)?;
            let smooth = [
                (cur[0] + prev[0] + h * f_end[0]) * 0.5,
                (cur[1] + prev[1] + h * f_end[1]) * 0.5,
            ];
            let mut row = vec![smooth];
            for k in 1..=j {
                // 1 / ((n_j/n_{j-k})² - 1) kept as an exact integer ratio.
                let nk = 2 * (j - k + 1);
                let num = (nk * nk) as f64;
                let den = (nj * nj - nk * nk) as f64;
                let a = row[k - 1];
                let b = table[j - 1][k - 1];
                row.push([
                    a[0] + (a[0] - b[0]) * num / den,
                    a[1] + (a[1] - b[1]) * num / den,
                ]);
            }
            if j >= MIN_COLUMN {
                err = scale(row[j], row[j - 1]);
                if err <= 1.0 {
                    return Some((row[j], err, j));
                }
            }
            table.push(row);
        }
        let best = table[K - 1][K - 1];
        Some((best, err, K - 1))
    }
}

/// Integrates `v_r^{n-2} v_rr = -τ(λ₀) e^{nv-nr}` from `v(0) = 0`,
/// `v_r(0) = (n/(n-1))/(λ₀+1)`, reporting `v` at the grid nodes.
///
/// The closed-form solution is a separatrix: perturbations of `v_r` grow
/// like `e^{(n-κ)r}` relative to it for `n > 2`. The state, `τ` and the
/// initial slope are therefore kept in double-double precision.
pub fn shoot(n: f64, lambda0: f64, grid: &Grid) -> Result<RadialFunction> {
    shoot_with(n, lambda0, grid, &ShootOptions::default())
}

pub fn shoot_with(n: f64, lambda0: f64, grid: &Grid, opts: &ShootOptions) -> Result<RadialFunction> {
    ExtremalParams::new(n, lambda0)?;
    if !(opts.rel_tol >= 1e-30 && opts.abs_tol >= 1e-30) {
        return Err(invalid("ODE tolerances must be >= 1e-30"));
    }
    let nd = Dd::new(n);
    let kappa = nd / (nd - 1.0);
    let l1 = Dd::new(lambda0) + 1.0;
    let slope0 = kappa / l1;
    let int_power = (n.fract() == 0.0 && n > 2.0 && n <= 64.0).then(|| n as u32 - 2);
    let sys = System {
        n,
        tau: (kappa / l1).powf(nd) * lambda0,
        int_power,
        exponent: Dd::new(2.0) - nd,
    };

    let nodes = grid.nodes();
    let mut y: State = [Dd::ZERO, slope0];
    let mut r = Dd::ZERO;
    let mut h = 0.1;
    let mut values = Vec::with_capacity(nodes.len());
    values.push(0.0);
    for &target in &nodes[1..] {
        while r.to_f64() < target {
            let remaining = (Dd::new(target) - r).to_f64();
            let last = h >= remaining;
            let step = if last { Dd::new(target) - r } else { Dd::new(h) };
            let step_f = step.to_f64();
            if step_f < 1e-12 * target.max(1.0) && !last {
                return Err(Error::StepFailure { r: r.to_f64() });
            }
            let f0 = sys.rhs(r, y).ok_or(Error::SlopeSingularity { r: r.to_f64() })?;
            let scale = |a: State, b: State| {
                let sv = opts.abs_tol + opts.rel_tol * a[0].to_f64().abs();
                let sp = f64::MIN_POSITIVE + opts.rel_tol * a[1].to_f64().abs();
                ((a[0] - b[0]).to_f64().abs() / sv).max((a[1] - b[1]).to_f64().abs() / sp)
            };
            match sys.step(r, y, f0, step, scale) {
                Some((y_new, err, col)) => {
                    let expo = 1.0 / (2 * col + 1) as f64;
                    if err <= 1.0 {
                        if n != 2.0 && !(y_new[1].hi > 0.0) {
                            return Err(Error::SlopeSingularity { r: (r + step).to_f64() });
                        }
                        r = if last { Dd::new(target) } else { r + step };
                        y = y_new;
                        // Few columns needed means the step can grow.
                        let grow = if col + 2 < K {
                            4.0
                        } else {
                            (0.94 * (0.65 / err.max(1e-300)).powf(expo)).clamp(0.5, 4.0)
                        };
                        if !last || grow < 1.0 {
                            h = step_f * grow;
                        }
                    } else {
                        h = step_f * (0.94 * (0.65 / err).powf(expo)).clamp(0.1, 0.9);
                    }
                }
                None => {
                    if step_f < 1e-10 {
                        return Err(Error::SlopeSingularity { r: r.to_f64() });
                    }
                    h = 0.5 * step_f;
                }
            }
        }
        values.push(y[0].to_f64());
    }
    RadialFunction::new(grid.clone(), values)
}
