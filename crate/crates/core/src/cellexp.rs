//! Exact integrals of `exp` over a cell on which the exponent is linear,
//! with first and second derivatives in the two endpoint exponents.

/// `∫_0^1 θ^k e^{dθ} dθ` for `k = 0, 1, 2`, `d ≤ 0`.
fn moments(d: f64) -> [f64; 3] {
    debug_assert!(d <= 0.0);
    if d > -1.0 {
        // Σ_j d^j / (j! (j + k + 1))
        let mut out = [0.0; 3];
        let mut term = 1.0;
        for j in 0..30 {
            let jf = j as f64;
            out[0] += term / (jf + 1.0);
            out[1] += term / (jf + 2.0);
            out[2] += term / (jf + 3.0);
            term *= d / (jf + 1.0);
            if term.abs() < 1e-18 {
                break;
            }
        }
        out
    } else {
        let e = d.exp();
        [
            d.exp_m1() / d,
            (e * (d - 1.0) + 1.0) / (d * d),
            (e * (d * d - 2.0 * d + 2.0) - 2.0) / (d * d * d),
        ]
    }
}

/// `h ∫_0^1 e^{(1-θ)A + θB} dθ` and its derivatives in `A` and `B`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CellExp {
    pub value: f64,
    pub d_left: f64,
    pub d_right: f64,
    pub d2_ll: f64,
    pub d2_lr: f64,
    pub d2_rr: f64,
}

/// Value only.
pub(crate) fn cell_exp_value(left: f64, right: f64, h: f64) -> f64 {
    let d = right - left;
    if d <= 0.0 {
        h * left.exp() * moments(d)[0]
    } else {
        h * right.exp() * moments(-d)[0]
    }
}

pub(crate) fn cell_exp(left: f64, right: f64, h: f64) -> CellExp {
    let d = right - left;
    // (∫1, ∫θ, ∫θ², ∫(1-θ), ∫(1-θ)², ∫θ(1-θ)) against the exponential.
    let (base, m0, t1, t2, s1, s2, ts) = if d <= 0.0 {
        let [m0, m1, m2] = moments(d);
        (left.exp(), m0, m1, m2, m0 - m1, m0 - 2.0 * m1 + m2, m1 - m2)
    } else {
        let [m0, m1, m2] = moments(-d);
        (right.exp(), m0, m0 - m1, m0 - 2.0 * m1 + m2, m1, m2, m1 - m2)
    };
    let scale = h * base;
    CellExp {
        value: scale * m0,
        d_left: scale * s1,
        d_right: scale * t1,
        d2_ll: scale * s2,
        d2_lr: scale * ts,
        d2_rr: scale * t2,
    }
}
