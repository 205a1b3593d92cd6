/// Symmetric tridiagonal matrix: `diag[i]` and `off[i]` coupling `i`, `i+1`.
#[derive(Debug, Clone)]
pub(crate) struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

/// `LDLᵀ` pivots of a positive definite tridiagonal matrix.
pub(crate) struct Factor {
    pivots: Vec<f64>,
    off: Vec<f64>,
}

impl SymTridiag {
    pub fn zeros(n: usize) -> Self {
        Self {
            diag: vec![0.0; n],
            off: vec![0.0; n.saturating_sub(1)],
        }
    }

    /// Factors `self + shift·I`; `None` if it is not positive definite.
    pub fn factor(&self, shift: f64) -> Option<Factor> {
        match self.factor_inertia(shift) {
            Some((f, 0)) => Some(f),
            _ => None,
        }
    }

    /// `LDLᵀ` of `self + shift·I` with pivots of either sign, and the number
    /// of negative pivots (the count of negative eigenvalues). `None` on a
    /// vanishing or non-finite pivot.
    pub fn factor_inertia(&self, shift: f64) -> Option<(Factor, usize)> {
        let n = self.diag.len();
        let mut pivots = Vec::with_capacity(n);
        let mut negative = 0;
        for i in 0..n {
            let mut p = self.diag[i] + shift;
            if i > 0 {
                p -= self.off[i - 1] * self.off[i - 1] / pivots[i - 1];
            }
            if p == 0.0 || !p.is_finite() {
                return None;
            }
            if p < 0.0 {
                negative += 1;
            }
            pivots.push(p);
        }
        Some((
            Factor {
                pivots,
                off: self.off.clone(),
            },
            negative,
        ))
    }
}

impl Factor {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.pivots.len();
        let mut z = rhs.to_vec();
        for i in 1..n {
            z[i] -= self.off[i - 1] / self.pivots[i - 1] * z[i - 1];
        }
        let mut y = vec![0.0; n];
        y[n - 1] = z[n - 1] / self.pivots[n - 1];
        for i in (0..n - 1).rev() {
            y[i] = (z[i] - self.off[i] * y[i + 1]) / self.pivots[i];
        }
        y
    }

    /// Solves `(T + μ g gᵀ) x = b` by Sherman–Morrison.
    pub fn solve_rank_one(&self, mu: f64, g: &[f64], b: &[f64]) -> Vec<f64> {
        let y = self.solve(b);
        if mu == 0.0 {
            return y;
        }
        let z = self.solve(g);
        let gy: f64 = g.iter().zip(&y).map(|(a, b)| a * b).sum();
        let gz: f64 = g.iter().zip(&z).map(|(a, b)| a * b).sum();
        let coef = mu * gy / (1.0 + mu * gz);
        y.iter().zip(&z).map(|(yi, zi)| yi - coef * zi).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(t: &SymTridiag, mu: f64, g: &[f64]) -> Vec<Vec<f64>> {
        let n = t.diag.len();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            m[i][i] = t.diag[i];
            if i + 1 < n {
                m[i][i + 1] = t.off[i];
                m[i + 1][i] = t.off[i];
            }
            for j in 0..n {
                m[i][j] += mu * g[i] * g[j];
            }
        }
        m
    }

    #[test]
    fn solves_rank_one_updated_system() {
        let t = SymTridiag {
            diag: vec![4.0, 5.0, 6.0, 3.0, 7.0],
            off: vec![-1.0, 0.5, -2.0, 1.0],
        };
        let g = [0.3, -1.0, 2.0, 0.1, 0.7];
        let b = [1.0, 2.0, -3.0, 0.5, 4.0];
        let f = t.factor(0.0).unwrap();
        let x = f.solve_rank_one(2.5, &g, &b);
        let m = dense(&t, 2.5, &g);
        for i in 0..5 {
            let got: f64 = (0..5).map(|j| m[i][j] * x[j]).sum();
            assert!((got - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn detects_indefinite() {
        let t = SymTridiag {
            diag: vec![1.0, -1.0],
            off: vec![0.0],
        };
        assert!(t.factor(0.0).is_none());
        assert!(t.factor(2.0).is_some());
        assert_eq!(t.factor_inertia(0.0).unwrap().1, 1);
    }

    #[test]
    fn rank_one_update_of_indefinite_matrix() {
        // One negative pivot; 1 + μ gᵀT⁻¹g < 0 makes T + μ g gᵀ definite.
        let t = SymTridiag {
            diag: vec![2.0, -0.5, 3.0],
            off: vec![0.5, 0.25],
        };
        let g = [0.2, 1.0, 0.1];
        let b = [1.0, -2.0, 0.5];
        let (f, neg) = t.factor_inertia(0.0).unwrap();
        assert_eq!(neg, 1);
        let x = f.solve_rank_one(10.0, &g, &b);
        let m = dense(&t, 10.0, &g);
        for i in 0..3 {
            let got: f64 = (0..3).map(|j| m[i][j] * x[j]).sum();
            assert!((got - b[i]).abs() < 1e-12);
        }
    }
}
