//! Tridiagonal matrices and the Thomas solve.
//!
//! Every linear system in this crate that is not an eigenproblem is
//! tridiagonal: the discrete Poisson equation, the shifted diffusion
//! systems of the implicit stage, and the difference operators
//! themselves. Dense storage would be wasteful, so the band is kept as
//! three vectors.

use crate::error::{Error, Result};

/// Tridiagonal matrix `A` of size `n`:
/// `sub[i] = A[i+1][i]`, `diag[i] = A[i][i]`, `sup[i] = A[i][i+1]`.
#[derive(Clone, Debug)]
pub struct Tridiag {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
}

impl Tridiag {
    pub fn zeros(n: usize) -> Self {
        Tridiag {
            sub: vec![0.0; n.saturating_sub(1)],
            diag: vec![0.0; n],
            sup: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        assert_eq!(x.len(), n);
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut v = self.diag[i] * x[i];
            if i > 0 {
                v += self.sub[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                v += self.sup[i] * x[i + 1];
            }
            y[i] = v;
        }
        y
    }

    /// `c*I + s*A`, used to form the shifted implicit systems.
    pub fn scaled_shift(&self, c: f64, s: f64) -> Tridiag {
        Tridiag {
            sub: self.sub.iter().map(|a| s * a).collect(),
            diag: self.diag.iter().map(|a| c + s * a).collect(),
            sup: self.sup.iter().map(|a| s * a).collect(),
        }
    }

    /// Thomas algorithm. No pivoting; the systems solved here are
    /// diagonally dominant by construction.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        assert_eq!(rhs.len(), n);
        if n == 0 {
            return Ok(Vec::new());
        }
        let mut w = vec![0.0; n];
        let mut g = vec![0.0; n];
        let mut pivot = self.diag[0];
        if !pivot.is_finite() || pivot.abs() < f64::MIN_POSITIVE * 8.0 {
            return Err(Error::numeric("tridiagonal solve: zero pivot at row 0"));
        }
        if n > 1 {
            w[0] = self.sup[0] / pivot;
        }
        g[0] = rhs[0] / pivot;
        for i in 1..n {
            pivot = self.diag[i] - self.sub[i - 1] * w[i - 1];
            if !pivot.is_finite() || pivot.abs() < f64::MIN_POSITIVE * 8.0 {
                return Err(Error::numeric(format!(
                    "tridiagonal solve: zero pivot at row {i}"
                )));
            }
            if i + 1 < n {
                w[i] = self.sup[i] / pivot;
            }
            g[i] = (rhs[i] - self.sub[i - 1] * g[i - 1]) / pivot;
        }
        let mut x = g;
        for i in (0..n - 1).rev() {
            x[i] -= w[i] * x[i + 1];
        }
        Ok(x)
    }

    /// Max-norm of `A x - b`, relative to `1 + |b|_inf`.
    pub fn residual(&self, x: &[f64], b: &[f64]) -> f64 {
        let ax = self.apply(x);
        let scale = 1.0 + b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        ax.iter()
            .zip(b)
            .fold(0.0f64, |m, (a, bb)| m.max((a - bb).abs()))
            / scale
    }
}
