use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Real symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    /// `off[i]` couples rows `i` and `i + 1`.
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert!(
            off.len() + 1 == diag.len() || (diag.is_empty() && off.is_empty()),
            "off-diagonal length must be n - 1"
        );
        SymTridiag { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| {
                let l = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
                let r = if i + 1 < n { self.off[i].abs() } else { 0.0 };
                self.diag[i].abs() + l + r
            })
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
        }
        for (i, &e) in self.off.iter().enumerate() {
            m[(i, i + 1)] = e;
            m[(i + 1, i)] = e;
        }
        m
    }

    /// Principal submatrix on rows `range`.
    pub fn slice(&self, range: std::ops::Range<usize>) -> SymTridiag {
        if range.is_empty() {
            return SymTridiag::new(Vec::new(), Vec::new());
        }
        SymTridiag::new(
            self.diag[range.clone()].to_vec(),
            self.off[range.start..range.end - 1].to_vec(),
        )
    }

    /// `(T - z R) v` for a complex vector.
    pub fn apply_shifted(&self, z: Complex64, r: &[f64], v: &[Complex64]) -> Vec<Complex64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = (self.diag[i] - z * r[i]) * v[i];
                if i > 0 {
                    s += self.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * v[i + 1];
                }
                s
            })
            .collect()
    }
}

/// Solve a complex tridiagonal system `A x = b` by Gaussian elimination with
/// partial pivoting. `sub[i] = A[i+1][i]`, `sup[i] = A[i][i+1]`. Exactly
/// singular pivots are replaced by `tiny`, which is what inverse iteration
/// needs.
pub fn solve_complex_tridiag(
    sub: &[Complex64],
    diag: &[Complex64],
    sup: &[Complex64],
    b: &[Complex64],
    tiny: f64,
) -> Result<Vec<Complex64>> {
    let n = diag.len();
    if b.len() != n || (n > 0 && (sub.len() != n - 1 || sup.len() != n - 1)) {
        return Err(Error::Numerical("tridiagonal solve: dimension mismatch".into()));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut d = diag.to_vec();
    let mut du = sup.to_vec();
    du.push(zero);
    let mut du2 = vec![zero; n];
    let mut dl = sub.to_vec();
    let mut x = b.to_vec();
    // Row i holds (d[i], du[i], du2[i]) in columns i, i+1, i+2.
    for i in 0..n - 1 {
        if dl[i].norm() > d[i].norm() {
            // Swap rows i and i+1.
            let (a0, a1, a2) = (d[i], du[i], du2[i]);
            d[i] = dl[i];
            du[i] = d[i + 1];
            du2[i] = if i + 1 < n - 1 { du[i + 1] } else { zero };
            let l = a0 / d[i];
            d[i + 1] = a1 - l * du[i];
            if i + 1 < n - 1 {
                du[i + 1] = a2 - l * du2[i];
            }
            dl[i] = l;
            x.swap(i, i + 1);
            x[i + 1] = x[i + 1] - l * x[i];
        } else {
            if d[i] == zero {
                d[i] = Complex64::new(tiny, 0.0);
            }
            let l = dl[i] / d[i];
            d[i + 1] -= l * du[i];
            dl[i] = l;
            x[i + 1] = x[i + 1] - l * x[i];
        }
    }
    if d[n - 1] == zero {
        d[n - 1] = Complex64::new(tiny, 0.0);
    }
    x[n - 1] /= d[n - 1];
    if n >= 2 {
        x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
    }
    if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Numerical("tridiagonal solve produced non-finite values".into()));
    }
    Ok(x)
}
