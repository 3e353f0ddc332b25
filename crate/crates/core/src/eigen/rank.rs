use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64;

use super::tridiag::{solve_complex_tridiag, SymTridiag};
use crate::error::{Error, Result};

/// Singular values, descending.
pub fn singular_values<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Number of singular values above `tol * sigma_max`.
pub fn numerical_rank<T: ComplexField<RealField = f64>>(m: &DMatrix<T>, tol: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        Some(&smax) if smax > 0.0 => s.iter().filter(|&&v| v > tol * smax).count(),
        _ => 0,
    }
}

/// `(T1 - lambda R)^{-1} R - (T2 - lambda R)^{-1} R`, the difference of the
/// resolvents of `R^{-1} T1` and `R^{-1} T2` at a nonreal `lambda`, formed
/// column by column from tridiagonal solves.
pub fn pencil_resolvent_difference(
    t1: &SymTridiag,
    t2: &SymTridiag,
    r: &[f64],
    lambda: Complex64,
) -> Result<DMatrix<Complex64>> {
    let n = t1.len();
    if t2.len() != n || r.len() != n {
        return Err(Error::Numerical("resolvent difference: dimension mismatch".into()));
    }
    let shifted = |t: &SymTridiag| -> (Vec<Complex64>, Vec<Complex64>) {
        let off = t.off.iter().map(|&e| Complex64::new(e, 0.0)).collect();
        let diag = (0..n).map(|i| t.diag[i] - lambda * r[i]).collect();
        (off, diag)
    };
    let (o1, d1) = shifted(t1);
    let (o2, d2) = shifted(t2);
    let mut out = DMatrix::<Complex64>::zeros(n, n);
    let mut e = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        e[j] = Complex64::new(r[j], 0.0);
        let x1 = solve_complex_tridiag(&o1, &d1, &o1, &e, f64::MIN_POSITIVE)?;
        let x2 = solve_complex_tridiag(&o2, &d2, &o2, &e, f64::MIN_POSITIVE)?;
        for i in 0..n {
            out[(i, j)] = x1[i] - x2[i];
        }
        e[j] = Complex64::new(0.0, 0.0);
    }
    Ok(out)
}
