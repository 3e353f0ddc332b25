use serde::{Deserialize, Serialize};

use super::tridiag::SymTridiag;
use crate::error::{Error, Result};

/// Signature of a symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inertia {
    pub n_minus: usize,
    pub n_zero: usize,
    pub n_plus: usize,
}

fn pivmin(t: &SymTridiag) -> f64 {
    let emax = t.off.iter().fold(1.0f64, |m, e| m.max(e * e));
    f64::MIN_POSITIVE * emax
}

/// Number of pencil eigenvalues of `T - lambda R` strictly below `sigma`,
/// for positive `R`. Unpivoted LDL^T recurrence.
pub fn sturm_count(t: &SymTridiag, r: &[f64], sigma: f64) -> usize {
    let n = t.len();
    if n == 0 {
        return 0;
    }
    let guard = pivmin(t);
    let mut count = 0;
    let mut d = t.diag[0] - sigma * r[0];
    for i in 0..n {
        if i > 0 {
            let e = t.off[i - 1];
            d = (t.diag[i] - sigma * r[i]) - e * e / d;
        }
        if d.abs() < guard {
            d = -guard;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

fn check_positive(r: &[f64], n: usize) -> Result<()> {
    if r.len() != n {
        return Err(Error::Numerical("weight length mismatch".into()));
    }
    if let Some(i) = r.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::Numerical(format!(
            "weight entry {i} is {} but must be positive",
            r[i]
        )));
    }
    Ok(())
}

/// Gershgorin enclosure of the spectrum of `R^{-1/2} T R^{-1/2}`.
fn gershgorin(t: &SymTridiag, r: &[f64]) -> (f64, f64) {
    let n = t.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let mut rad = 0.0;
        if i > 0 {
            rad += t.off[i - 1].abs() / (r[i] * r[i - 1]).sqrt();
        }
        if i + 1 < n {
            rad += t.off[i].abs() / (r[i] * r[i + 1]).sqrt();
        }
        let c = t.diag[i] / r[i];
        lo = lo.min(c - rad);
        hi = hi.max(c + rad);
    }
    (lo, hi)
}

/// Eigenvalues of the definite pencil `T - lambda R` in `[lo, hi)` (all of
/// them when `window` is `None`), ascending, by Sturm bisection to full
/// working precision.
pub fn sym_tridiag_eigs(t: &SymTridiag, r: &[f64], window: Option<(f64, f64)>) -> Result<Vec<f64>> {
    let n = t.len();
    check_positive(r, n)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let (g_lo, g_hi) = gershgorin(t, r);
    let scale = g_lo.abs().max(g_hi.abs()).max(f64::MIN_POSITIVE);
    let pad = 1e-10 * scale + f64::MIN_POSITIVE;
    let (mut lo, mut hi) = (g_lo - pad, g_hi + pad);
    let (mut n_lo, mut n_hi) = (0, n);
    if let Some((w_lo, w_hi)) = window {
        if !(w_lo < w_hi) {
            return Ok(Vec::new());
        }
        if w_lo > lo {
            lo = w_lo;
            n_lo = sturm_count(t, r, lo);
        }
        if w_hi < hi {
            hi = w_hi;
            n_hi = sturm_count(t, r, hi);
        }
    }
    if n_hi <= n_lo {
        return Ok(Vec::new());
    }
    let atol = 4.0 * f64::EPSILON * scale;
    let mut out = Vec::with_capacity(n_hi - n_lo);
    // Depth-first over isolating intervals, left half first.
    let mut stack = vec![(lo, hi, n_lo, n_hi)];
    while let Some((a, b, na, nb)) = stack.pop() {
        if nb == na {
            continue;
        }
        let mid = 0.5 * (a + b);
        let tol = atol.max(2.0 * f64::EPSILON * a.abs().max(b.abs()));
        if b - a <= tol || mid <= a || mid >= b {
            out.extend(std::iter::repeat(mid).take(nb - na));
            continue;
        }
        let nm = sturm_count(t, r, mid);
        stack.push((mid, b, nm, nb));
        stack.push((a, mid, na, nm));
    }
    Ok(out)
}

/// Inertia of `M - shift R` for symmetric tridiagonal `M` and diagonal `R`
/// of any sign, via LDL^T with Bunch's 1x1/2x2 pivoting for tridiagonal
/// matrices. Pivots below `1e-12 * ||M - shift R||` count as zero.
pub fn inertia_count(m: &SymTridiag, shift: f64, r: &[f64]) -> Result<Inertia> {
    let n = m.len();
    if r.len() != n {
        return Err(Error::Numerical("weight length mismatch".into()));
    }
    let mut a: Vec<f64> = (0..n).map(|i| m.diag[i] - shift * r[i]).collect();
    if a.iter().chain(m.off.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Numerical("inertia: non-finite matrix entries".into()));
    }
    let shifted = SymTridiag::new(a.clone(), m.off.clone());
    let norm = shifted.norm_inf();
    let zero_tol = 1e-12 * norm;
    let sigma = a.iter().chain(m.off.iter()).fold(0.0f64, |s, v| s.max(v.abs()));
    let alpha = (5f64.sqrt() - 1.0) / 2.0;

    let mut inertia = Inertia {
        n_minus: 0,
        n_zero: 0,
        n_plus: 0,
    };
    let classify = |v: f64, inertia: &mut Inertia| {
        if v.abs() <= zero_tol {
            inertia.n_zero += 1;
        } else if v < 0.0 {
            inertia.n_minus += 1;
        } else {
            inertia.n_plus += 1;
        }
    };

    let mut k = 0;
    while k < n {
        let e = if k + 1 < n { m.off[k] } else { 0.0 };
        if k + 1 == n || sigma * a[k].abs() >= alpha * e * e {
            classify(a[k], &mut inertia);
            if k + 1 < n && e != 0.0 {
                a[k + 1] -= e * e / a[k];
            }
            k += 1;
        } else {
            let (p, q) = (a[k], a[k + 1]);
            let det = p * q - e * e;
            if det == 0.0 || !det.is_finite() {
                return Err(Error::Numerical(format!("inertia: singular 2x2 pivot at row {k}")));
            }
            // Eigenvalues of the 2x2 pivot block.
            let mean = 0.5 * (p + q);
            let rad = (0.25 * (p - q) * (p - q) + e * e).sqrt();
            let (l1, l2) = if mean >= 0.0 {
                let big = mean + rad;
                (big, det / big)
            } else {
                let small = mean - rad;
                (small, det / small)
            };
            classify(l1, &mut inertia);
            classify(l2, &mut inertia);
            if k + 2 < n {
                let f = m.off[k + 1];
                a[k + 2] -= f * f * p / det;
            }
            k += 2;
        }
    }
    Ok(inertia)
}

/// Number of eigenvalues of the definite pencil in the open interval
/// `(lo, hi)`. An endpoint that is numerically an eigenvalue (a zero pivot
/// in the inertia) is treated as lying just outside the interval.
pub fn count_in_interval(t: &SymTridiag, r: &[f64], lo: f64, hi: f64) -> Result<usize> {
    let n = t.len();
    check_positive(r, n)?;
    if !(lo < hi) {
        return Ok(0);
    }
    let below_hi = if hi == f64::INFINITY {
        n
    } else {
        inertia_count(t, hi, r)?.n_minus
    };
    let upto_lo = if lo == f64::NEG_INFINITY {
        0
    } else {
        let i = inertia_count(t, lo, r)?;
        i.n_minus + i.n_zero
    };
    Ok(below_hi.saturating_sub(upto_lo))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diag_inertia() {
        let m = SymTridiag::new(vec![1.0, -1.0], vec![0.0]);
        let i = inertia_count(&m, 0.0, &[1.0, 1.0]).unwrap();
        assert_eq!((i.n_minus, i.n_zero, i.n_plus), (1, 0, 1));
    }

    #[test]
    fn zero_diagonal_uses_two_by_two() {
        let m = SymTridiag::new(vec![0.0, 0.0, 0.0], vec![1.0, 1.0]);
        let i = inertia_count(&m, 0.0, &[1.0; 3]).unwrap();
        // Eigenvalues -sqrt 2, 0, sqrt 2.
        assert_eq!((i.n_minus, i.n_zero, i.n_plus), (1, 1, 1));
    }

    #[test]
    fn laplacian_closed_form() {
        let n = 3;
        let h = std::f64::consts::PI / (n + 1) as f64;
        let t = SymTridiag::new(vec![2.0 / h; n], vec![-1.0 / h; n - 1]);
        let r = vec![h; n];
        let ev = sym_tridiag_eigs(&t, &r, None).unwrap();
        for (k, v) in ev.iter().enumerate() {
            let exact = 2.0 / (h * h) * (1.0 - ((k + 1) as f64 * h).cos());
            assert!((v - exact).abs() < 1e-13 * exact.max(1.0), "{v} vs {exact}");
        }
    }

    #[test]
    fn window_above_spectrum_is_empty() {
        let t = SymTridiag::new(vec![2.0, 2.0], vec![-1.0]);
        assert!(sym_tridiag_eigs(&t, &[1.0, 1.0], Some((10.0, 20.0))).unwrap().is_empty());
        assert_eq!(sym_tridiag_eigs(&t, &[1.0, 1.0], Some((2.0, 5.0))).unwrap().len(), 1);
    }

    #[test]
    fn rejects_nonpositive_weight() {
        let t = SymTridiag::new(vec![2.0, 2.0], vec![-1.0]);
        assert!(sym_tridiag_eigs(&t, &[1.0, -1.0], None).is_err());
        assert!(count_in_interval(&t, &[1.0, 0.0], 0.0, 1.0).is_err());
    }

    #[test]
    fn interval_counts() {
        let t = SymTridiag::new(vec![1.0, 2.0, 3.0], vec![0.0, 0.0]);
        let r = [1.0; 3];
        assert_eq!(count_in_interval(&t, &r, 1.5, 1.5).unwrap(), 0);
        assert_eq!(count_in_interval(&t, &r, f64::NEG_INFINITY, f64::INFINITY).unwrap(), 3);
        // Endpoints on eigenvalues are excluded.
        assert_eq!(count_in_interval(&t, &r, 1.0, 3.0).unwrap(), 1);
        assert_eq!(count_in_interval(&t, &r, 0.5, 3.5).unwrap(), 3);
    }
}
