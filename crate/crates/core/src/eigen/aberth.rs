//! Ehrlich-Aberth simultaneous iteration for the eigenvalues of a real
//! tridiagonal matrix given by its diagonal `a` and the products
//! `beta[i] = A[i][i+1] * A[i+1][i]`.
//!
//! The Newton ratio `p/p'` of the characteristic polynomial comes from the
//! three-term recurrence in ratio form, `rho_k = p_k / p_{k-1}` and
//! `sigma_k = p_k' / p_k`, which never forms the polynomial itself and so
//! cannot overflow. One sweep costs O(n^2).

use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) struct AberthOutcome {
    pub roots: Vec<Complex64>,
    pub sweeps: usize,
    /// Roots accepted at the looser stagnation tolerance.
    pub stagnant: usize,
}

/// `p(z) / p'(z)` for the characteristic polynomial of the tridiagonal
/// matrix.
fn newton_ratio(z: Complex64, a: &[f64], beta: &[f64], tiny: f64) -> Complex64 {
    let guard = |v: Complex64| {
        if v.norm() < tiny {
            Complex64::new(tiny, 0.0)
        } else {
            v
        }
    };
    let mut rho = guard(z - a[0]);
    let mut s_prev2 = Complex64::new(0.0, 0.0);
    let mut s_prev = rho.inv();
    for k in 1..a.len() {
        let zk = z - a[k];
        let b = beta[k - 1];
        let rho_k = guard(zk - b / rho);
        let s_k = (1.0 + zk * s_prev - b * s_prev2 / rho) / rho_k;
        s_prev2 = s_prev;
        s_prev = s_k;
        rho = rho_k;
    }
    if s_prev.norm() == 0.0 {
        Complex64::new(tiny, 0.0)
    } else {
        s_prev.inv()
    }
}

pub(crate) fn aberth(a: &[f64], beta: &[f64], mut z: Vec<Complex64>, scale: f64) -> Result<AberthOutcome> {
    let n = a.len();
    debug_assert_eq!(z.len(), n);
    const MAX_SWEEPS: usize = 400;
    let tiny = f64::EPSILON * f64::EPSILON * scale.max(f64::MIN_POSITIVE);
    let floor = 1e-8 * scale;
    let tight = 8.0 * f64::EPSILON;
    let loose = 1e-9;
    let mut done = vec![false; n];
    let mut last_step = vec![f64::INFINITY; n];
    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut active = 0;
        for i in 0..n {
            if done[i] {
                continue;
            }
            active += 1;
            let zi = z[i];
            let nr = newton_ratio(zi, a, beta, tiny);
            let mut sum = Complex64::new(0.0, 0.0);
            for (j, zj) in z.iter().enumerate() {
                if j != i {
                    let d = zi - zj;
                    if d.norm() > 0.0 {
                        sum += d.inv();
                    }
                }
            }
            let denom = 1.0 - nr * sum;
            let w = if denom.norm() > 0.0 { nr / denom } else { nr };
            if !(w.re.is_finite() && w.im.is_finite()) {
                return Err(Error::Numerical(format!("Aberth step diverged at root {i}")));
            }
            z[i] = zi - w;
            let step = w.norm();
            last_step[i] = step;
            if step <= tight * z[i].norm().max(floor) {
                done[i] = true;
            }
        }
        if active == 0 {
            break;
        }
    }
    let mut stagnant = 0;
    for i in 0..n {
        if !done[i] {
            if last_step[i] <= loose * z[i].norm().max(floor) {
                stagnant += 1;
            } else {
                return Err(Error::Numerical(format!(
                    "Aberth iteration did not converge for root {i} (last step {:e})",
                    last_step[i]
                )));
            }
        }
    }
    Ok(AberthOutcome {
        roots: z,
        sweeps,
        stagnant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_rotation() {
        // A = [[0, 1], [-1, 0]]: beta = -1, eigenvalues +-i.
        let seeds = vec![Complex64::new(0.3, 0.2), Complex64::new(-0.1, -0.5)];
        let out = aberth(&[0.0, 0.0], &[-1.0], seeds, 1.0).unwrap();
        let mut r = out.roots;
        r.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((r[0] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        assert!((r[1] - Complex64::new(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn newton_ratio_matches_direct_polynomial() {
        // p(z) = det(zI - A) for a 3x3 tridiagonal matrix.
        let a = [1.0, -2.0, 0.5];
        let beta = [2.0, -3.0];
        let z = Complex64::new(0.7, 0.4);
        let p1 = z - a[0];
        let p2 = (z - a[1]) * p1 - beta[0];
        let p3 = (z - a[2]) * p2 - beta[1] * p1;
        let d1 = Complex64::new(1.0, 0.0);
        let d2 = p1 + (z - a[1]) * d1;
        let d3 = p2 + (z - a[2]) * d2 - beta[1] * d1;
        let want = p3 / d3;
        let got = newton_ratio(z, &a, &beta, 1e-300);
        assert!((got - want).norm() < 1e-14 * want.norm());
    }
}
