//! Dense real nonsymmetric eigenvalues: diagonal balancing followed by
//! Francis double-shift QR on an upper Hessenberg matrix (eigenvalues only).

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Row-major square matrix view helpers.
struct Mat<'a> {
    a: &'a mut [f64],
    n: usize,
}

impl Mat<'_> {
    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }
    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] = v;
    }
}

/// Balance a row-major matrix in place by powers of two, reducing its norm
/// without changing the eigenvalues.
pub fn balance(a: &mut [f64], n: usize) {
    const RADIX: f64 = 2.0;
    let sqrdx = RADIX * RADIX;
    let mut m = Mat { a, n };
    loop {
        let mut done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += m.get(j, i).abs();
                    r += m.get(i, j).abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / RADIX;
                let mut f = 1.0;
                let s = c + r;
                while c < g {
                    f *= RADIX;
                    c *= sqrdx;
                }
                g = r * RADIX;
                while c > g {
                    f /= RADIX;
                    c /= sqrdx;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 0..n {
                        let v = m.get(i, j) * g;
                        m.set(i, j, v);
                    }
                    for j in 0..n {
                        let v = m.get(j, i) * f;
                        m.set(j, i, v);
                    }
                }
            }
        }
        if done {
            break;
        }
    }
}

fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Eigenvalues of an upper Hessenberg row-major matrix (destroyed).
/// At most `30` iterations per eigenvalue.
pub fn hqr_eigenvalues(a: &mut [f64], n: usize) -> Result<Vec<Complex64>> {
    const MAX_ITS: usize = 30;
    let mut m = Mat { a, n };
    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += m.get(i, j).abs();
        }
    }
    let mut nn = n as isize - 1;
    let mut t = 0.0;
    let mut its = 0;
    while nn >= 0 {
        let un = nn as usize;
        // Look for a single small subdiagonal element.
        let mut l = un;
        while l >= 1 {
            let mut s = m.get(l - 1, l - 1).abs() + m.get(l, l).abs();
            if s == 0.0 {
                s = anorm;
            }
            if m.get(l, l - 1).abs() + s == s {
                m.set(l, l - 1, 0.0);
                break;
            }
            l -= 1;
        }
        let mut x = m.get(un, un);
        if l == un {
            wr[un] = x + t;
            wi[un] = 0.0;
            nn -= 1;
            its = 0;
            continue;
        }
        let mut y = m.get(un - 1, un - 1);
        let mut w = m.get(un, un - 1) * m.get(un - 1, un);
        if l == un - 1 {
            let p = 0.5 * (y - x);
            let q = p * p + w;
            let mut z = q.abs().sqrt();
            x += t;
            if q >= 0.0 {
                z = p + sign(z, p);
                wr[un - 1] = x + z;
                wr[un] = x + z;
                if z != 0.0 {
                    wr[un] = x - w / z;
                }
                wi[un - 1] = 0.0;
                wi[un] = 0.0;
            } else {
                wr[un - 1] = x + p;
                wr[un] = x + p;
                wi[un - 1] = -z;
                wi[un] = z;
            }
            nn -= 2;
            its = 0;
            continue;
        }
        if its == MAX_ITS {
            return Err(Error::Numerical(format!(
                "QR iteration did not converge on the active {}x{} block",
                un - l + 1,
                un - l + 1
            )));
        }
        if its == 10 || its == 20 {
            // Exceptional shift.
            t += x;
            for i in 0..=un {
                let v = m.get(i, i) - x;
                m.set(i, i, v);
            }
            let s = m.get(un, un - 1).abs() + m.get(un - 1, un - 2).abs();
            x = 0.75 * s;
            y = x;
            w = -0.4375 * s * s;
        }
        its += 1;

        // Form the shift and look for two consecutive small subdiagonals.
        let mut mm = un - 2;
        let (mut p, mut q, mut r);
        loop {
            let z = m.get(mm, mm);
            let rr = x - z;
            let ss = y - z;
            p = (rr * ss - w) / m.get(mm + 1, mm) + m.get(mm, mm + 1);
            q = m.get(mm + 1, mm + 1) - z - rr - ss;
            r = m.get(mm + 2, mm + 1);
            let s = p.abs() + q.abs() + r.abs();
            p /= s;
            q /= s;
            r /= s;
            if mm == l {
                break;
            }
            let u = m.get(mm, mm - 1).abs() * (q.abs() + r.abs());
            let v = p.abs() * (m.get(mm - 1, mm - 1).abs() + z.abs() + m.get(mm + 1, mm + 1).abs());
            if u + v == v {
                break;
            }
            mm -= 1;
        }
        for i in mm + 2..=un {
            m.set(i, i - 2, 0.0);
            if i != mm + 2 {
                m.set(i, i - 3, 0.0);
            }
        }
        // Double QR step on rows l..=nn and columns mm..=nn.
        let mut k = mm;
        while k + 1 <= un {
            if k != mm {
                p = m.get(k, k - 1);
                q = m.get(k + 1, k - 1);
                r = if k + 1 != un { m.get(k + 2, k - 1) } else { 0.0 };
                x = p.abs() + q.abs() + r.abs();
                if x != 0.0 {
                    p /= x;
                    q /= x;
                    r /= x;
                }
            }
            let s = sign((p * p + q * q + r * r).sqrt(), p);
            if s != 0.0 {
                if k == mm {
                    if l != mm {
                        let v = -m.get(k, k - 1);
                        m.set(k, k - 1, v);
                    }
                } else {
                    m.set(k, k - 1, -s * x);
                }
                p += s;
                x = p / s;
                y = q / s;
                let z = r / s;
                q /= p;
                r /= p;
                for j in k..=un {
                    let mut pp = m.get(k, j) + q * m.get(k + 1, j);
                    if k + 1 != un {
                        pp += r * m.get(k + 2, j);
                        let v = m.get(k + 2, j) - pp * z;
                        m.set(k + 2, j, v);
                    }
                    let v = m.get(k + 1, j) - pp * y;
                    m.set(k + 1, j, v);
                    let v = m.get(k, j) - pp * x;
                    m.set(k, j, v);
                }
                let mmin = if un < k + 3 { un } else { k + 3 };
                for i in l..=mmin {
                    let mut pp = x * m.get(i, k) + y * m.get(i, k + 1);
                    if k + 1 != un {
                        pp += z * m.get(i, k + 2);
                        let v = m.get(i, k + 2) - pp * r;
                        m.set(i, k + 2, v);
                    }
                    let v = m.get(i, k + 1) - pp * q;
                    m.set(i, k + 1, v);
                    let v = m.get(i, k) - pp;
                    m.set(i, k, v);
                }
            }
            k += 1;
        }
    }
    Ok(wr.into_iter().zip(wi).map(|(re, im)| Complex64::new(re, im)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn rotation_block() {
        let mut a = vec![0.0, 1.0, -1.0, 0.0];
        let ev = sorted(hqr_eigenvalues(&mut a, 2).unwrap());
        assert!((ev[0] - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((ev[1] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn companion_matrix_roots() {
        // Companion of (z-1)(z-2)(z-3)(z^2+1) = z^5 - 6z^4 + 12z^3 - 12z^2 + 11z - 6.
        let c = [-6.0, 12.0, -12.0, 11.0, -6.0];
        let n = 5;
        let mut a = vec![0.0; n * n];
        for j in 0..n {
            a[j] = -c[j];
        }
        for i in 1..n {
            a[i * n + i - 1] = 1.0;
        }
        balance(&mut a, n);
        let ev = sorted(hqr_eigenvalues(&mut a, n).unwrap());
        let want = [
            Complex64::new(0.0, -1.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(3.0, 0.0),
        ];
        for (g, w) in ev.iter().zip(want.iter()) {
            assert!((g - w).norm() < 1e-10, "{g} vs {w}");
        }
    }

    #[test]
    fn triangular_is_immediate() {
        let mut a = vec![1.0, 5.0, 7.0, 0.0, 2.0, 3.0, 0.0, 0.0, 3.0];
        let ev = sorted(hqr_eigenvalues(&mut a, 3).unwrap());
        assert_eq!(ev.iter().map(|z| z.re).collect::<Vec<_>>(), vec![1.0, 2.0, 3.0]);
    }
}
