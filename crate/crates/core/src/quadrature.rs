//! Adaptive Simpson quadrature, including integrals over the whole real line
//! by symmetric doubling of the integration window.

use serde::{Deserialize, Serialize};

use crate::error::Result;

const MAX_DEPTH: u32 = 48;

/// Integrate `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if a == b {
        return Ok(0.0);
    }
    let m = 0.5 * (a + b);
    let fa = f(a)?;
    let fm = f(m)?;
    let fb = f(b)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    refine(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn refine<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol || (m - a) <= 4.0 * f64::EPSILON * m.abs() {
        return Ok(left + right + delta / 15.0);
    }
    Ok(refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

/// Outcome of an integral over the real line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineIntegral {
    pub value: f64,
    pub converged: bool,
    /// Half-width of the last window integrated.
    pub half_width: f64,
    pub reason: Option<String>,
}

/// Integrate `f` over the real line: start on `[-x0, x0]` and add shells
/// `[-2X, -X] ∪ [X, 2X]` until a shell contributes less than `increment_tol`
/// (twice in a row, and not before `min_half_width`), or until the window
/// exceeds `max_half_width`.
pub fn line_integral<F>(
    f: &F,
    x0: f64,
    min_half_width: f64,
    increment_tol: f64,
    max_half_width: f64,
) -> Result<LineIntegral>
where
    F: Fn(f64) -> Result<f64>,
{
    let shell_tol = 1e-3 * increment_tol;
    let mut x = x0;
    let mut value = adaptive_simpson(f, -x, 0.0, shell_tol)? + adaptive_simpson(f, 0.0, x, shell_tol)?;
    let mut quiet = 0;
    while x <= max_half_width {
        let inc = adaptive_simpson(f, -2.0 * x, -x, shell_tol)? + adaptive_simpson(f, x, 2.0 * x, shell_tol)?;
        value += inc;
        x *= 2.0;
        if inc.abs() < increment_tol {
            quiet += 1;
            if quiet >= 2 && x >= min_half_width {
                return Ok(LineIntegral {
                    value,
                    converged: true,
                    half_width: x,
                    reason: None,
                });
            }
        } else {
            quiet = 0;
        }
    }
    Ok(LineIntegral {
        value,
        converged: false,
        half_width: x,
        reason: Some("not integrable at this scale".into()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = adaptive_simpson(&|x: f64| Ok(x * x * x - x), 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-13);
    }

    #[test]
    fn kink_and_jump() {
        let v = adaptive_simpson(&|x: f64| Ok(x.abs()), -1.0, 3.0, 1e-12).unwrap();
        assert!((v - 5.0).abs() < 1e-10);
        let v = adaptive_simpson(&|x: f64| Ok(if x < 0.3 { 1.0 } else { 0.0 }), 0.0, 1.0, 1e-10).unwrap();
        assert!((v - 0.3).abs() < 1e-9);
    }

    #[test]
    fn gaussian_on_line() {
        let r = line_integral(&|x: f64| Ok((-x * x).exp()), 1.0, 64.0, 1e-8, 1e6).unwrap();
        assert!(r.converged);
        assert!((r.value - std::f64::consts::PI.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn harmonic_tail_diverges() {
        let r = line_integral(&|x: f64| Ok(1.0 / (1.0 + x.abs())), 1.0, 64.0, 1e-8, 1e6).unwrap();
        assert!(!r.converged);
        assert!(r.value > 20.0);
    }

    #[test]
    fn compact_support_far_out_is_not_missed() {
        let f = |x: f64| Ok(if (40.0..41.0).contains(&x) { 1.0 } else { 0.0 });
        let r = line_integral(&f, 1.0, 64.0, 1e-8, 1e6).unwrap();
        assert!(r.converged);
        assert!((r.value - 1.0).abs() < 1e-8);
    }
}
