use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::aberth::{aberth, AberthOutcome};
use super::hqr::{balance, hqr_eigenvalues};
use super::sturm::sym_tridiag_eigs;
use super::tridiag::{solve_complex_tridiag, SymTridiag};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Dense QR for small pencils, Aberth otherwise.
    Auto,
    DenseQr,
    Aberth,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigOptions {
    pub method: Method,
    /// Imaginary parts at or below this are snapped to the real line;
    /// `None` selects `1e-8 * max(1, spectral radius estimate)`.
    pub im_tol: Option<f64>,
    /// Largest dimension the dense QR path accepts.
    pub dense_cap: usize,
    /// `Auto` uses dense QR up to this dimension.
    pub dense_below: usize,
}

impl Default for EigOptions {
    fn default() -> Self {
        EigOptions {
            method: Method::Auto,
            im_tol: None,
            dense_cap: 3000,
            dense_below: 300,
        }
    }
}

/// Eigenvalues of an indefinite pencil, split into real values and
/// conjugate pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexSpectrum {
    /// Ascending.
    pub real: Vec<f64>,
    /// One representative per pair, `Im > 0`, sorted by real part.
    pub pairs: Vec<Complex64>,
    pub real_residuals: Vec<f64>,
    pub pair_residuals: Vec<f64>,
    pub im_tol: f64,
    pub method: Method,
    /// Largest distance between a nonreal eigenvalue and the conjugate of
    /// its partner before averaging.
    pub conjugate_mismatch: f64,
    /// Neighbouring eigenvalues closer than `im_tol`; continuum
    /// multiplicity claims are not inferred from this.
    pub near_degenerate: usize,
    /// Aberth sweeps used (zero for dense QR).
    pub sweeps: usize,
    /// Roots accepted at the loose stagnation tolerance.
    pub stagnant_roots: usize,
}

impl ComplexSpectrum {
    pub fn len(&self) -> usize {
        self.real.len() + 2 * self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All eigenvalues including both members of each pair.
    pub fn all(&self) -> Vec<Complex64> {
        let mut v: Vec<Complex64> = self.real.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        for p in &self.pairs {
            v.push(*p);
            v.push(p.conj());
        }
        v
    }
}

/// Split eigenvalues into reals (|Im| <= im_tol) and conjugate pairs, by
/// greedy nearest-neighbour matching of the upper and lower half-planes.
/// Returns `(reals, pairs, worst mismatch)`.
pub fn pair_conjugates(values: &[Complex64], im_tol: f64) -> Result<(Vec<f64>, Vec<Complex64>, f64)> {
    let mut reals = Vec::new();
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for &z in values {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Numerical("non-finite eigenvalue".into()));
        }
        if z.im.abs() <= im_tol {
            reals.push(z.re);
        } else if z.im > 0.0 {
            upper.push(z);
        } else {
            lower.push(z);
        }
    }
    if upper.len() != lower.len() {
        return Err(Error::Numerical(format!(
            "unmatched nonreal eigenvalue: {} in the upper half-plane, {} in the lower",
            upper.len(),
            lower.len()
        )));
    }
    let key = |a: &Complex64, b: &Complex64| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im));
    upper.sort_by(key);
    let mut used = vec![false; lower.len()];
    let mut pairs = Vec::with_capacity(upper.len());
    let mut worst = 0.0f64;
    for u in &upper {
        let mut best = None;
        let mut best_d = f64::INFINITY;
        for (j, l) in lower.iter().enumerate() {
            if !used[j] {
                let d = (u - l.conj()).norm();
                if d < best_d {
                    best_d = d;
                    best = Some(j);
                }
            }
        }
        let j = best.expect("equal counts guarantee a partner");
        used[j] = true;
        worst = worst.max(best_d);
        pairs.push(0.5 * (u + lower[j].conj()));
    }
    reals.sort_by(f64::total_cmp);
    pairs.sort_by(key);
    Ok((reals, pairs, worst))
}

/// Row-sum bound on the spectral radius of `R^{-1} T`.
fn radius_estimate(t: &SymTridiag, r: &[f64]) -> f64 {
    let n = t.len();
    (0..n)
        .map(|i| {
            let mut s = t.diag[i].abs();
            if i > 0 {
                s += t.off[i - 1].abs();
            }
            if i + 1 < n {
                s += t.off[i].abs();
            }
            s / r[i].abs()
        })
        .fold(0.0, f64::max)
}

fn dense_eigs(t: &SymTridiag, r: &[f64]) -> Result<Vec<Complex64>> {
    let n = t.len();
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        a[i * n + i] = t.diag[i] / r[i];
        if i > 0 {
            a[i * n + i - 1] = t.off[i - 1] / r[i];
        }
        if i + 1 < n {
            a[i * n + i + 1] = t.off[i] / r[i];
        }
    }
    balance(&mut a, n);
    hqr_eigenvalues(&mut a, n)
}

/// Starting points: eigenvalues of the blocks of constant weight sign,
/// pushed off the real line by a fraction of the local spacing.
fn aberth_seeds(t: &SymTridiag, r: &[f64], scale: f64) -> Result<Vec<Complex64>> {
    let n = t.len();
    let mut seeds = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        let s = r[start] > 0.0;
        let mut end = start + 1;
        while end < n && (r[end] > 0.0) == s {
            end += 1;
        }
        let block = t.slice(start..end);
        let w: Vec<f64> = r[start..end].iter().map(|v| v.abs()).collect();
        let sign = if s { 1.0 } else { -1.0 };
        seeds.extend(sym_tridiag_eigs(&block, &w, None)?.into_iter().map(|v| sign * v));
        start = end;
    }
    seeds.sort_by(f64::total_cmp);
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let lo = 1e-6 * scale;
    let hi = 0.1 * scale;
    Ok((0..n)
        .map(|k| {
            let left = if k > 0 { seeds[k] - seeds[k - 1] } else { f64::INFINITY };
            let right = if k + 1 < n { seeds[k + 1] - seeds[k] } else { f64::INFINITY };
            let gap = left.min(right);
            let rad = if gap.is_finite() { (0.3 * gap).clamp(lo, hi) } else { hi };
            let th = golden * (k as f64 + 1.0);
            Complex64::new(seeds[k] + rad * th.cos(), rad * th.sin())
        })
        .collect())
}

fn aberth_eigs(t: &SymTridiag, r: &[f64], scale: f64) -> Result<AberthOutcome> {
    let n = t.len();
    let a: Vec<f64> = (0..n).map(|i| t.diag[i] / r[i]).collect();
    let beta: Vec<f64> = (0..n.saturating_sub(1))
        .map(|i| t.off[i] * t.off[i] / (r[i] * r[i + 1]))
        .collect();
    let seeds = aberth_seeds(t, r, scale)?;
    aberth(&a, &beta, seeds, scale)
}

/// Relative residual of `lambda` after two steps of inverse iteration.
fn residual(t: &SymTridiag, r: &[f64], lambda: Complex64, t_norm: f64, r_norm: f64) -> f64 {
    let n = t.len();
    let off: Vec<Complex64> = t.off.iter().map(|&e| Complex64::new(e, 0.0)).collect();
    let diag: Vec<Complex64> = (0..n).map(|i| t.diag[i] - lambda * r[i]).collect();
    let denom = t_norm + lambda.norm() * r_norm;
    let tiny = f64::EPSILON * denom.max(f64::MIN_POSITIVE);
    // Pencil inverse iteration (T - lambda R) x' = R x from a generic start.
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let mut x: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(1.0, golden * k as f64) / r[k].abs())
        .collect();
    for _ in 0..2 {
        let rhs: Vec<Complex64> = x.iter().zip(r).map(|(v, w)| v * *w).collect();
        match solve_complex_tridiag(&off, &diag, &off, &rhs, tiny) {
            Ok(y) => {
                let nrm = y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
                if !(nrm > 0.0 && nrm.is_finite()) {
                    return f64::NAN;
                }
                x = y.into_iter().map(|v| v / nrm).collect();
            }
            Err(_) => return f64::NAN,
        }
    }
    let res = t.apply_shifted(lambda, r, &x);
    res.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt() / denom
}

/// All eigenvalues of `T - lambda R` for a diagonal weight of any sign,
/// i.e. the eigenvalues of `R^{-1} T`.
pub fn indefinite_eigs(t: &SymTridiag, r: &[f64], opts: &EigOptions) -> Result<ComplexSpectrum> {
    let n = t.len();
    if r.len() != n {
        return Err(Error::Numerical("weight length mismatch".into()));
    }
    if let Some(i) = r.iter().position(|&v| v == 0.0 || !v.is_finite()) {
        return Err(Error::Numerical(format!("weight entry {i} is zero or non-finite")));
    }
    let rho = radius_estimate(t, r);
    let im_tol = opts.im_tol.unwrap_or(1e-8 * rho.max(1.0));
    if n == 0 {
        return Ok(ComplexSpectrum {
            real: Vec::new(),
            pairs: Vec::new(),
            real_residuals: Vec::new(),
            pair_residuals: Vec::new(),
            im_tol,
            method: opts.method,
            conjugate_mismatch: 0.0,
            near_degenerate: 0,
            sweeps: 0,
            stagnant_roots: 0,
        });
    }
    let dense_ok = |n: usize| -> Result<()> {
        if n > opts.dense_cap {
            Err(Error::Numerical(format!(
                "dense eigensolve refused for N = {n} > {}; lower the grid density",
                opts.dense_cap
            )))
        } else {
            Ok(())
        }
    };
    let scale = rho.max(f64::MIN_POSITIVE);
    let dense = |t: &SymTridiag| -> Result<(Vec<Complex64>, Method, usize, usize)> {
        Ok((dense_eigs(t, r)?, Method::DenseQr, 0, 0))
    };
    let from_aberth = |o: AberthOutcome| (o.roots, Method::Aberth, o.sweeps, o.stagnant);
    let (values, method, sweeps, stagnant_roots) = match opts.method {
        Method::DenseQr => {
            dense_ok(n)?;
            dense(t)?
        }
        Method::Aberth => from_aberth(aberth_eigs(t, r, scale)?),
        Method::Auto if n <= opts.dense_below => dense(t)?,
        Method::Auto => match aberth_eigs(t, r, scale) {
            Ok(o) => from_aberth(o),
            Err(e) => {
                dense_ok(n).map_err(|_| e)?;
                dense(t)?
            }
        },
    };
    let (real, pairs, conjugate_mismatch) = pair_conjugates(&values, im_tol)?;
    let t_norm = t.norm_inf();
    let r_norm = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let real_residuals = real
        .iter()
        .map(|&x| residual(t, r, Complex64::new(x, 0.0), t_norm, r_norm))
        .collect();
    let pair_residuals = pairs.iter().map(|&z| residual(t, r, z, t_norm, r_norm)).collect();
    let near_degenerate = real.windows(2).filter(|w| w[1] - w[0] <= im_tol).count()
        + pairs.windows(2).filter(|w| (w[1] - w[0]).norm() <= im_tol).count();
    Ok(ComplexSpectrum {
        real,
        pairs,
        real_residuals,
        pair_residuals,
        im_tol,
        method,
        conjugate_mismatch,
        near_degenerate,
        sweeps,
        stagnant_roots,
    })
}
