//! Floquet discriminant of a periodic half-line piece and its band set.

use serde::{Deserialize, Serialize};

use super::bands::{Band, BandSet};
use crate::coeff::{CoefficientField, EndpointMeta, Side};
use crate::error::{Error, Result};

/// One period cell `[start, start + length]`. Without an explicit anchor
/// the cell is placed at least 64 units beyond the sign window edge, so a
/// decaying perturbation of a periodic tail does not enter the bands.
pub fn period_cell(field: &CoefficientField, side: Side) -> Result<(f64, f64)> {
    let (length, anchor) = match field.meta(side) {
        EndpointMeta::Period { length, anchor } => (*length, *anchor),
        _ => {
            return Err(Error::validation(
                format!("endpoints.{}", side_name(side)),
                "no period declared on this side",
            ))
        }
    };
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::validation("period", "period length must be positive"));
    }
    let (alpha, beta) = field.sign_window.unwrap_or((0.0, 0.0));
    let cells = (64.0 / length).ceil();
    let start = match (anchor, side) {
        (Some(x), _) => x,
        (None, Side::Plus) => beta + cells * length,
        (None, Side::Minus) => alpha - (cells + 1.0) * length,
    };
    Ok((start, length))
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::Minus => "minus",
        Side::Plus => "plus",
    }
}

/// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

type State = [f64; 4];

/// Integrates `y' = f(x, y)` from `x0` to `x1` with adaptive Dormand-Prince
/// steps at relative tolerance `rtol`.
fn dopri5<F>(f: F, x0: f64, x1: f64, y0: State, rtol: f64, atol: f64) -> Result<State>
where
    F: Fn(f64, &State) -> Result<State>,
{
    const MAX_STEPS: usize = 1_000_000;
    let span = x1 - x0;
    let mut x = x0;
    let mut y = y0;
    let mut h = span / 64.0;
    let mut k = [[0.0; 4]; 7];
    k[0] = f(x, &y)?;
    for _ in 0..MAX_STEPS {
        if x >= x1 {
            return Ok(y);
        }
        let last = x + h >= x1;
        if last {
            h = x1 - x;
        }
        for s in 1..7 {
            let mut ys = y;
            for (i, v) in ys.iter_mut().enumerate() {
                for (j, kj) in k.iter().take(s).enumerate() {
                    *v += h * A[s][j] * kj[i];
                }
            }
            k[s] = f(x + C[s] * h, &ys)?;
        }
        // Stage 7 is evaluated at the fifth-order solution.
        let mut ynew = y;
        for (i, v) in ynew.iter_mut().enumerate() {
            for j in 0..6 {
                *v += h * A[6][j] * k[j][i];
            }
        }
        let mut err: f64 = 0.0;
        for i in 0..4 {
            let e: f64 = (0..7).map(|j| E[j] * k[j][i]).sum::<f64>() * h;
            let sc = atol + rtol * y[i].abs().max(ynew[i].abs());
            err = err.max((e / sc).abs());
        }
        if !err.is_finite() {
            return Err(Error::Numerical(format!("integrator step failure at x = {x}")));
        }
        if err <= 1.0 {
            x = if last { x1 } else { x + h };
            y = ynew;
            k[0] = k[6];
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h.abs() < 1e-14 * span.abs() {
            return Err(Error::Numerical(format!("integrator step size underflow at x = {x}")));
        }
    }
    Err(Error::Numerical("integrator exceeded the step limit".into()))
}

pub const HILL_RTOL: f64 = 1e-10;

/// `D(lambda) = u1(L) + (p u2')(L)` for `-(p u')' + q u = lambda |r| u` over
/// one period cell, with `u1, u2` the fundamental solutions at the cell
/// start.
pub fn hill_discriminant(field: &CoefficientField, side: Side, lambda: f64) -> Result<f64> {
    let (x0, len) = period_cell(field, side)?;
    discriminant_on(field, x0, len, lambda)
}

fn discriminant_on(field: &CoefficientField, x0: f64, len: f64, lambda: f64) -> Result<f64> {
    let rhs = |x: f64, y: &State| -> Result<State> {
        let p = field.p(x)?;
        let w = field.q(x)? - lambda * field.r(x)?.abs();
        Ok([y[1] / p, w * y[0], y[3] / p, w * y[2]])
    };
    let y = dopri5(rhs, x0, x0 + len, [1.0, 0.0, 0.0, 1.0], HILL_RTOL, 1e-12)?;
    Ok(y[0] + y[3])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicBands {
    pub side: Side,
    /// Bands of `H_+`, or of `-H_-` for the minus side.
    pub bands: BandSet,
    /// Maximal runs of `|D| <= 2` for the half-line operator itself (not
    /// reflected), with the number of Floquet bands each run contains.
    pub runs: Vec<(Band, usize)>,
    /// Search range in the half-line operator's spectral variable.
    pub search: Band,
    pub k_max: usize,
    pub found: usize,
    /// Fewer than `k_max` Floquet bands were found below the search cap.
    pub partial: bool,
}

/// Bands `{|D| <= 2}` covering at least the first `k_max` Floquet bands.
/// Edges are refined by bisection on `D -+ 2` to `1e-10`. A run that is
/// still open at the search cap extends to infinity.
pub fn periodic_bands(field: &CoefficientField, side: Side, k_max: usize) -> Result<PeriodicBands> {
    if k_max == 0 {
        return Err(Error::validation("k_max", "need at least one band"));
    }
    let (x0, len) = period_cell(field, side)?;
    let (mut w_min, mut w_max, mut stiff) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for j in 0..=128 {
        let x = x0 + len * j as f64 / 128.0;
        let ra = field.r(x)?.abs();
        if ra == 0.0 {
            return Err(Error::Hypothesis(format!("weight vanishes at x = {x} in the period cell")));
        }
        let w = field.q(x)? / ra;
        w_min = w_min.min(w);
        w_max = w_max.max(w);
        stiff = stiff.max(field.p(x)? / ra);
    }
    let lo = w_min - 1.0;
    let kk = k_max as f64 * std::f64::consts::PI / len;
    let hi = w_max + stiff * kk * kk + 10.0;
    let d = |lambda: f64| discriminant_on(field, x0, len, lambda);

    let m = 64 * (k_max + 2);
    let span = (hi - lo).sqrt();
    let lam: Vec<f64> = (0..=m)
        .map(|j| {
            let s = span * j as f64 / m as f64;
            lo + s * s
        })
        .collect();
    let vals: Vec<f64> = lam.iter().map(|&l| d(l)).collect::<Result<_>>()?;
    if vals[0].abs() <= 2.0 {
        return Err(Error::Numerical(format!("search floor {lo} lies inside a band")));
    }
    let edge = |a: f64, b: f64, da: f64| -> Result<f64> {
        // Root of D - target between an out-of-band and an in-band sample.
        let target = 2.0f64.copysign(da);
        let (mut a, mut b, mut fa) = (a, b, da - target);
        let tol = 1e-10 * a.abs().max(b.abs()).max(1.0);
        while (b - a).abs() > tol {
            let mid = 0.5 * (a + b);
            let fm = d(mid)? - target;
            if (fm > 0.0) == (fa > 0.0) {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
        }
        Ok(0.5 * (a + b))
    };

    let mut runs: Vec<(Band, usize)> = Vec::new();
    let mut j = 0;
    while j < m {
        if vals[j].abs() > 2.0 && vals[j + 1].abs() <= 2.0 {
            let left = edge(lam[j], lam[j + 1], vals[j])?;
            let mut theta_prev = if vals[j] > 0.0 { 0.0 } else { std::f64::consts::PI };
            let mut turn = 0.0;
            let mut k = j + 1;
            while k <= m && vals[k].abs() <= 2.0 {
                let th = (vals[k] / 2.0).acos();
                turn += (th - theta_prev).abs();
                theta_prev = th;
                k += 1;
            }
            let right = if k > m {
                f64::INFINITY
            } else {
                let r = edge(lam[k], lam[k - 1], vals[k])?;
                let th_end = if vals[k] > 0.0 { 0.0 } else { std::f64::consts::PI };
                turn += (th_end - theta_prev).abs();
                r
            };
            let count = ((turn / std::f64::consts::PI).round() as usize).max(1);
            runs.push((Band::new(left, right), count));
            j = k;
        } else {
            j += 1;
        }
    }
    let found: usize = runs.iter().map(|r| r.1).sum();
    let raw = BandSet::new(runs.iter().map(|r| r.0));
    let bands = match side {
        Side::Plus => raw,
        Side::Minus => raw.reflect(),
    };
    Ok(PeriodicBands {
        side,
        bands,
        runs,
        search: Band::new(lo, hi),
        k_max,
        found,
        partial: found < k_max,
    })
}
