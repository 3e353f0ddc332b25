//! Iterated logarithms and Kneser-type accumulation verdicts at the edges
//! of the essential-spectrum gap.
//!
//! ```text
//! log_0 x = x,  log_n x = log(log_{n-1} x),  e_{-1} = -inf,  e_n = exp(e_{n-1})
//! L_n = prod_{j<=n} log_j,  P_n = sum_{j<n} 1/L_j,  Q_n = -(1/4) sum_{j<n} 1/L_j^2
//! Delta = L_n^2 (q0/p - Q_n - q r0/(p r) + (P_n^2/4)(1 - p/p0))
//! ```
//!
//! with `(r, p, q)` the limits at the chosen end. Eigenvalues accumulate at
//! the gap edge when `limsup Delta < -1/4` and do not when `liminf Delta >
//! -1/4`.

use serde::{Deserialize, Serialize};

use crate::coeff::{CoefficientField, EndpointLimits, Side};
use crate::error::{Error, Result};
use crate::extnum::ext_f64;

/// `e_n`; `e_{-1} = -inf`.
pub fn iter_exp_threshold(n: i32) -> f64 {
    let mut e = f64::NEG_INFINITY;
    for _ in -1..n {
        e = e.exp();
    }
    e
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterLog {
    pub l: f64,
    pub p: f64,
    pub q: f64,
}

/// `(L_n, P_n, Q_n)` at `x`; negative `x` uses `log |x|`, so the values
/// entering `Delta` only depend on `|x|`.
pub fn iterated_log_family(n: u32, x: f64) -> Result<IterLog> {
    let ax = x.abs();
    let en = iter_exp_threshold(n as i32);
    if !(ax > en) {
        return Err(Error::domain(x, format!("iterated logarithm of order {n} needs |x| > e_{n} = {en}")));
    }
    let mut log_j = ax;
    let mut l = ax;
    let mut p = 0.0;
    let mut q = 0.0;
    for _ in 0..n {
        p += 1.0 / l;
        q -= 0.25 / (l * l);
        log_j = log_j.ln();
        l *= log_j;
    }
    Ok(IterLog { l, p, q })
}

fn side_limits(lim: &EndpointLimits, side: Side) -> (f64, f64, f64) {
    let s = lim.side(side);
    (s.r, s.p, s.q)
}

/// `Delta_{0,+-}` at `x`; `x` must lie on the side's half-line.
pub fn delta_eval(field: &CoefficientField, lim: &EndpointLimits, n: u32, side: Side, x: f64) -> Result<f64> {
    Ok(delta_with_noise(field, lim, n, side, x)?.0)
}

/// `Delta` together with an estimate of its rounding noise.
fn delta_with_noise(field: &CoefficientField, lim: &EndpointLimits, n: u32, side: Side, x: f64) -> Result<(f64, f64)> {
    if x * side.sign() <= 0.0 {
        return Err(Error::domain(x, format!("sample lies on the wrong half-line for side {side:?}")));
    }
    let il = iterated_log_family(n, x)?;
    let (r_inf, p_inf, q_inf) = side_limits(lim, side);
    let (r0, p0, q0) = (field.r(x)?, field.p(x)?, field.q(x)?);
    let a = q0 / p_inf;
    let b = q_inf / (p_inf * r_inf) * r0;
    let c = il.p * il.p / 4.0 * (1.0 - p_inf / p0);
    let l2 = il.l * il.l;
    let value = l2 * (a - il.q - b + c);
    let scale = a.abs() + il.q.abs() + b.abs() + il.p * il.p / 4.0 * (1.0 + (p_inf / p0).abs());
    Ok((value, 8.0 * f64::EPSILON * scale * l2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailPlan {
    pub samples: usize,
    pub ratio: f64,
    pub window: usize,
    /// Samples whose rounding noise exceeds this are dropped.
    pub noise_cap: f64,
    /// Largest change of the window statistic per octave still counted as
    /// settled.
    pub drift_tol: f64,
}

impl Default for TailPlan {
    fn default() -> Self {
        TailPlan {
            samples: 80,
            ratio: 1.25,
            window: 20,
            noise_cap: 1e-4,
            drift_tol: 1e-3,
        }
    }
}

/// `max(e_n * 1.1, 10) * ratio^k` for `k < samples`, on the side's
/// half-line.
pub fn tail_points(n: u32, side: Side, plan: &TailPlan) -> Vec<f64> {
    let start = (iter_exp_threshold(n as i32) * 1.1).max(10.0);
    (0..plan.samples)
        .map(|k| side.sign() * start * plan.ratio.powi(k as i32))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Accumulate,
    NoAccumulate,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KneserVerdict {
    pub side: Side,
    pub order: u32,
    /// Gap edge the verdict refers to.
    pub edge: f64,
    /// Window maximum, the limsup estimate.
    #[serde(with = "ext_f64")]
    pub limsup: f64,
    /// Window minimum, the liminf estimate.
    #[serde(with = "ext_f64")]
    pub liminf: f64,
    pub verdict: Verdict,
    pub margin: f64,
    /// Samples kept after the noise filter.
    pub samples_used: usize,
    /// Last point of the window.
    #[serde(with = "ext_f64")]
    pub x_last: f64,
    /// Largest per-octave change of the window max or min.
    #[serde(with = "ext_f64")]
    pub drift: f64,
    pub settled: bool,
    pub reason: String,
}

/// Samples of `f` on the tail grid with noise below the cap.
fn tail_samples<F>(xs: &[f64], plan: &TailPlan, f: F) -> Result<Vec<(f64, f64)>>
where
    F: Fn(f64) -> Result<(f64, f64)>,
{
    let mut out = Vec::new();
    for &x in xs {
        let (v, noise) = f(x)?;
        if noise > plan.noise_cap {
            break;
        }
        if !v.is_nan() {
            out.push((x, v));
        }
    }
    Ok(out)
}

/// Kneser verdict at one gap edge from the window max and min of `Delta`
/// over the last `window` kept samples.
pub fn kneser_verdict(
    field: &CoefficientField,
    lim: &EndpointLimits,
    n: u32,
    side: Side,
    plan: &TailPlan,
    margin: f64,
) -> Result<KneserVerdict> {
    lim.validate()?;
    if !lim.has_gap() {
        return Err(Error::Hypothesis(format!(
            "no gap between {} and {}; Kneser verdicts need a gap",
            lim.minus_edge(),
            lim.plus_edge()
        )));
    }
    if !(margin >= 0.0 && margin.is_finite()) {
        return Err(Error::validation("margin", "margin must be a nonnegative number"));
    }
    let edge = match side {
        Side::Plus => lim.plus_edge(),
        Side::Minus => lim.minus_edge(),
    };
    let xs = tail_points(n, side, plan);
    let kept = tail_samples(&xs, plan, |x| delta_with_noise(field, lim, n, side, x))?;
    let threshold = -0.25;
    let mut out = KneserVerdict {
        side,
        order: n,
        edge,
        limsup: f64::NAN,
        liminf: f64::NAN,
        verdict: Verdict::Inconclusive,
        margin,
        samples_used: kept.len(),
        x_last: kept.last().map(|s| s.0).unwrap_or(f64::NAN),
        drift: f64::NAN,
        settled: false,
        reason: String::new(),
    };
    if kept.len() < plan.window {
        out.reason = format!(
            "only {} samples below the rounding-noise cap, need {}",
            kept.len(),
            plan.window
        );
        return Ok(out);
    }
    let win = &kept[kept.len() - plan.window..];
    let half = plan.window / 2;
    let stat = |s: &[(f64, f64)]| {
        let mx = s.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
        let mn = s.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
        (mx, mn)
    };
    let (mx, mn) = stat(win);
    let (mx0, mn0) = stat(&win[..half]);
    let (mx1, mn1) = stat(&win[half..]);
    let octaves = (win[half].0 / win[0].0).abs().log2().max(f64::MIN_POSITIVE);
    let drift = ((mx1 - mx0).abs()).max((mn1 - mn0).abs()) / octaves;
    // A statistic moving away from the threshold beyond the margin is a
    // divergent tail, settled for the purpose of the verdict.
    let diverging = (mx1 < mx0 && mx1 < threshold - margin) || (mn1 > mn0 && mn1 > threshold + margin);
    let settled = drift <= plan.drift_tol || diverging;
    out.limsup = mx;
    out.liminf = mn;
    out.drift = drift;
    out.settled = settled;
    out.verdict = if !settled {
        out.reason = format!("window statistic still drifting ({drift:.3e} per octave)");
        Verdict::Inconclusive
    } else if mx < threshold - margin {
        out.reason = "limsup below -1/4 - margin".into();
        Verdict::Accumulate
    } else if mn > threshold + margin {
        out.reason = "liminf above -1/4 + margin".into();
        Verdict::NoAccumulate
    } else {
        out.reason = "statistic inside the margin band around -1/4".into();
        Verdict::Inconclusive
    };
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferSide {
    pub side: Side,
    /// Largest value of the transfer quantity over the final window.
    #[serde(with = "ext_f64")]
    pub window_max: f64,
    /// Whether the later half of the window stays at or below the earlier.
    pub nonincreasing: bool,
    /// `sup |p1 - p0|` over the window, for order zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_gap: Option<f64>,
    pub samples_used: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferReport {
    pub order: u32,
    pub tol: f64,
    pub sides: Vec<TransferSide>,
    pub pass: bool,
}

/// `L_n^2 (|r1 - r0| + P_n^2 |1/p1 - 1/p0| + |q1 - q0|) -> 0` at both ends,
/// read off the tail grid: pass when the final window stays below `tol` and
/// does not grow. Order zero uses `x^2 (|r1 - r0| + |q1 - q0|)` and needs
/// `|p1 - p0| -> 0` as well.
pub fn perturbation_transfer_check(
    c0: &CoefficientField,
    c1: &CoefficientField,
    n: u32,
    plan: &TailPlan,
    tol: f64,
) -> Result<TransferReport> {
    let mut sides = Vec::new();
    for side in [Side::Minus, Side::Plus] {
        let xs = tail_points(n, side, plan);
        let eval = |x: f64| -> Result<(f64, f64)> {
            let il = iterated_log_family(n, x)?;
            let (r0, r1) = (c0.r(x)?, c1.r(x)?);
            let (p0, p1) = (c0.p(x)?, c1.p(x)?);
            let (q0, q1) = (c0.q(x)?, c1.q(x)?);
            let l2 = il.l * il.l;
            let v = l2 * ((r1 - r0).abs() + il.p * il.p * (1.0 / p1 - 1.0 / p0).abs() + (q1 - q0).abs());
            let scale = r0.abs() + r1.abs() + il.p * il.p * (1.0 / p0.abs() + 1.0 / p1.abs()) + q0.abs() + q1.abs();
            Ok((v, 4.0 * f64::EPSILON * scale * l2))
        };
        let noise_plan = TailPlan {
            noise_cap: tol * 1e-2,
            ..*plan
        };
        let kept = tail_samples(&xs, &noise_plan, eval)?;
        let mut s = TransferSide {
            side,
            window_max: f64::NAN,
            nonincreasing: false,
            p_gap: None,
            samples_used: kept.len(),
            pass: false,
        };
        if kept.len() >= plan.window {
            let win = &kept[kept.len() - plan.window..];
            let half = plan.window / 2;
            let max = |w: &[(f64, f64)]| w.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
            s.window_max = max(win);
            s.nonincreasing = max(&win[half..]) <= max(&win[..half]);
            s.pass = s.window_max < tol && s.nonincreasing;
            if n == 0 {
                let mut gap: f64 = 0.0;
                for &(x, _) in win {
                    gap = gap.max((c1.p(x)? - c0.p(x)?).abs());
                }
                s.p_gap = Some(gap);
                s.pass &= gap < tol;
            }
        }
        sides.push(s);
    }
    let pass = sides.iter().all(|s| s.pass);
    Ok(TransferReport {
        order: n,
        tol,
        sides,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lim_unit() -> EndpointLimits {
        EndpointLimits {
            r_minus: -1.0,
            r_plus: 1.0,
            p_minus: 1.0,
            p_plus: 1.0,
            q_minus: 1.0,
            q_plus: 1.0,
        }
    }

    #[test]
    fn iterated_log_examples() {
        let v = iterated_log_family(0, 3.0).unwrap();
        assert_eq!((v.l, v.p, v.q), (3.0, 0.0, 0.0));
        let e2 = std::f64::consts::E.powi(2);
        let v = iterated_log_family(1, e2).unwrap();
        assert!((v.l - 2.0 * e2).abs() < 1e-13 * e2);
        assert!((v.p - 1.0 / e2).abs() < 1e-16);
        assert!((v.q + 0.25 / (e2 * e2)).abs() < 1e-18);
        assert!(iterated_log_family(1, 1.0).is_err());
        assert!(iterated_log_family(2, std::f64::consts::E).is_err());
        assert!(iterated_log_family(1, 1.0 + 1e-9).is_ok());
        assert_eq!(iterated_log_family(2, -100.0).unwrap(), iterated_log_family(2, 100.0).unwrap());
    }

    #[test]
    fn thresholds() {
        assert_eq!(iter_exp_threshold(-1), f64::NEG_INFINITY);
        assert_eq!(iter_exp_threshold(0), 0.0);
        assert_eq!(iter_exp_threshold(1), 1.0);
        assert_eq!(iter_exp_threshold(2), std::f64::consts::E);
    }

    #[test]
    fn order_zero_reduction() {
        let f = CoefficientField::parse("sgn(x)", "1 + exp(-abs(x))", "1 - 2/(1+x^2)").unwrap();
        let lim = lim_unit();
        for &x in &[11.0, 37.5, 120.0, -15.0, -300.0] {
            let side = if x > 0.0 { Side::Plus } else { Side::Minus };
            let (rs, ps, qs) = side_limits(&lim, side);
            let want = x * x * (f.q(x).unwrap() - qs / rs * f.r(x).unwrap()) / ps;
            let got = delta_eval(&f, &lim, 0, side, x).unwrap();
            assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "{x}");
        }
    }

    #[test]
    fn coulomb_delta_decreases() {
        let f = CoefficientField::parse("sgn(x)", "1", "-1/(1+abs(x))").unwrap();
        let lim = EndpointLimits {
            q_minus: 0.0,
            q_plus: 0.0,
            ..lim_unit()
        };
        let xs = tail_points(0, Side::Plus, &TailPlan::default());
        let mut prev = f64::INFINITY;
        for &x in xs.iter().take(40) {
            let d = delta_eval(&f, &lim, 0, Side::Plus, x).unwrap();
            assert!((d + x * x / (1.0 + x)).abs() < 1e-9 * d.abs());
            assert!(d < prev);
            prev = d;
        }
    }

    fn family(c: f64) -> CoefficientField {
        CoefficientField::parse("sgn(x)", "1", &format!("1 + ({c:?})/(1+x^2)")).unwrap()
    }

    #[test]
    fn trichotomy() {
        let plan = TailPlan::default();
        let lim = lim_unit();
        let v = |c: f64, side| kneser_verdict(&family(c), &lim, 0, side, &plan, 0.02).unwrap().verdict;
        for side in [Side::Plus, Side::Minus] {
            assert_eq!(v(-1.0, side), Verdict::Accumulate);
            assert_eq!(v(0.0, side), Verdict::NoAccumulate);
            assert_eq!(v(-0.25, side), Verdict::Inconclusive);
        }
    }

    #[test]
    fn gap_required() {
        let f = family(-1.0);
        let lim = EndpointLimits {
            q_minus: 0.0,
            q_plus: 0.0,
            ..lim_unit()
        };
        assert!(kneser_verdict(&f, &lim, 0, Side::Plus, &TailPlan::default(), 0.02).is_err());
    }

    #[test]
    fn transfer_examples() {
        let plan = TailPlan::default();
        let c0 = family(-1.0);
        let same = perturbation_transfer_check(&c0, &c0, 1, &plan, 1e-3).unwrap();
        assert!(same.pass);
        let exp = CoefficientField::parse("sgn(x)", "1", "1 + (-1.0)/(1+x^2) + exp(-abs(x))").unwrap();
        assert!(perturbation_transfer_check(&c0, &exp, 1, &plan, 1e-3).unwrap().pass);
        let slow = CoefficientField::parse("sgn(x)", "1", "1 + (-1.0)/(1+x^2) + 1/(abs(x)*log(abs(x))^2)").unwrap();
        assert!(!perturbation_transfer_check(&c0, &slow, 1, &plan, 1e-3).unwrap().pass);
    }
}
