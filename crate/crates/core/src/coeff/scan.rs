use serde::{Deserialize, Serialize};

use super::{CoefficientField, EndpointLimits, EndpointMeta, Side, SideLimits};
use crate::error::{Error, Result};
use crate::extnum::ext_f64;
use crate::expr::CoeffExpr;

/// Where coefficients are sampled for the hypothesis and limit checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPlan {
    /// Uniform scan on `[-core_half_width, core_half_width]`.
    pub core_half_width: f64,
    pub core_step: f64,
    /// Geometric tail grid `tail_start * tail_ratio^k`, `k < tail_samples`.
    pub tail_start: f64,
    pub tail_ratio: f64,
    pub tail_samples: usize,
    /// Number of trailing tail samples in the Cauchy test.
    pub cauchy_window: usize,
    pub cauchy_tol: f64,
    /// Smallest admissible `|r|` relative to the largest sampled `|r|`.
    pub r_min_rel: f64,
}

impl Default for ScanPlan {
    fn default() -> Self {
        ScanPlan {
            core_half_width: 64.0,
            core_step: 1.0 / 64.0,
            tail_start: 10.0,
            tail_ratio: 1.25,
            tail_samples: 60,
            cauchy_window: 5,
            cauchy_tol: 1e-6,
            r_min_rel: 1e-12,
        }
    }
}

/// Tail sample points approaching the endpoint on `side`, ordered outward.
pub fn tail_grid(a: f64, b: f64, side: Side, plan: &ScanPlan) -> Vec<f64> {
    let n = plan.tail_samples;
    let end = match side {
        Side::Minus => a,
        Side::Plus => b,
    };
    if end.is_infinite() {
        let s = side.sign();
        (0..n)
            .map(|k| s * plan.tail_start * plan.tail_ratio.powi(k as i32))
            .collect()
    } else {
        // Finite endpoint: approach it geometrically from inside.
        let d0 = if a.is_finite() && b.is_finite() {
            0.25 * (b - a)
        } else {
            1.0
        };
        (0..n)
            .map(|k| end - side.sign() * d0 / plan.tail_ratio.powi(k as i32))
            .collect()
    }
}

fn core_grid(a: f64, b: f64, plan: &ScanPlan) -> Vec<f64> {
    let k = (plan.core_half_width / plan.core_step).floor() as i64;
    (-k..=k)
        .map(|i| i as f64 * plan.core_step)
        .filter(|&x| x > a && x < b)
        .collect()
}

/// All scan points in increasing order.
fn scan_points(a: f64, b: f64, plan: &ScanPlan) -> Vec<f64> {
    let mut pts = core_grid(a, b, plan);
    for side in [Side::Minus, Side::Plus] {
        pts.extend(
            tail_grid(a, b, side, plan)
                .into_iter()
                .filter(|&x| x.abs() > plan.core_half_width || a.is_finite() || b.is_finite()),
        );
    }
    pts.retain(|&x| x > a && x < b);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: f64,
    #[serde(with = "ext_f64")]
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Assumed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub status: CheckStatus,
    pub detail: String,
    pub witnesses: Vec<Witness>,
}

impl HypothesisCheck {
    fn pass(detail: impl Into<String>) -> Self {
        HypothesisCheck {
            status: CheckStatus::Pass,
            detail: detail.into(),
            witnesses: Vec::new(),
        }
    }

    fn fail(detail: impl Into<String>, witnesses: Vec<Witness>) -> Self {
        debug_assert!(!witnesses.is_empty());
        HypothesisCheck {
            status: CheckStatus::Fail,
            detail: detail.into(),
            witnesses,
        }
    }

    pub fn passed(&self) -> bool {
        self.status != CheckStatus::Fail
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    /// Sign window: r negative near a, positive near b.
    pub h1: HypothesisCheck,
    /// Limit-point proxy.
    pub h2: HypothesisCheck,
    /// Boundedness of q/r near both endpoints.
    pub h3: HypothesisCheck,
    /// p > 0 and |r| bounded away from zero at every sample.
    pub validity: HypothesisCheck,
    pub window: Option<(f64, f64)>,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.h1.passed() && self.h2.passed() && self.h3.passed() && self.validity.passed()
    }
}

fn sgn(v: f64) -> i8 {
    if v < 0.0 {
        -1
    } else {
        1
    }
}

struct SignFailure {
    msg: String,
    witnesses: Vec<Witness>,
}

/// Refine a sign change between `lo` and `hi` by bisection; returns the
/// leftmost point found with the sign of `hi`.
fn refine_crossing(r: &CoeffExpr, mut lo: f64, mut hi: f64) -> Result<f64> {
    let s_hi = sgn(r.eval(hi)?);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-13 * hi.abs().max(1.0) {
            break;
        }
        if sgn(r.eval(mid)?) == s_hi {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn scan_sign(r: &CoeffExpr, a: f64, b: f64, plan: &ScanPlan) -> Result<std::result::Result<(f64, f64), SignFailure>> {
    let pts = scan_points(a, b, plan);
    let vals: Vec<f64> = pts.iter().map(|&x| r.eval(x)).collect::<Result<_>>()?;
    let far = |x: f64| {
        if a.is_finite() || b.is_finite() {
            false
        } else {
            x.abs() > plan.core_half_width
        }
    };

    // Repeated sign changes in the far tails leave no admissible window.
    for side in [Side::Minus, Side::Plus] {
        let tail: Vec<usize> = (0..pts.len())
            .filter(|&i| far(pts[i]) && (pts[i] < 0.0) == (side == Side::Minus))
            .collect();
        let mut changes = Vec::new();
        for w in tail.windows(2) {
            if sgn(vals[w[0]]) != sgn(vals[w[1]]) {
                changes.push(Witness {
                    x: pts[w[1]],
                    value: vals[w[1]],
                });
            }
        }
        if changes.len() >= 2 {
            return Ok(Err(SignFailure {
                msg: "unbounded sign changes: r keeps changing sign far out".into(),
                witnesses: changes,
            }));
        }
    }

    let edge = 8.min(pts.len());
    let wrong_a: Vec<Witness> = (0..edge)
        .filter(|&i| vals[i] >= 0.0)
        .map(|i| Witness { x: pts[i], value: vals[i] })
        .collect();
    if !wrong_a.is_empty() {
        return Ok(Err(SignFailure {
            msg: "r is not negative near a".into(),
            witnesses: wrong_a,
        }));
    }
    let wrong_b: Vec<Witness> = (pts.len() - edge..pts.len())
        .filter(|&i| vals[i] < 0.0)
        .map(|i| Witness { x: pts[i], value: vals[i] })
        .collect();
    if !wrong_b.is_empty() {
        return Ok(Err(SignFailure {
            msg: "r is not positive near b".into(),
            witnesses: wrong_b,
        }));
    }

    let first = (1..pts.len()).find(|&i| sgn(vals[i - 1]) != sgn(vals[i]));
    let last = (1..pts.len()).rev().find(|&i| sgn(vals[i - 1]) != sgn(vals[i]));
    match (first, last) {
        (Some(i), Some(j)) => {
            let alpha = refine_crossing(r, pts[i - 1], pts[i])?;
            let beta = refine_crossing(r, pts[j - 1], pts[j])?;
            Ok(Ok((alpha, beta)))
        }
        // Unreachable after the endpoint checks, kept for safety.
        _ => Ok(Err(SignFailure {
            msg: "r has no sign change".into(),
            witnesses: vec![Witness { x: pts[0], value: vals[0] }],
        })),
    }
}

/// Smallest window `[alpha, beta]` containing every sign change of `r`
/// detected on the scan.
pub fn detect_sign_window(r: &CoeffExpr, a: f64, b: f64, plan: &ScanPlan) -> Result<(f64, f64)> {
    scan_sign(r, a, b, plan)?.map_err(|f| {
        let w = f.witnesses.first().map(|w| w.x).unwrap_or(f64::NAN);
        Error::Hypothesis(format!("{} (first witness x = {w})", f.msg))
    })
}

/// Limit estimates at one endpoint; `None` means the Cauchy test failed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SideEstimate {
    pub r: Option<f64>,
    pub p: Option<f64>,
    pub q: Option<f64>,
}

impl SideEstimate {
    pub fn limits(&self) -> Option<SideLimits> {
        Some(SideLimits {
            r: self.r?,
            p: self.p?,
            q: self.q?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitEstimate {
    pub minus: SideEstimate,
    pub plus: SideEstimate,
}

impl LimitEstimate {
    /// All six limits, when certified and sign-consistent.
    pub fn limits(&self) -> Option<EndpointLimits> {
        let lim = EndpointLimits::from_sides(self.minus.limits()?, self.plus.limits()?);
        lim.validate().ok().map(|_| lim)
    }
}

/// Cauchy test on the trailing window. Certified values below the
/// tolerance are reported as exactly zero.
pub(crate) fn cauchy_limit(vals: &[f64], plan: &ScanPlan) -> Option<f64> {
    let w = plan.cauchy_window.min(vals.len());
    if w == 0 {
        return None;
    }
    let tail = &vals[vals.len() - w..];
    let last = *tail.last()?;
    let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi - lo <= plan.cauchy_tol * last.abs().max(1.0)) {
        return None;
    }
    Some(if last.abs() <= plan.cauchy_tol { 0.0 } else { last })
}

pub(crate) fn sample<F: Fn(f64) -> Result<f64>>(xs: &[f64], f: F) -> Result<Vec<f64>> {
    xs.iter().map(|&x| f(x)).collect()
}

pub fn estimate_endpoint_limits(field: &CoefficientField, plan: &ScanPlan) -> Result<LimitEstimate> {
    let side = |s: Side| -> Result<SideEstimate> {
        let xs = tail_grid(field.a, field.b, s, plan);
        Ok(SideEstimate {
            r: cauchy_limit(&sample(&xs, |x| field.r(x))?, plan),
            p: cauchy_limit(&sample(&xs, |x| field.p(x))?, plan),
            q: cauchy_limit(&sample(&xs, |x| field.q(x))?, plan),
        })
    };
    Ok(LimitEstimate {
        minus: side(Side::Minus)?,
        plus: side(Side::Plus)?,
    })
}

fn check_window(field: &CoefficientField, alpha: f64, beta: f64, plan: &ScanPlan) -> Result<Vec<Witness>> {
    let mut bad = Vec::new();
    for x in scan_points(field.a, field.b, plan) {
        let v = field.r(x)?;
        if (x < alpha && v >= 0.0) || (x > beta && v < 0.0) {
            bad.push(Witness { x, value: v });
        }
    }
    Ok(bad)
}

/// Sampled checks of the standing hypotheses.
pub fn check_hypotheses(field: &CoefficientField, plan: &ScanPlan) -> Result<HypothesisReport> {
    let (h1, window) = match field.sign_window {
        Some((alpha, beta)) => {
            let bad = check_window(field, alpha, beta, plan)?;
            if bad.is_empty() {
                (
                    HypothesisCheck::pass(format!("declared window [{alpha}, {beta}] confirmed")),
                    Some((alpha, beta)),
                )
            } else {
                (
                    HypothesisCheck::fail("r has the wrong sign outside the declared window", bad),
                    None,
                )
            }
        }
        None => match scan_sign(&field.r, field.a, field.b, plan)? {
            Ok((alpha, beta)) => (
                HypothesisCheck::pass(format!("detected window [{alpha}, {beta}]")),
                Some((alpha, beta)),
            ),
            Err(f) => (HypothesisCheck::fail(f.msg, f.witnesses), None),
        },
    };

    let pts = scan_points(field.a, field.b, plan);
    let rs = sample(&pts, |x| field.r(x))?;
    let ps = sample(&pts, |x| field.p(x))?;
    let r_max = rs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut bad = Vec::new();
    for i in 0..pts.len() {
        if ps[i] <= 0.0 {
            bad.push(Witness { x: pts[i], value: ps[i] });
        }
        if rs[i].abs() < plan.r_min_rel * r_max {
            bad.push(Witness { x: pts[i], value: rs[i] });
        }
    }
    let validity = if bad.is_empty() {
        HypothesisCheck::pass("p > 0 and |r| >= r_min at every sample")
    } else {
        HypothesisCheck::fail("p <= 0 or r vanishes at sampled points", bad)
    };

    // q/r must stay bounded near each endpoint.
    let mut growth = Vec::new();
    for s in [Side::Minus, Side::Plus] {
        let xs = tail_grid(field.a, field.b, s, plan);
        let vals: Vec<f64> = sample(&xs, |x| Ok(field.q(x)? / field.r(x)?))?;
        let third = (vals.len() / 3).max(1);
        let early = vals[..third].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let (i_max, late) = vals[vals.len() - third..]
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |(im, m), (i, v)| if v.abs() > m { (i, v.abs()) } else { (im, m) });
        if !late.is_finite() || late > 1e3 * early.max(1.0) {
            let i = vals.len() - third + i_max;
            growth.push(Witness { x: xs[i], value: vals[i] });
        }
    }
    let h3 = if growth.is_empty() {
        HypothesisCheck::pass("q/r bounded on the tail grids")
    } else {
        HypothesisCheck::fail("q/r grows without bound on the tail grid", growth)
    };

    let est = estimate_endpoint_limits(field, plan)?;
    let certified = |s: Side| match field.meta(s) {
        EndpointMeta::Limits(_) | EndpointMeta::Period { .. } => true,
        EndpointMeta::Unknown => {
            let e = if s == Side::Minus { est.minus } else { est.plus };
            e.limits().is_some_and(|l| l.p > 0.0 && l.r * s.sign() > 0.0)
        }
    };
    let h2 = if certified(Side::Minus) && certified(Side::Plus) {
        HypothesisCheck::pass("limit point at both ends: limits or periodic regime")
    } else {
        HypothesisCheck {
            status: CheckStatus::Assumed,
            detail: "no limits or periods at some endpoint; limit point case assumed".into(),
            witnesses: Vec::new(),
        }
    };

    Ok(HypothesisReport {
        h1,
        h2,
        h3,
        validity,
        window,
    })
}
