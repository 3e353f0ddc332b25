use serde::{Deserialize, Serialize};

use super::scan::{cauchy_limit, sample, tail_grid, ScanPlan};
use super::{CoefficientField, Side};
use crate::error::{Error, Result};
use crate::extnum::ext_opt;
use crate::quadrature::line_integral;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComparisonMode {
    /// r1/r0 -> 1, p1/p0 -> 1 and (q1 - q0)/r0 -> 0 at both ends.
    Limits,
    /// |r1 - r0| + |1/p1 - 1/p0| + |q1 - q0| integrable.
    L1,
    /// Same integrand times |t| integrable.
    FirstMoment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonItem {
    pub side: Side,
    pub quantity: String,
    #[serde(with = "ext_opt")]
    pub limit: Option<f64>,
    pub target: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub mode: ComparisonMode,
    pub pass: bool,
    /// Quadrature value for the integral modes.
    #[serde(with = "ext_opt")]
    pub value: Option<f64>,
    pub items: Vec<ComparisonItem>,
    pub reason: Option<String>,
}

/// Check that `c1` is an admissible perturbation of `c0` in the given sense.
pub fn check_comparison_conditions(
    c0: &CoefficientField,
    c1: &CoefficientField,
    mode: ComparisonMode,
    plan: &ScanPlan,
) -> Result<ComparisonReport> {
    if c0.a != c1.a || c0.b != c1.b {
        return Err(Error::validation("perturbed", "both fields must share (a, b)"));
    }
    match mode {
        ComparisonMode::Limits => limits_mode(c0, c1, plan),
        ComparisonMode::L1 | ComparisonMode::FirstMoment => integral_mode(c0, c1, mode),
    }
}

fn limits_mode(c0: &CoefficientField, c1: &CoefficientField, plan: &ScanPlan) -> Result<ComparisonReport> {
    let mut items = Vec::new();
    for side in [Side::Minus, Side::Plus] {
        let xs = tail_grid(c0.a, c0.b, side, plan);
        let quantities: [(&str, f64, Vec<f64>); 3] = [
            ("r1/r0", 1.0, sample(&xs, |x| Ok(c1.r(x)? / c0.r(x)?))?),
            ("p1/p0", 1.0, sample(&xs, |x| Ok(c1.p(x)? / c0.p(x)?))?),
            ("(q1-q0)/r0", 0.0, sample(&xs, |x| Ok((c1.q(x)? - c0.q(x)?) / c0.r(x)?))?),
        ];
        for (name, target, vals) in quantities {
            let limit = cauchy_limit(&vals, plan);
            let pass = limit.is_some_and(|l| (l - target).abs() <= plan.cauchy_tol * target.abs().max(1.0));
            items.push(ComparisonItem {
                side,
                quantity: name.into(),
                limit,
                target,
                pass,
            });
        }
    }
    let pass = items.iter().all(|i| i.pass);
    let reason = items
        .iter()
        .find(|i| !i.pass)
        .map(|i| format!("{} at the {:?} end does not tend to {}", i.quantity, i.side, i.target));
    Ok(ComparisonReport {
        mode: ComparisonMode::Limits,
        pass,
        value: None,
        items,
        reason,
    })
}

fn integral_mode(c0: &CoefficientField, c1: &CoefficientField, mode: ComparisonMode) -> Result<ComparisonReport> {
    if c0.a.is_finite() || c0.b.is_finite() {
        return Ok(ComparisonReport {
            mode,
            pass: false,
            value: None,
            items: Vec::new(),
            reason: Some("integral conditions are only evaluated on the whole line".into()),
        });
    }
    let moment = mode == ComparisonMode::FirstMoment;
    let integrand = |t: f64| -> Result<f64> {
        let d = (c1.r(t)? - c0.r(t)?).abs()
            + (1.0 / c1.p(t)? - 1.0 / c0.p(t)?).abs()
            + (c1.q(t)? - c0.q(t)?).abs();
        Ok(if moment { d * t.abs() } else { d })
    };
    let res = line_integral(&integrand, 1.0, 64.0, 1e-8, 1e6)?;
    Ok(ComparisonReport {
        mode,
        pass: res.converged,
        value: Some(res.value),
        items: Vec::new(),
        reason: res.reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(q: &str) -> CoefficientField {
        CoefficientField::parse("sgn(x)", "1", q).unwrap()
    }

    const MODES: [ComparisonMode; 3] = [ComparisonMode::Limits, ComparisonMode::L1, ComparisonMode::FirstMoment];

    #[test]
    fn identity_passes_everything() {
        let c = field("-1/(1+abs(x))");
        for mode in MODES {
            let rep = check_comparison_conditions(&c, &c, mode, &ScanPlan::default()).unwrap();
            assert!(rep.pass, "{mode:?}");
            if mode != ComparisonMode::Limits {
                assert_eq!(rep.value, Some(0.0));
            }
        }
    }

    #[test]
    fn gaussian_bump_closed_forms() {
        let c0 = field("1");
        let c1 = field("1 + exp(-x^2)");
        let plan = ScanPlan::default();
        assert!(check_comparison_conditions(&c0, &c1, ComparisonMode::Limits, &plan).unwrap().pass);
        let l1 = check_comparison_conditions(&c0, &c1, ComparisonMode::L1, &plan).unwrap();
        assert!(l1.pass);
        // The bump is added to 1, so each sample carries one rounding of q1.
        assert!((l1.value.unwrap() - std::f64::consts::PI.sqrt()).abs() < 1e-8);
        let fm = check_comparison_conditions(&c0, &c1, ComparisonMode::FirstMoment, &plan).unwrap();
        assert!(fm.pass);
        assert!((fm.value.unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn coulomb_tail_fails_l1_only() {
        let c0 = field("1");
        let c1 = field("1 + 1/(1+abs(x))");
        let plan = ScanPlan::default();
        assert!(check_comparison_conditions(&c0, &c1, ComparisonMode::Limits, &plan).unwrap().pass);
        let l1 = check_comparison_conditions(&c0, &c1, ComparisonMode::L1, &plan).unwrap();
        assert!(!l1.pass);
        assert_eq!(l1.reason.as_deref(), Some("not integrable at this scale"));
    }

    #[test]
    fn weight_ratio_mismatch_fails_limits() {
        let c0 = field("0");
        let c1 = CoefficientField::parse("2*sgn(x)", "1", "0").unwrap();
        let rep = check_comparison_conditions(&c0, &c1, ComparisonMode::Limits, &ScanPlan::default()).unwrap();
        assert!(!rep.pass);
        assert!(rep.reason.unwrap().contains("r1/r0"));
    }
}
