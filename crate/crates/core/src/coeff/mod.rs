//! Coefficient triples `(r, p, q)` with endpoint metadata, and the sampled
//! checks run on them before any discretization.

mod compare;
mod scan;

pub use compare::{check_comparison_conditions, ComparisonItem, ComparisonMode, ComparisonReport};
pub use scan::{
    check_hypotheses, detect_sign_window, estimate_endpoint_limits, tail_grid, CheckStatus,
    HypothesisCheck, HypothesisReport, LimitEstimate, ScanPlan, SideEstimate, Witness,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::CoeffExpr;

/// Limits of the coefficients at the two singular endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndpointLimits {
    pub r_minus: f64,
    pub r_plus: f64,
    pub p_minus: f64,
    pub p_plus: f64,
    pub q_minus: f64,
    pub q_plus: f64,
}

impl EndpointLimits {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.r_minus,
            self.r_plus,
            self.p_minus,
            self.p_plus,
            self.q_minus,
            self.q_plus,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("limits", "limits must be finite"));
        }
        if !(self.r_minus < 0.0 && self.r_plus > 0.0) {
            return Err(Error::validation("limits", "need r_minus < 0 < r_plus"));
        }
        if !(self.p_minus > 0.0 && self.p_plus > 0.0) {
            return Err(Error::validation("limits", "need p_minus > 0 and p_plus > 0"));
        }
        Ok(())
    }

    pub fn side(&self, side: Side) -> SideLimits {
        match side {
            Side::Minus => SideLimits {
                r: self.r_minus,
                p: self.p_minus,
                q: self.q_minus,
            },
            Side::Plus => SideLimits {
                r: self.r_plus,
                p: self.p_plus,
                q: self.q_plus,
            },
        }
    }

    pub fn from_sides(minus: SideLimits, plus: SideLimits) -> Self {
        EndpointLimits {
            r_minus: minus.r,
            r_plus: plus.r,
            p_minus: minus.p,
            p_plus: plus.p,
            q_minus: minus.q,
            q_plus: plus.q,
        }
    }

    /// Edge of the essential spectrum of the left half-line part, taken with
    /// a minus sign: the band is `(-inf, q_minus / r_minus]`.
    pub fn minus_edge(&self) -> f64 {
        // `+ 0.0` turns `-0.0` into `0.0`.
        self.q_minus / self.r_minus + 0.0
    }

    /// Lower edge `q_plus / r_plus` of the right half-line essential band.
    pub fn plus_edge(&self) -> f64 {
        self.q_plus / self.r_plus
    }

    pub fn has_gap(&self) -> bool {
        self.minus_edge() < self.plus_edge()
    }
}

/// Limits at one endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SideLimits {
    pub r: f64,
    pub p: f64,
    pub q: f64,
}

/// Periods of the coefficients near the two endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodDescriptor {
    /// Period on `(beta, inf)`.
    pub omega: f64,
    /// Period on `(-inf, alpha)`.
    pub theta: f64,
}

impl PeriodDescriptor {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega.is_finite() && self.theta > 0.0 && self.theta.is_finite()) {
            return Err(Error::validation("period", "omega and theta must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Minus,
    Plus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Minus => -1.0,
            Side::Plus => 1.0,
        }
    }
}

/// What is known about the coefficients near one endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EndpointMeta {
    Limits(SideLimits),
    Period {
        length: f64,
        /// Start of a period cell; defaults to a cell at least 64 units past
        /// the sign window edge.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        anchor: Option<f64>,
    },
    #[default]
    Unknown,
}

/// The coefficient triple on `(a, b)` with endpoint metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    pub r: CoeffExpr,
    pub p: CoeffExpr,
    pub q: CoeffExpr,
    pub a: f64,
    pub b: f64,
    pub sign_window: Option<(f64, f64)>,
    pub meta_a: EndpointMeta,
    pub meta_b: EndpointMeta,
}

impl CoefficientField {
    /// A field on the whole line with no metadata.
    pub fn new(r: CoeffExpr, p: CoeffExpr, q: CoeffExpr) -> Self {
        CoefficientField {
            r,
            p,
            q,
            a: f64::NEG_INFINITY,
            b: f64::INFINITY,
            sign_window: None,
            meta_a: EndpointMeta::Unknown,
            meta_b: EndpointMeta::Unknown,
        }
    }

    /// Parse the three expressions; panics are never raised, errors carry the
    /// offending coefficient name.
    pub fn parse(r: &str, p: &str, q: &str) -> Result<Self> {
        let named = |name: &str, src: &str| {
            CoeffExpr::parse(src).map_err(|e| Error::validation(name, e.to_string()))
        };
        Ok(Self::new(named("r", r)?, named("p", p)?, named("q", q)?))
    }

    pub fn with_interval(mut self, a: f64, b: f64) -> Self {
        self.a = a;
        self.b = b;
        self
    }

    pub fn with_window(mut self, alpha: f64, beta: f64) -> Self {
        self.sign_window = Some((alpha, beta));
        self
    }

    pub fn with_limits(mut self, lim: EndpointLimits) -> Self {
        self.meta_a = EndpointMeta::Limits(lim.side(Side::Minus));
        self.meta_b = EndpointMeta::Limits(lim.side(Side::Plus));
        self
    }

    pub fn with_periods(mut self, per: PeriodDescriptor) -> Self {
        self.meta_a = EndpointMeta::Period {
            length: per.theta,
            anchor: None,
        };
        self.meta_b = EndpointMeta::Period {
            length: per.omega,
            anchor: None,
        };
        self
    }

    /// The declared sign window, else the detected one.
    pub fn window(&self) -> Result<(f64, f64)> {
        match self.sign_window {
            Some(w) => Ok(w),
            None => detect_sign_window(&self.r, self.a, self.b, &ScanPlan::default()),
        }
    }

    pub fn meta(&self, side: Side) -> &EndpointMeta {
        match side {
            Side::Minus => &self.meta_a,
            Side::Plus => &self.meta_b,
        }
    }

    /// Declared limits, when both endpoints carry them.
    pub fn declared_limits(&self) -> Option<EndpointLimits> {
        match (self.meta_a, self.meta_b) {
            (EndpointMeta::Limits(m), EndpointMeta::Limits(p)) => Some(EndpointLimits::from_sides(m, p)),
            _ => None,
        }
    }

    pub fn r(&self, x: f64) -> Result<f64> {
        self.r.eval(x)
    }

    pub fn p(&self, x: f64) -> Result<f64> {
        self.p.eval(x)
    }

    pub fn q(&self, x: f64) -> Result<f64> {
        self.q.eval(x)
    }

    /// Structural validation: interval, window placement, metadata, and
    /// piecewise coverage. Sampled checks live in [`check_hypotheses`].
    pub fn validate(&self) -> Result<()> {
        if !(self.a < self.b) || self.a.is_nan() || self.b.is_nan() {
            return Err(Error::validation("interval", "need a < b"));
        }
        if let Some((alpha, beta)) = self.sign_window {
            if !(self.a < alpha && alpha <= beta && beta < self.b) {
                return Err(Error::validation(
                    "window",
                    format!("need a < alpha <= beta < b, got ({alpha}, {beta})"),
                ));
            }
        }
        for (name, meta) in [("meta.minus", &self.meta_a), ("meta.plus", &self.meta_b)] {
            match meta {
                EndpointMeta::Limits(l) => {
                    if !(l.r.is_finite() && l.p.is_finite() && l.q.is_finite() && l.p > 0.0) {
                        return Err(Error::validation(name, "limits must be finite with p > 0"));
                    }
                }
                EndpointMeta::Period { length, .. } => {
                    if !(*length > 0.0 && length.is_finite()) {
                        return Err(Error::validation(name, "period length must be positive"));
                    }
                }
                EndpointMeta::Unknown => {}
            }
        }
        if let EndpointMeta::Limits(l) = self.meta_a {
            if l.r >= 0.0 {
                return Err(Error::validation("meta.minus", "r limit must be negative"));
            }
        }
        if let EndpointMeta::Limits(l) = self.meta_b {
            if l.r <= 0.0 {
                return Err(Error::validation("meta.plus", "r limit must be positive"));
            }
        }
        for (name, e) in [("r", &self.r), ("p", &self.p), ("q", &self.q)] {
            if let Some((lo, hi)) = e.piecewise_gaps(self.a, self.b).first() {
                return Err(Error::validation(
                    name,
                    format!("piecewise intervals leave [{lo}, {hi}) uncovered"),
                ));
            }
        }
        Ok(())
    }
}
