use serde::{Deserialize, Serialize};

use super::bands::{Band, BandSet};
use super::hill::{periodic_bands, PeriodicBands};
use crate::coeff::{
    estimate_endpoint_limits, CoefficientField, EndpointLimits, EndpointMeta, ScanPlan, Side, SideLimits,
};
use crate::error::Result;
use crate::extnum::ext_pairs;

/// `(-inf, q_- / r_-] U [q_+ / r_+, inf)`: the first piece is the essential
/// spectrum of `-H_-`, the second that of `H_+`.
pub fn essential_from_limits(lim: &EndpointLimits) -> BandSet {
    minus_band(lim.minus_edge()).union(&plus_band(lim.plus_edge()))
}

fn plus_band(edge: f64) -> BandSet {
    BandSet::new([Band::new(edge, f64::INFINITY)])
}

fn minus_band(edge: f64) -> BandSet {
    BandSet::new([Band::new(f64::NEG_INFINITY, edge)])
}

pub fn essential_union(plus: &BandSet, minus: &BandSet) -> BandSet {
    plus.union(minus)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EssentialSource {
    DeclaredLimits,
    EstimatedLimits,
    Periodic,
}

/// Essential spectrum of one half-line piece (`H_+`, or `-H_-`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfLineEssential {
    pub side: Side,
    pub source: EssentialSource,
    pub bands: BandSet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limits: Option<SideLimits>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periodic: Option<PeriodicBands>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EssentialSection {
    pub plus: Option<HalfLineEssential>,
    pub minus: Option<HalfLineEssential>,
    /// `None` when either piece is unknown.
    pub union: Option<BandSet>,
    /// Open gaps of the union.
    #[serde(with = "ext_pairs")]
    pub gaps: Vec<(f64, f64)>,
    pub notes: Vec<String>,
}

impl EssentialSection {
    /// The gap containing `x`, if any.
    pub fn gap_containing(&self, x: f64) -> Option<(f64, f64)> {
        self.gaps.iter().copied().find(|g| g.0 < x && x < g.1)
    }

    /// The finite gap nearest to zero, else the first gap.
    pub fn main_gap(&self) -> Option<(f64, f64)> {
        let score = |g: &(f64, f64)| {
            if g.0 < 0.0 && 0.0 < g.1 {
                0.0
            } else {
                g.0.abs().min(g.1.abs())
            }
        };
        self.gaps
            .iter()
            .filter(|g| g.0.is_finite() && g.1.is_finite())
            .min_by(|a, b| score(a).total_cmp(&score(b)))
            .copied()
    }
}

/// Essential spectrum of one piece from its regime: declared period, then
/// declared limits, then limits estimated from tail samples.
pub fn half_line_essential(
    field: &CoefficientField,
    side: Side,
    k_max: usize,
    plan: &ScanPlan,
) -> Result<Option<HalfLineEssential>> {
    let from_limits = |lim: SideLimits, source| {
        let edge = lim.q / lim.r;
        HalfLineEssential {
            side,
            source,
            bands: match side {
                Side::Plus => plus_band(edge),
                Side::Minus => minus_band(edge),
            },
            limits: Some(lim),
            periodic: None,
        }
    };
    Ok(match field.meta(side) {
        EndpointMeta::Period { .. } => {
            let pb = periodic_bands(field, side, k_max)?;
            Some(HalfLineEssential {
                side,
                source: EssentialSource::Periodic,
                bands: pb.bands.clone(),
                limits: None,
                periodic: Some(pb),
            })
        }
        EndpointMeta::Limits(lim) => Some(from_limits(*lim, EssentialSource::DeclaredLimits)),
        EndpointMeta::Unknown => {
            let est = estimate_endpoint_limits(field, plan)?;
            let s = match side {
                Side::Minus => est.minus,
                Side::Plus => est.plus,
            };
            s.limits().map(|lim| from_limits(lim, EssentialSource::EstimatedLimits))
        }
    })
}

pub fn essential_section(field: &CoefficientField, k_max: usize, plan: &ScanPlan) -> EssentialSection {
    let mut notes = Vec::new();
    let mut piece = |side| match half_line_essential(field, side, k_max, plan) {
        Ok(Some(e)) => Some(e),
        Ok(None) => {
            notes.push(format!("essential spectrum unknown on the {side:?} side: no limits or period"));
            None
        }
        Err(e) => {
            notes.push(format!("essential spectrum unknown on the {side:?} side: {e}"));
            None
        }
    };
    let plus = piece(Side::Plus);
    let minus = piece(Side::Minus);
    let union = match (&plus, &minus) {
        (Some(p), Some(m)) => Some(essential_union(&p.bands, &m.bands)),
        _ => None,
    };
    let gaps = union.as_ref().map(|u| u.gaps()).unwrap_or_default();
    EssentialSection {
        plus,
        minus,
        union,
        gaps,
        notes,
    }
}
