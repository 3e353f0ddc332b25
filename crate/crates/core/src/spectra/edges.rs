//! Property (P) at the boundary points of `sigma_ess(H_+) ∩ sigma_ess(-H_-)`.
//!
//! At a point `x` it holds if one of two symmetric cases is certified:
//! (a) a left neighbourhood lies in the resolvent set of `H_+` and a right
//! neighbourhood in that of `-H_-`; (b) the same with the sides swapped.

use serde::{Deserialize, Serialize};

use super::bands::BandSet;
use crate::coeff::Side;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Approach {
    Below,
    Above,
}

impl Approach {
    pub fn flip(self) -> Self {
        match self {
            Approach::Below => Approach::Above,
            Approach::Above => Approach::Below,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccVerdict {
    Accumulating,
    Finite,
    Inconclusive,
}

/// Whether discrete eigenvalues of one piece accumulate at `point` from one
/// side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeFlag {
    pub point: f64,
    pub approach: Approach,
    pub verdict: AccVerdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PStatus {
    Holds,
    Fails,
    Unknown,
}

/// One one-sided resolvent-set condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideCondition {
    pub piece: Side,
    pub approach: Approach,
    /// No essential spectrum of the piece on that side.
    pub essential_free: bool,
    /// Accumulation flag used, when the essential test passed.
    pub discrete: Option<AccVerdict>,
    pub status: PStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeClass {
    pub point: f64,
    /// `H_+` left, `-H_-` right.
    pub case_a: [SideCondition; 2],
    /// `-H_-` left, `H_+` right.
    pub case_b: [SideCondition; 2],
    pub property_p: PStatus,
}

fn same_point(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

fn condition(piece: Side, ess: &BandSet, flags: &[EdgeFlag], x: f64, approach: Approach) -> SideCondition {
    let touched = match approach {
        Approach::Below => ess.touches_left(x),
        Approach::Above => ess.touches_right(x),
    };
    if touched {
        return SideCondition {
            piece,
            approach,
            essential_free: false,
            discrete: None,
            status: PStatus::Fails,
        };
    }
    let flag = flags
        .iter()
        .find(|f| f.approach == approach && same_point(f.point, x))
        .map(|f| f.verdict);
    let status = match flag {
        Some(AccVerdict::Finite) => PStatus::Holds,
        Some(AccVerdict::Accumulating) => PStatus::Fails,
        _ => PStatus::Unknown,
    };
    SideCondition {
        piece,
        approach,
        essential_free: true,
        discrete: flag,
        status,
    }
}

fn and(a: PStatus, b: PStatus) -> PStatus {
    match (a, b) {
        (PStatus::Fails, _) | (_, PStatus::Fails) => PStatus::Fails,
        (PStatus::Holds, PStatus::Holds) => PStatus::Holds,
        _ => PStatus::Unknown,
    }
}

fn or(a: PStatus, b: PStatus) -> PStatus {
    match (a, b) {
        (PStatus::Holds, _) | (_, PStatus::Holds) => PStatus::Holds,
        (PStatus::Fails, PStatus::Fails) => PStatus::Fails,
        _ => PStatus::Unknown,
    }
}

/// The one-sided conditions property (P) needs at `x`, as `(piece,
/// approach)` pairs whose essential part is free; callers supply
/// accumulation flags for exactly these.
pub fn required_flags(plus: &BandSet, minus: &BandSet, x: f64) -> Vec<(Side, Approach)> {
    let mut out = Vec::new();
    for (piece, approach) in [
        (Side::Plus, Approach::Below),
        (Side::Minus, Approach::Above),
        (Side::Minus, Approach::Below),
        (Side::Plus, Approach::Above),
    ] {
        let ess = if piece == Side::Plus { plus } else { minus };
        let free = match approach {
            Approach::Below => !ess.touches_left(x),
            Approach::Above => !ess.touches_right(x),
        };
        if free {
            out.push((piece, approach));
        }
    }
    out
}

/// `plus` and `minus` are the essential spectra of `H_+` and `-H_-`; flags
/// refer to discrete eigenvalues of the same two operators.
pub fn classify_edges(plus: &BandSet, minus: &BandSet, acc_plus: &[EdgeFlag], acc_minus: &[EdgeFlag]) -> Vec<EdgeClass> {
    plus.intersection(minus)
        .boundary()
        .into_iter()
        .map(|x| {
            let case_a = [
                condition(Side::Plus, plus, acc_plus, x, Approach::Below),
                condition(Side::Minus, minus, acc_minus, x, Approach::Above),
            ];
            let case_b = [
                condition(Side::Minus, minus, acc_minus, x, Approach::Below),
                condition(Side::Plus, plus, acc_plus, x, Approach::Above),
            ];
            let a = and(case_a[0].status, case_a[1].status);
            let b = and(case_b[0].status, case_b[1].status);
            EdgeClass {
                point: x,
                property_p: or(a, b),
                case_a,
                case_b,
            }
        })
        .collect()
}
