//! Matrix-level checks of the decoupling: the resolvent difference between
//! the full and block-diagonal pencils has rank at most two per decoupled
//! node, and inertia moves by at most that rank.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::assembly::{assemble_operator, blockdiag_difference, build_grid, Variant};
use crate::coeff::CoefficientField;
use crate::eigen::{inertia_count, numerical_rank, pencil_resolvent_difference, singular_values};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankCheck {
    pub level: f64,
    pub density: f64,
    pub lambda: Complex64,
    /// 2 for `alpha = beta`, else 4.
    pub bound: usize,
    pub rank: usize,
    /// Leading singular values (at most `bound + 2`).
    pub leading: Vec<f64>,
    /// `sigma_{bound+1} / sigma_1`, zero when there are no more.
    pub tail_ratio: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Numerical rank of `(T - lambda R)^{-1} R - (T_0 - lambda R)^{-1} R`.
pub fn resolvent_rank_check(field: &CoefficientField, level: f64, density: f64, lambda: Complex64, tol: f64) -> Result<RankCheck> {
    let (alpha, beta) = field.window()?;
    let grid = build_grid(level, level, density, alpha, beta)?;
    let full = assemble_operator(field, &grid, Variant::KFull)?;
    let block = assemble_operator(field, &grid, Variant::H0BlockDiag)?;
    let d = pencil_resolvent_difference(&full.t, &block.t, &full.r, lambda)?;
    let s = singular_values(&d);
    let bound = if grid.alpha_index == grid.beta_index { 2 } else { 4 };
    let rank = numerical_rank(&d, tol);
    let tail_ratio = match (s.first(), s.get(bound)) {
        (Some(&s1), Some(&sb)) if s1 > 0.0 => sb / s1,
        _ => 0.0,
    };
    Ok(RankCheck {
        level,
        density,
        lambda,
        bound,
        rank,
        leading: s.iter().take(bound + 2).copied().collect(),
        tail_ratio,
        tol,
        pass: rank <= bound && tail_ratio < tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InertiaShiftCheck {
    pub level: f64,
    pub eta: f64,
    pub n_minus_full: usize,
    pub n_minus_block: usize,
    /// Rank of `T_full - T_block`.
    pub rank: usize,
    pub pass: bool,
}

/// `|n_minus(T - eta R) - n_minus(T_0 - eta R)| <= rank(T - T_0)`.
pub fn inertia_shift_check(field: &CoefficientField, eta: f64, level: f64, density: f64) -> Result<InertiaShiftCheck> {
    let (alpha, beta) = field.window()?;
    let grid = build_grid(level, level, density, alpha, beta)?;
    let full = assemble_operator(field, &grid, Variant::KFull)?;
    let block = assemble_operator(field, &grid, Variant::H0BlockDiag)?;
    let diff = blockdiag_difference(&full, &block)?;
    // The difference is supported on at most two crosses; its rank is that
    // of the small dense block around them.
    let rank = numerical_rank(&diff.to_dense(), 1e-12);
    let a = inertia_count(&full.t, eta, &full.r)?.n_minus;
    let b = inertia_count(&block.t, eta, &block.r)?.n_minus;
    Ok(InertiaShiftCheck {
        level,
        eta,
        n_minus_full: a,
        n_minus_block: b,
        rank,
        pass: a.abs_diff(b) <= rank,
    })
}
