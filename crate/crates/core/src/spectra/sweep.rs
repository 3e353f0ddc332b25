//! Truncation sweeps: eigenvalue counts of a half-line piece near a band
//! edge as the truncation grows. Counts are evidence, not proof.

use serde::{Deserialize, Serialize};

use super::edges::{AccVerdict, Approach};
use super::lattice::discrete_band_edge;
use crate::assembly::{assemble_operator, build_grid, Variant};
use crate::coeff::{CoefficientField, Side};
use crate::eigen::count_in_interval;
use crate::error::{Error, Result};

/// Number of eigenvalues in the open interval `(lo, hi)` of `H_+` (plus) or
/// `-H_-` (minus), truncated to `(-x, x)`.
pub fn piece_count(field: &CoefficientField, piece: Side, x: f64, density: f64, lo: f64, hi: f64) -> Result<usize> {
    let (alpha, beta) = field.window()?;
    let grid = build_grid(x, x, density, alpha, beta)?;
    match piece {
        Side::Plus => {
            let op = assemble_operator(field, &grid, Variant::HPlus)?;
            count_in_interval(&op.t, &op.r, lo, hi)
        }
        Side::Minus => {
            // Eigenvalues of -H_- are minus those of the pencil (T, |R|).
            let op = assemble_operator(field, &grid, Variant::HMinus)?;
            let r: Vec<f64> = op.r.iter().map(|v| v.abs()).collect();
            count_in_interval(&op.t, &r, -hi, -lo)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccumulationEvidence {
    pub piece: Side,
    pub edge: f64,
    pub approach: Approach,
    pub delta: f64,
    pub density: f64,
    pub levels: Vec<f64>,
    /// Edge used at each level: the discrete lattice edge for periodic
    /// tails, else `edge`.
    pub level_edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub verdict: AccVerdict,
}

/// Default window width `0.1 * max(1, |edge|)`.
pub fn default_delta(edge: f64) -> f64 {
    0.1 * edge.abs().max(1.0)
}

/// Counts eigenvalues of the piece in `(edge - delta, edge)` (below) or
/// `(edge, edge + delta)` (above) at each truncation; periodic tails use
/// the band edge of the discrete lattice instead of `edge`. Strictly increasing
/// counts mean accumulating, equal counts at the last two levels mean
/// finite.
pub fn accumulation_sweep(
    field: &CoefficientField,
    piece: Side,
    edge: f64,
    approach: Approach,
    levels: &[f64],
    density: f64,
    delta: Option<f64>,
) -> Result<AccumulationEvidence> {
    if levels.len() < 3 {
        return Err(Error::validation("levels", "an accumulation sweep needs at least three truncation levels"));
    }
    if levels.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::validation("levels", "truncation levels must be strictly increasing"));
    }
    let delta = delta.unwrap_or_else(|| default_delta(edge));
    let mut level_edges = Vec::with_capacity(levels.len());
    let mut counts = Vec::with_capacity(levels.len());
    for &x in levels {
        let e = discrete_band_edge(field, piece, edge, x, density)?.unwrap_or(edge);
        let (lo, hi) = match approach {
            Approach::Below => (e - delta, e),
            Approach::Above => (e, e + delta),
        };
        level_edges.push(e);
        counts.push(piece_count(field, piece, x, density, lo, hi)?);
    }
    let n = counts.len();
    let verdict = if counts.windows(2).all(|w| w[0] < w[1]) {
        AccVerdict::Accumulating
    } else if counts[n - 1] == counts[n - 2] {
        AccVerdict::Finite
    } else {
        AccVerdict::Inconclusive
    };
    Ok(AccumulationEvidence {
        piece,
        edge,
        approach,
        delta,
        density,
        levels: levels.to_vec(),
        level_edges,
        counts,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn needs_three_levels() {
        let f = CoefficientField::parse("sgn(x)", "1", "1").unwrap().with_window(0.0, 0.0);
        let e = accumulation_sweep(&f, Side::Plus, 1.0, Approach::Below, &[40.0], 2.0, None);
        assert!(e.unwrap_err().is_validation());
    }

    #[test]
    fn repulsive_tail_is_finite() {
        let f = CoefficientField::parse("sgn(x)", "1", "1 + 1/(1+x^2)").unwrap().with_window(0.0, 0.0);
        let e = accumulation_sweep(&f, Side::Plus, 1.0, Approach::Below, &[40.0, 80.0, 160.0], 4.0, None).unwrap();
        assert_eq!(e.counts, vec![0, 0, 0]);
        assert_eq!(e.verdict, AccVerdict::Finite);
        let m = accumulation_sweep(&f, Side::Minus, -1.0, Approach::Above, &[40.0, 80.0, 160.0], 4.0, None).unwrap();
        assert_eq!(m.verdict, AccVerdict::Finite);
    }

    #[test]
    fn coulomb_tail_accumulates() {
        let f = CoefficientField::parse("sgn(x)", "1", "-1/(1+abs(x))").unwrap().with_window(0.0, 0.0);
        let e = accumulation_sweep(&f, Side::Plus, 0.0, Approach::Below, &[40.0, 80.0, 160.0], 10.0, None).unwrap();
        assert_eq!(e.verdict, AccVerdict::Accumulating, "{:?}", e.counts);
        let m = accumulation_sweep(&f, Side::Minus, 0.0, Approach::Above, &[40.0, 80.0, 160.0], 10.0, None).unwrap();
        assert_eq!(m.counts, e.counts);
    }
}
