//! Band edges of the finite-difference lattice of a periodic tail. On a
//! uniform grid the discrete operator is itself periodic, and its band edges
//! are the periodic and semiperiodic eigenvalues of one discrete period
//! cell. They differ from the continuum edges by `O(h^2)`.

use nalgebra::DMatrix;

use super::hill::period_cell;
use crate::assembly::build_grid;
use crate::coeff::{CoefficientField, EndpointMeta, Side};
use crate::error::{Error, Result};

/// Eigenvalues, ascending, of the three-point scheme for
/// `-(p u')' + q u = lambda |r| u` on `cells` nodes `x0 + j h`,
/// `h = len / cells`, with `u(x + len) = u(x)` or, if `semiperiodic`,
/// `u(x + len) = -u(x)`.
pub fn fd_cell_eigenvalues(
    field: &CoefficientField,
    x0: f64,
    len: f64,
    cells: usize,
    semiperiodic: bool,
) -> Result<Vec<f64>> {
    if cells < 2 {
        return Err(Error::validation("cells", "a period cell needs at least two nodes"));
    }
    let h = len / cells as f64;
    let wrap = if semiperiodic { -1.0 } else { 1.0 };
    let mut t = DMatrix::<f64>::zeros(cells, cells);
    let mut w = vec![0.0; cells];
    for j in 0..cells {
        let x = x0 + j as f64 * h;
        let right = field.p(x + 0.5 * h)? / h;
        t[(j, j)] += field.p(x - 0.5 * h)? / h + right + field.q(x)? * h;
        // The last node couples back to the first across the cell boundary.
        let (k, s) = if j + 1 == cells { (0, wrap) } else { (j + 1, 1.0) };
        t[(j, k)] -= s * right;
        t[(k, j)] -= s * right;
        let r = field.r(x)?.abs() * h;
        if !(r > 0.0) {
            return Err(Error::Hypothesis(format!("weight vanishes at {x}")));
        }
        w[j] = 1.0 / r.sqrt();
    }
    for i in 0..cells {
        for j in 0..cells {
            t[(i, j)] *= w[i] * w[j];
        }
    }
    let mut ev: Vec<f64> = t.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Band edge of the discrete lattice at truncation `level` closest to the
/// continuum edge `edge`, in the spectral variable of `H_+` (plus) or
/// `-H_-` (minus). `None` when the side is not periodic or the period is not
/// a whole number of grid steps.
pub fn discrete_band_edge(
    field: &CoefficientField,
    piece: Side,
    edge: f64,
    level: f64,
    density: f64,
) -> Result<Option<f64>> {
    if !matches!(field.meta(piece), EndpointMeta::Period { .. }) {
        return Ok(None);
    }
    let (alpha, beta) = field.window()?;
    let grid = build_grid(level, level, density, alpha, beta)?;
    let (start, len) = period_cell(field, piece)?;
    let h = grid.h;
    let cells = (len / h).round();
    if cells < 2.0 || (cells * h - len).abs() > 1e-9 * len {
        return Ok(None);
    }
    // Same sampling phase as the truncated grid.
    let x0 = -level + ((start + level) / h).round() * h;
    let sign = piece.sign();
    let mut best: Option<f64> = None;
    for semi in [false, true] {
        for v in fd_cell_eigenvalues(field, x0, len, cells as usize, semi)? {
            let v = sign * v;
            if best.map_or(true, |b| (v - edge).abs() < (b - edge).abs()) {
                best = Some(v);
            }
        }
    }
    Ok(best)
}
