//! Grids on truncated domains and the finite-difference pencils `(T, R)` of
//! the full operator and of its Dirichlet-decoupled pieces.
//!
//! For interior node `i` with spacings `h_-` and `h_+`:
//!
//! ```text
//! T_ii     = p(x_i - h_-/2)/h_- + p(x_i + h_+/2)/h_+ + q(x_i)(h_- + h_+)/2
//! T_i,i+1  = -p(x_i + h_+/2)/h_+
//! R_ii     = r(x_i)(h_- + h_+)/2
//! ```
//!
//! On a uniform grid this is the three-point scheme with `q` and `r` lumped
//! as `q(x_i) h`, `r(x_i) h`. The spacing is nonuniform only next to an
//! inserted `alpha` or `beta` node.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::coeff::CoefficientField;
use crate::eigen::SymTridiag;
use crate::error::{Error, Result};

/// Nodes of a truncated grid, endpoints included; unknowns live on the
/// interior nodes (Dirichlet at both truncation ends).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub nodes: Vec<f64>,
    pub x_left: f64,
    pub x_right: f64,
    /// Nominal uniform spacing.
    pub h: f64,
    pub alpha: f64,
    pub beta: f64,
    pub alpha_index: usize,
    pub beta_index: usize,
}

impl Grid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of interior nodes.
    pub fn interior(&self) -> usize {
        self.nodes.len() - 2
    }
}

/// Uniform grid on `[-x_left, x_right]` with `ceil((x_left + x_right) *
/// density)` cells, then `alpha` and `beta` made exact nodes: a node within
/// `h/4` is moved onto them, otherwise a node is inserted.
pub fn build_grid(x_left: f64, x_right: f64, density: f64, alpha: f64, beta: f64) -> Result<Grid> {
    if !(x_left > 0.0 && x_right > 0.0 && x_left.is_finite() && x_right.is_finite()) {
        return Err(Error::validation("trunc", "truncation bounds must be positive and finite"));
    }
    if !(density > 0.0 && density.is_finite()) {
        return Err(Error::validation("density", "density must be positive"));
    }
    if !(alpha <= beta) {
        return Err(Error::validation("window", "need alpha <= beta"));
    }
    let len = x_left + x_right;
    let cells = ((len * density) - 1e-9).ceil().max(1.0) as usize;
    if cells < 2 {
        return Err(Error::validation("density", "grid needs at least three nodes"));
    }
    let h = len / cells as f64;
    for (name, v) in [("alpha", alpha), ("beta", beta)] {
        if !(v > -x_left + 0.5 * h && v < x_right - 0.5 * h) {
            return Err(Error::validation(
                name,
                format!("{name} = {v} is outside the truncated window (-{x_left}, {x_right})"),
            ));
        }
    }
    let mut nodes: Vec<f64> = (0..=cells)
        .map(|k| -x_left + len * (k as f64) / cells as f64)
        .collect();
    nodes[cells] = x_right;
    let mut place = |v: f64| -> usize {
        let at = nodes.partition_point(|&x| x < v);
        let k = if nodes[at] - v <= v - nodes[at - 1] { at } else { at - 1 };
        let k = k.clamp(1, nodes.len() - 2);
        if (nodes[k] - v).abs() <= 0.25 * h {
            nodes[k] = v;
            k
        } else {
            nodes.insert(at, v);
            at
        }
    };
    let alpha_index = place(alpha);
    let beta_index = if beta == alpha { alpha_index } else { place(beta) };
    // Inserting beta may shift alpha's index.
    let alpha_index = nodes.iter().position(|&x| x == alpha).unwrap_or(alpha_index);
    Ok(Grid {
        nodes,
        x_left,
        x_right,
        h,
        alpha,
        beta,
        alpha_index,
        beta_index,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// The indefinite operator on the whole truncated window.
    KFull,
    /// Same stiffness with weight `|r|`.
    LFull,
    /// Left piece on `(-X_L, alpha)`, Dirichlet at alpha; negative weight,
    /// so the pencil eigenvalues are those of `-H_-`.
    HMinus,
    /// Right piece on `(beta, X_R)`, Dirichlet at beta.
    HPlus,
    /// Middle piece on `(alpha, beta)`; empty when they are adjacent.
    KAlphaBeta,
    /// `KFull` with the alpha and beta rows and columns decoupled.
    H0BlockDiag,
}

/// Which piece of the decoupled operator a block belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    Minus,
    Decoupled,
    Middle,
    Plus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssembledOperator {
    pub variant: Variant,
    pub t: SymTridiag,
    pub r: Vec<f64>,
    /// Grid index of every unknown.
    pub node_index: Vec<usize>,
    /// Positions (in the unknown vector) of decoupled rows.
    pub decoupled: Vec<usize>,
    pub grid: Grid,
}

impl AssembledOperator {
    pub fn dim(&self) -> usize {
        self.t.len()
    }

    pub fn x(&self, k: usize) -> f64 {
        self.grid.nodes[self.node_index[k]]
    }

    /// Diagonal blocks in order. Variants other than `H0BlockDiag` are a
    /// single `Middle` block.
    pub fn blocks(&self) -> Vec<(Range<usize>, BlockKind)> {
        if self.variant != Variant::H0BlockDiag {
            return vec![(0..self.dim(), BlockKind::Middle)];
        }
        let mut out = Vec::new();
        let mut start = 0;
        let mut kind = BlockKind::Minus;
        for &d in &self.decoupled {
            out.push((start..d, kind));
            out.push((d..d + 1, BlockKind::Decoupled));
            start = d + 1;
            kind = if kind == BlockKind::Minus && self.decoupled.len() == 2 {
                BlockKind::Middle
            } else {
                BlockKind::Plus
            };
        }
        out.push((start..self.dim(), BlockKind::Plus));
        out
    }
}

/// Assemble the pencil of one operator variant.
pub fn assemble_operator(field: &CoefficientField, grid: &Grid, variant: Variant) -> Result<AssembledOperator> {
    if !(field.a <= -grid.x_left && grid.x_right <= field.b) {
        return Err(Error::validation("trunc", "truncated window must lie inside (a, b)"));
    }
    let m = grid.nodes.len();
    let (ia, ib) = (grid.alpha_index, grid.beta_index);
    let range = match variant {
        Variant::KFull | Variant::LFull | Variant::H0BlockDiag => 1..m - 1,
        Variant::HMinus => 1..ia,
        Variant::HPlus => ib + 1..m - 1,
        Variant::KAlphaBeta => (ia + 1).min(ib)..ib,
    };
    let idx: Vec<usize> = range.collect();
    let n = idx.len();
    let x = &grid.nodes;
    let mut diag = Vec::with_capacity(n);
    let mut off = Vec::with_capacity(n.saturating_sub(1));
    let mut r = Vec::with_capacity(n);
    for (k, &i) in idx.iter().enumerate() {
        let hm = x[i] - x[i - 1];
        let hp = x[i + 1] - x[i];
        let pm = field.p(x[i] - 0.5 * hm)?;
        let pp = field.p(x[i] + 0.5 * hp)?;
        let w = 0.5 * (hm + hp);
        diag.push(pm / hm + pp / hp + field.q(x[i])? * w);
        let ri = field.r(x[i])?;
        if ri == 0.0 {
            return Err(Error::Hypothesis(format!("weight vanishes at grid node x = {}", x[i])));
        }
        r.push(if variant == Variant::LFull { ri.abs() * w } else { ri * w });
        if k + 1 < n {
            off.push(-pp / hp);
        }
    }
    let mut decoupled = Vec::new();
    if variant == Variant::H0BlockDiag {
        let mut cut = vec![ia - 1];
        if ib != ia {
            cut.push(ib - 1);
        }
        for &d in &cut {
            if d > 0 {
                off[d - 1] = 0.0;
            }
            if d < n - 1 {
                off[d] = 0.0;
            }
            diag[d] = diag[d].abs();
        }
        decoupled = cut;
    }
    let op = AssembledOperator {
        variant,
        t: SymTridiag::new(diag, off),
        r,
        node_index: idx,
        decoupled,
        grid: grid.clone(),
    };
    match variant {
        Variant::HMinus if op.r.iter().any(|&v| v >= 0.0) => {
            Err(Error::Hypothesis("weight is not negative on (-X_L, alpha)".into()))
        }
        Variant::HPlus if op.r.iter().any(|&v| v <= 0.0) => {
            Err(Error::Hypothesis("weight is not positive on (beta, X_R)".into()))
        }
        _ => Ok(op),
    }
}

/// `T_full - T_block`; the weights agree by construction.
pub fn blockdiag_difference(full: &AssembledOperator, block: &AssembledOperator) -> Result<SymTridiag> {
    if full.grid != block.grid {
        return Err(Error::validation("grid", "operators live on different grids"));
    }
    if full.variant != Variant::KFull || !matches!(block.variant, Variant::H0BlockDiag | Variant::KFull) {
        return Err(Error::validation("variant", "expected K_full and its block-diagonal version"));
    }
    Ok(SymTridiag::new(
        full.t.diag.iter().zip(&block.t.diag).map(|(a, b)| a - b).collect(),
        full.t.off.iter().zip(&block.t.off).map(|(a, b)| a - b).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::{numerical_rank, sym_tridiag_eigs};

    #[test]
    fn grid_counts() {
        let g = build_grid(10.0, 10.0, 10.0, 0.0, 0.0).unwrap();
        assert_eq!(g.len(), 201);
        assert_eq!(g.nodes[g.alpha_index], 0.0);
        assert_eq!(g.alpha_index, g.beta_index);
        assert_eq!(build_grid(2.0, 2.0, 1.0, 0.0, 0.0).unwrap().len(), 5);
        assert!(build_grid(10.0, 10.0, 10.0, 0.0, 15.0).is_err());
    }

    #[test]
    fn off_grid_window_is_inserted() {
        let g = build_grid(5.0, 5.0, 10.0, -1.05, 0.51).unwrap();
        assert_eq!(g.len(), 102);
        assert_eq!(g.nodes[g.alpha_index], -1.05);
        assert_eq!(g.nodes[g.beta_index], 0.51);
        assert!(g.nodes.windows(2).all(|w| w[0] < w[1]));
    }

    fn field(r: &str, q: &str) -> CoefficientField {
        CoefficientField::parse(r, "1", q).unwrap()
    }

    #[test]
    fn weight_sign_pattern() {
        let g = build_grid(3.0, 3.0, 4.0, 0.0, 0.0).unwrap();
        let op = assemble_operator(&field("sgn(x)", "0"), &g, Variant::KFull).unwrap();
        for k in 0..op.dim() {
            assert_eq!(op.r[k] < 0.0, op.x(k) < 0.0);
        }
        let hp = assemble_operator(&field("sgn(x)", "0"), &g, Variant::HPlus).unwrap();
        assert_eq!(hp.dim(), g.nodes.iter().filter(|&&x| x > 0.0 && x < 3.0).count());
        let mid = assemble_operator(&field("sgn(x)", "0"), &g, Variant::KAlphaBeta).unwrap();
        assert_eq!(mid.dim(), 0);
    }

    #[test]
    fn dirichlet_laplacian_matches_closed_form() {
        // Window of length pi with 40 cells: eigenvalues 2(1 - cos(k h))/h^2.
        let pi = std::f64::consts::PI;
        let f = field("1", "0");
        let g = build_grid(pi / 2.0, pi / 2.0, 40.0 / pi, 0.0, 0.0).unwrap();
        assert_eq!(g.len(), 41);
        let h = g.h;
        assert!(g.nodes.windows(2).all(|w| ((w[1] - w[0]) - h).abs() < 1e-12));
        let op = assemble_operator(&f, &g, Variant::LFull).unwrap();
        let ev = sym_tridiag_eigs(&op.t, &op.r, None).unwrap();
        for k in 1..=5 {
            let exact = 2.0 / (h * h) * (1.0 - (k as f64 * h).cos());
            assert!((ev[k - 1] - exact).abs() < 1e-10 * exact, "{k}");
            // Leading error k^4 h^2 / 12 against the continuum value k^2.
            let k2 = (k * k) as f64;
            assert!((k2 - ev[k - 1] - k2 * k2 * h * h / 12.0).abs() < 1e-3 * k2);
        }
    }

    #[test]
    fn blockdiag_structure_and_rank() {
        let f = field("sgn(x)", "-1/(1+abs(x))");
        for (alpha, beta, bound) in [(0.0, 0.0, 2), (-1.0, 1.0, 4)] {
            let g = build_grid(4.0, 4.0, 5.0, alpha, beta).unwrap();
            let full = assemble_operator(&f, &g, Variant::KFull).unwrap();
            let block = assemble_operator(&f, &g, Variant::H0BlockDiag).unwrap();
            assert_eq!(full.r, block.r);
            for &d in &block.decoupled {
                if d > 0 {
                    assert_eq!(block.t.off[d - 1], 0.0);
                }
                assert_eq!(block.t.off[d], 0.0);
            }
            let diff = blockdiag_difference(&full, &block).unwrap();
            let rank = numerical_rank(&diff.to_dense(), 1e-12);
            assert!(rank <= bound && rank > 0, "rank {rank}");
            let zero = blockdiag_difference(&full, &full).unwrap();
            assert_eq!(numerical_rank(&zero.to_dense(), 1e-12), 0);
        }
    }

    #[test]
    fn blocks_partition() {
        let f = field("sgn(x)", "0");
        let g = build_grid(4.0, 4.0, 5.0, -1.0, 1.0).unwrap();
        let block = assemble_operator(&f, &g, Variant::H0BlockDiag).unwrap();
        let kinds: Vec<BlockKind> = block.blocks().iter().map(|b| b.1).collect();
        assert_eq!(
            kinds,
            vec![BlockKind::Minus, BlockKind::Decoupled, BlockKind::Middle, BlockKind::Decoupled, BlockKind::Plus]
        );
        let hm = assemble_operator(&f, &g, Variant::HMinus).unwrap();
        let blocks = block.blocks();
        assert_eq!(blocks[0].0.len(), hm.dim());
        assert_eq!(block.t.slice(blocks[0].0.clone()), hm.t);
    }
}
