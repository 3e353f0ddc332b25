use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::bands::BandSet;
use super::edges::{classify_edges, required_flags, EdgeClass, EdgeFlag};
use super::essential::{essential_section, EssentialSection};
use super::sweep::{accumulation_sweep, AccumulationEvidence};
use crate::assembly::{assemble_operator, build_grid, Variant};
use crate::coeff::{CoefficientField, ScanPlan, Side};
use crate::eigen::{indefinite_eigs, EigOptions, Method};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumConfig {
    /// Symmetric truncations `X`, strictly increasing.
    pub levels: Vec<f64>,
    pub density: f64,
    pub eig: EigOptions,
    /// Floquet bands per periodic side.
    pub k_max: usize,
    /// Truncations for accumulation sweeps; `levels` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_levels: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_delta: Option<f64>,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig {
            levels: vec![40.0, 80.0, 160.0],
            density: 10.0,
            eig: EigOptions::default(),
            k_max: 10,
            sweep_levels: None,
            sweep_delta: None,
        }
    }
}

/// Eigenvalues of the full truncated pencil at one level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSpectrum {
    pub level: f64,
    pub dim: usize,
    pub method: Method,
    pub im_tol: f64,
    /// Ascending.
    pub real: Vec<f64>,
    pub real_residuals: Vec<f64>,
    /// One representative per conjugate pair, `Im > 0`.
    pub pairs: Vec<Complex64>,
    pub pair_residuals: Vec<f64>,
}

impl LevelSpectrum {
    pub fn real_in(&self, lo: f64, hi: f64) -> usize {
        self.real.iter().filter(|&&x| lo < x && x < hi).count()
    }
}

/// Smallest box `|Re| <= re, |Im| <= im` holding every nonreal eigenvalue
/// of every level.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ContainmentBox {
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub essential: EssentialSection,
    pub levels: Vec<LevelSpectrum>,
    pub nonreal_box: ContainmentBox,
    pub edges: Vec<EdgeClass>,
    pub accumulation: Vec<AccumulationEvidence>,
    /// Per-level or per-edge failures that did not stop the report.
    pub notes: Vec<String>,
}

impl SpectrumReport {
    pub fn pair_counts(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.pairs.len()).collect()
    }
}

/// Eigenvalues of the full pencil truncated to `(-x, x)`.
pub fn level_spectrum(field: &CoefficientField, x: f64, density: f64, opts: &EigOptions) -> Result<LevelSpectrum> {
    let (alpha, beta) = field.window()?;
    let grid = build_grid(x, x, density, alpha, beta)?;
    let op = assemble_operator(field, &grid, Variant::KFull)?;
    let s = indefinite_eigs(&op.t, &op.r, opts)?;
    Ok(LevelSpectrum {
        level: x,
        dim: op.dim(),
        method: s.method,
        im_tol: s.im_tol,
        real: s.real,
        real_residuals: s.real_residuals,
        pairs: s.pairs,
        pair_residuals: s.pair_residuals,
    })
}

/// Essential spectrum by regime, discrete spectra per truncation, nonreal
/// containment box and property (P) at the candidate points, with
/// accumulation flags from truncation sweeps.
pub fn build_spectrum_report(field: &CoefficientField, cfg: &SpectrumConfig) -> Result<SpectrumReport> {
    if cfg.levels.is_empty() || cfg.levels.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::validation("numerics.levels", "truncation levels must be nonempty and strictly increasing"));
    }
    field.window()?;
    let essential = essential_section(field, cfg.k_max, &ScanPlan::default());
    let mut notes = Vec::new();
    let mut levels = Vec::new();
    for &x in &cfg.levels {
        match level_spectrum(field, x, cfg.density, &cfg.eig) {
            Ok(l) => levels.push(l),
            Err(e) if e.is_validation() => return Err(e),
            Err(e) => notes.push(format!("level {x}: {e}")),
        }
    }
    let mut bx = ContainmentBox::default();
    for z in levels.iter().flat_map(|l| &l.pairs) {
        bx.re = bx.re.max(z.re.abs());
        bx.im = bx.im.max(z.im.abs());
    }

    let mut accumulation = Vec::new();
    let mut edges = Vec::new();
    if let (Some(p), Some(m)) = (&essential.plus, &essential.minus) {
        let sweep_levels = cfg.sweep_levels.as_ref().unwrap_or(&cfg.levels);
        let (mut acc_plus, mut acc_minus) = (Vec::new(), Vec::new());
        for x in p.bands.intersection(&m.bands).boundary() {
            for (piece, approach) in required_flags(&p.bands, &m.bands, x) {
                match accumulation_sweep(field, piece, x, approach, sweep_levels, cfg.density, cfg.sweep_delta) {
                    Ok(ev) => {
                        let flag = EdgeFlag {
                            point: x,
                            approach,
                            verdict: ev.verdict,
                        };
                        match piece {
                            Side::Plus => acc_plus.push(flag),
                            Side::Minus => acc_minus.push(flag),
                        }
                        accumulation.push(ev);
                    }
                    Err(e) => notes.push(format!("sweep at {x} ({piece:?}, {approach:?}): {e}")),
                }
            }
        }
        edges = classify_edges(&p.bands, &m.bands, &acc_plus, &acc_minus);
    }
    Ok(SpectrumReport {
        essential,
        levels,
        nonreal_box: bx,
        edges,
        accumulation,
        notes,
    })
}

/// Essential spectra of the two pieces, if both are known.
pub fn piece_bands(report: &SpectrumReport) -> Option<(BandSet, BandSet)> {
    match (&report.essential.plus, &report.essential.minus) {
        (Some(p), Some(m)) => Some((p.bands.clone(), m.bands.clone())),
        _ => None,
    }
}
