//! Negative-squares budgets, the nonreal pair bound and eigenvalue-count
//! bounds in a gap.
//!
//! With `eta` between `sup sigma_ess(-H_-)` and `inf sigma_ess(H_+)`:
//! `kappa_-` counts eigenvalues of `H_+` below `eta`, `kappa_+` those of
//! `-H_-` above `eta`, `kappa_eta` the negative squares of `K_ab - eta`, and
//! `K_0 - eta` has at most `kappa_0 = kappa + 2` negative squares.

use serde::{Deserialize, Serialize};

use crate::assembly::{assemble_operator, build_grid, Variant};
use crate::coeff::{CoefficientField, Side};
use crate::eigen::{indefinite_eigs, inertia_count, EigOptions};
use crate::error::{Error, Result};
use crate::extnum::ext_pair;
use crate::spectra::{piece_count, BandSet, SpectrumReport};

/// Counts at one truncation level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KappaCounts {
    pub kappa_plus: usize,
    pub kappa_minus: usize,
    pub kappa_eta: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelKappa {
    pub level: f64,
    pub counts: KappaCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativeSquaresBudget {
    pub eta: f64,
    /// `sup sigma_ess(-H_-)` and `inf sigma_ess(H_+)`.
    #[serde(with = "ext_pair")]
    pub eta_range: (f64, f64),
    pub per_level: Vec<LevelKappa>,
    /// Counts agree at the two largest levels.
    pub available: bool,
    pub kappa_plus: usize,
    pub kappa_minus: usize,
    pub kappa_eta: usize,
    pub kappa: usize,
    pub kappa0: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetConfig {
    pub density: f64,
    /// Accept `eta` on an edge of the admissible range (valid when no
    /// discrete eigenvalues accumulate there).
    pub allow_edge: bool,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        BudgetConfig {
            density: 10.0,
            allow_edge: false,
        }
    }
}

/// `(sup minus, inf plus)`.
pub fn eta_range(plus: &BandSet, minus: &BandSet) -> (f64, f64) {
    let lo = minus.bands().last().map(|b| b.hi).unwrap_or(f64::NEG_INFINITY);
    let hi = plus.bands().first().map(|b| b.lo).unwrap_or(f64::INFINITY);
    (lo + 0.0, hi + 0.0)
}

pub fn kappa_counts(field: &CoefficientField, eta: f64, level: f64, density: f64) -> Result<KappaCounts> {
    let kappa_minus = piece_count(field, Side::Plus, level, density, f64::NEG_INFINITY, eta)?;
    let kappa_plus = piece_count(field, Side::Minus, level, density, eta, f64::INFINITY)?;
    let (alpha, beta) = field.window()?;
    let grid = build_grid(level, level, density, alpha, beta)?;
    let mid = assemble_operator(field, &grid, Variant::KAlphaBeta)?;
    let kappa_eta = if mid.dim() == 0 {
        0
    } else {
        inertia_count(&mid.t, eta, &mid.r)?.n_minus
    };
    Ok(KappaCounts {
        kappa_plus,
        kappa_minus,
        kappa_eta,
    })
}

/// Budget from counts at every level; available when the two largest
/// levels agree exactly.
pub fn kappa_budget(
    field: &CoefficientField,
    plus: &BandSet,
    minus: &BandSet,
    eta: f64,
    levels: &[f64],
    cfg: &BudgetConfig,
) -> Result<NegativeSquaresBudget> {
    let range = eta_range(plus, minus);
    let inside = if cfg.allow_edge {
        range.0 <= eta && eta <= range.1
    } else {
        range.0 < eta && eta < range.1
    };
    if !inside || !eta.is_finite() {
        return Err(Error::validation(
            "numerics.eta",
            format!("eta = {eta} is outside the admissible range ({}, {})", range.0, range.1),
        ));
    }
    if levels.len() < 2 || levels.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::validation("numerics.levels", "need at least two increasing truncation levels"));
    }
    let per_level: Vec<LevelKappa> = levels
        .iter()
        .map(|&x| {
            Ok(LevelKappa {
                level: x,
                counts: kappa_counts(field, eta, x, cfg.density)?,
            })
        })
        .collect::<Result<_>>()?;
    let n = per_level.len();
    let last = per_level[n - 1].counts;
    let available = per_level[n - 2].counts == last;
    let kappa = last.kappa_plus + last.kappa_eta + last.kappa_minus;
    Ok(NegativeSquaresBudget {
        eta,
        eta_range: range,
        per_level,
        available,
        kappa_plus: last.kappa_plus,
        kappa_minus: last.kappa_minus,
        kappa_eta: last.kappa_eta,
        kappa,
        kappa0: kappa + 2,
        reason: if available {
            String::new()
        } else {
            "counts differ between the two largest truncations".into()
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairBoundCheck {
    pub kappa0: usize,
    pub pairs: Vec<(f64, usize)>,
    pub pass: bool,
    /// First level whose pair count exceeds the bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offending_level: Option<f64>,
}

/// At most `kappa_0` nonreal pairs at every truncation level.
pub fn pair_bound_check(budget: &NegativeSquaresBudget, report: &SpectrumReport) -> Result<PairBoundCheck> {
    if !budget.available {
        return Err(Error::Numerical("negative-squares budget is unavailable".into()));
    }
    let pairs: Vec<(f64, usize)> = report.levels.iter().map(|l| (l.level, l.pairs.len())).collect();
    let offending_level = pairs.iter().find(|p| p.1 > budget.kappa0).map(|p| p.0);
    Ok(PairBoundCheck {
        kappa0: budget.kappa0,
        pairs,
        pass: offending_level.is_none(),
        offending_level,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountVariant {
    /// `4 n + 6 kappa + 11`.
    General4n6k11,
    /// `6 kappa + 11`, interval in the resolvent set of `H_0`.
    Gap6k11,
    /// `2 n + 2 kappa + 3` for `alpha = beta`.
    AlphaEqBeta,
    /// `2 kappa + 3` for `alpha = beta`, interval in the resolvent set of
    /// `H_0`.
    AlphaEqBetaGap,
}

impl CountVariant {
    pub fn select(alpha_eq_beta: bool, n_h0: usize) -> Self {
        match (alpha_eq_beta, n_h0 == 0) {
            (false, false) => CountVariant::General4n6k11,
            (false, true) => CountVariant::Gap6k11,
            (true, false) => CountVariant::AlphaEqBeta,
            (true, true) => CountVariant::AlphaEqBetaGap,
        }
    }
}

pub fn gap_count_bound(n_h0: usize, kappa: usize, variant: CountVariant) -> usize {
    match variant {
        CountVariant::General4n6k11 => 4 * n_h0 + 6 * kappa + 11,
        CountVariant::Gap6k11 => 6 * kappa + 11,
        CountVariant::AlphaEqBeta => 2 * n_h0 + 2 * kappa + 3,
        CountVariant::AlphaEqBetaGap => 2 * kappa + 3,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountEstimate {
    pub interval: (f64, f64),
    pub level: f64,
    /// Real eigenvalues of the full truncated pencil in the interval.
    pub n_k0: usize,
    /// Eigenvalues of the decoupled operator in the interval.
    pub n_h0: usize,
    pub kappa: usize,
    pub variant: CountVariant,
    pub bound: usize,
    pub pass: bool,
}

/// Eigenvalues of `H_0 = diag(-H_-, K_ab, H_+)` in the open interval: the
/// two definite pieces by inertia, the middle block by its full spectrum.
pub fn h0_count(field: &CoefficientField, lo: f64, hi: f64, level: f64, density: f64) -> Result<usize> {
    let plus = piece_count(field, Side::Plus, level, density, lo, hi)?;
    let minus = piece_count(field, Side::Minus, level, density, lo, hi)?;
    let (alpha, beta) = field.window()?;
    let grid = build_grid(level, level, density, alpha, beta)?;
    let mid = assemble_operator(field, &grid, Variant::KAlphaBeta)?;
    let middle = if mid.dim() == 0 {
        0
    } else {
        let s = indefinite_eigs(&mid.t, &mid.r, &EigOptions::default())?;
        s.real.iter().filter(|&&x| lo < x && x < hi).count()
    };
    Ok(plus + minus + middle)
}

/// Count bound for one interval at one level, with `n_k0` measured from
/// the real eigenvalues of the full pencil.
pub fn count_estimate(
    field: &CoefficientField,
    interval: (f64, f64),
    real_eigs: &[f64],
    level: f64,
    density: f64,
    kappa: usize,
) -> Result<CountEstimate> {
    let (lo, hi) = interval;
    let n_k0 = real_eigs.iter().filter(|&&x| lo < x && x < hi).count();
    let n_h0 = h0_count(field, lo, hi, level, density)?;
    let (alpha, beta) = field.window()?;
    let variant = CountVariant::select(alpha == beta, n_h0);
    let bound = gap_count_bound(n_h0, kappa, variant);
    Ok(CountEstimate {
        interval,
        level,
        n_k0,
        n_h0,
        kappa,
        variant,
        bound,
        pass: n_k0 <= bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{build_spectrum_report, LevelSpectrum, SpectrumConfig};
    use num_complex::Complex64;

    #[test]
    fn bound_formulas() {
        assert_eq!(gap_count_bound(0, 0, CountVariant::General4n6k11), 11);
        assert_eq!(gap_count_bound(0, 1, CountVariant::AlphaEqBetaGap), 5);
        assert_eq!(gap_count_bound(2, 1, CountVariant::Gap6k11), 17);
        assert_eq!(gap_count_bound(2, 1, CountVariant::AlphaEqBeta), 9);
        assert_eq!(CountVariant::select(true, 0), CountVariant::AlphaEqBetaGap);
        assert_eq!(CountVariant::select(false, 3), CountVariant::General4n6k11);
    }

    fn gap_field() -> CoefficientField {
        CoefficientField::parse("sgn(x)", "1", "1 - 3*exp(-x^2)").unwrap().with_window(0.0, 0.0)
    }

    fn unit_bands() -> (BandSet, BandSet) {
        (
            BandSet::from_pairs(&[(1.0, f64::INFINITY)]),
            BandSet::from_pairs(&[(f64::NEG_INFINITY, -1.0)]),
        )
    }

    #[test]
    fn budget_basics() {
        let f = gap_field();
        let (p, m) = unit_bands();
        let b = kappa_budget(&f, &p, &m, 0.0, &[10.0, 20.0], &BudgetConfig { density: 8.0, allow_edge: false }).unwrap();
        assert!(b.available);
        assert_eq!(b.kappa0, b.kappa + 2);
        assert_eq!(b.kappa_eta, 0);
        assert!(kappa_budget(&f, &p, &m, 1.0, &[10.0, 20.0], &BudgetConfig::default()).is_err());
        assert!(kappa_budget(&f, &p, &m, 1.0, &[10.0, 20.0], &BudgetConfig { density: 8.0, allow_edge: true }).is_ok());
    }

    #[test]
    fn kappa_staircase_in_eta() {
        let f = gap_field();
        let mut prev: Option<KappaCounts> = None;
        for k in 0..9 {
            let eta = -0.8 + 0.2 * k as f64;
            let c = kappa_counts(&f, eta, 12.0, 8.0).unwrap();
            if let Some(p) = prev {
                assert!(c.kappa_minus >= p.kappa_minus);
                assert!(c.kappa_plus <= p.kappa_plus);
            }
            prev = Some(c);
        }
    }

    #[test]
    fn pair_bound_contract() {
        let f = gap_field();
        let cfg = SpectrumConfig {
            levels: vec![6.0, 8.0],
            density: 8.0,
            ..SpectrumConfig::default()
        };
        let mut report = build_spectrum_report(&f, &cfg).unwrap();
        let (p, m) = unit_bands();
        let budget = kappa_budget(&f, &p, &m, 0.0, &[6.0, 8.0], &BudgetConfig { density: 8.0, allow_edge: false }).unwrap();
        assert!(pair_bound_check(&budget, &report).unwrap().pass);
        let extra: Vec<Complex64> = (0..=budget.kappa0).map(|k| Complex64::new(k as f64, 1.0)).collect();
        report.levels.push(LevelSpectrum {
            level: 99.0,
            pairs: extra,
            ..report.levels[0].clone()
        });
        let c = pair_bound_check(&budget, &report).unwrap();
        assert!(!c.pass);
        assert_eq!(c.offending_level, Some(99.0));
    }
}
