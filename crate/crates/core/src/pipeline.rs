//! Orchestration of one analysis: every section runs on its own, records
//! its own failure, and sees the same shared intermediate results whether or
//! not the sections producing them are enabled.

use std::cell::OnceCell;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::budgets::{count_estimate, eta_range, kappa_budget, pair_bound_check, BudgetConfig, CountEstimate, NegativeSquaresBudget, PairBoundCheck};
use crate::coeff::{
    check_comparison_conditions, check_hypotheses, estimate_endpoint_limits, CoefficientField, ComparisonReport,
    EndpointLimits, EndpointMeta, HypothesisReport, ScanPlan, Side,
};
use crate::error::{Error, Result};
use crate::kneser::{kneser_verdict, perturbation_transfer_check, KneserVerdict, TailPlan, TransferReport, Verdict};
use crate::problem::ProblemSpec;
use crate::spectra::{
    accumulation_sweep, build_spectrum_report, essential_section, AccVerdict, AccumulationEvidence, Approach,
    EssentialSection, SpectrumConfig, SpectrumReport,
};
use crate::structure::{inertia_shift_check, resolvent_rank_check, InertiaShiftCheck, RankCheck};

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const TOOL_NAME: &str = "indefsl";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    Validation,
    Numerical,
}

impl FailureKind {
    fn of(e: &Error) -> Self {
        match e {
            Error::Numerical(_) => FailureKind::Numerical,
            _ => FailureKind::Validation,
        }
    }
}

/// Outcome of one report section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "data", rename_all = "snake_case")]
pub enum Section<T> {
    Ok(T),
    Failed { kind: FailureKind, message: String },
    Skipped { reason: String },
}

impl<T> Section<T> {
    /// Hypothesis errors mean the section does not apply and become
    /// `Skipped`; the rest are failures.
    pub fn from_result(r: Result<T>) -> Self {
        match r {
            Ok(v) => Section::Ok(v),
            Err(Error::Hypothesis(m)) => Section::Skipped { reason: m },
            Err(e) => Section::Failed {
                kind: FailureKind::of(&e),
                message: e.to_string(),
            },
        }
    }

    pub fn skipped(reason: impl Into<String>) -> Self {
        Section::Skipped { reason: reason.into() }
    }

    pub fn ok(&self) -> Option<&T> {
        match self {
            Section::Ok(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_ok(&self) -> bool {
        matches!(self, Section::Ok(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl Default for ToolInfo {
    fn default() -> Self {
        ToolInfo {
            name: TOOL_NAME.into(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitsSource {
    Declared,
    Estimated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Agreement {
    Agree,
    Disagree,
    /// One of the two is inconclusive or missing.
    Undetermined,
}

/// A Kneser verdict paired with a truncation sweep at the same edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossLink {
    pub side: Side,
    pub edge: f64,
    pub kneser: Verdict,
    pub sweep: Section<AccumulationEvidence>,
    pub agreement: Agreement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbedVerdicts {
    /// The transfer condition holds, so the base verdicts carry over.
    pub inherited: bool,
    /// Verdicts computed directly on the perturbed coefficients.
    pub verdicts: Vec<KneserVerdict>,
    /// Direct verdicts equal the base ones on both sides.
    pub identical: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KneserSection {
    pub limits: EndpointLimits,
    pub limits_source: LimitsSource,
    pub order: u32,
    pub margin: f64,
    pub verdicts: Vec<KneserVerdict>,
    pub cross_links: Vec<CrossLink>,
    pub transfer: Section<TransferReport>,
    pub perturbed: Section<PerturbedVerdicts>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetSection {
    pub budget: NegativeSquaresBudget,
    pub pair_bound: Section<PairBoundCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureSection {
    pub rank: Section<RankCheck>,
    pub inertia_shift: Section<InertiaShiftCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub tool: ToolInfo,
    /// The full problem, defaults filled in.
    pub problem: ProblemSpec,
    pub hypotheses: Section<HypothesisReport>,
    pub comparison: Section<Vec<ComparisonReport>>,
    pub spectrum: Section<SpectrumReport>,
    pub kneser: Section<KneserSection>,
    pub budget: Section<BudgetSection>,
    pub counts: Section<Vec<CountEstimate>>,
    pub structure: Section<StructureSection>,
}

impl AnalysisReport {
    /// A report with every section skipped.
    pub fn empty(problem: ProblemSpec) -> Self {
        AnalysisReport {
            schema_version: REPORT_SCHEMA_VERSION,
            tool: ToolInfo::default(),
            problem,
            hypotheses: Section::skipped("disabled"),
            comparison: Section::skipped("disabled"),
            spectrum: Section::skipped("disabled"),
            kneser: Section::skipped("disabled"),
            budget: Section::skipped("disabled"),
            counts: Section::skipped("disabled"),
            structure: Section::skipped("disabled"),
        }
    }
}

/// Lazily computed results shared between sections.
struct Ctx<'a> {
    spec: &'a ProblemSpec,
    field: CoefficientField,
    perturbed: Option<CoefficientField>,
    plan: ScanPlan,
    hypotheses: OnceCell<Result<HypothesisReport>>,
    essential: OnceCell<EssentialSection>,
    spectrum: OnceCell<Result<SpectrumReport>>,
    eta: OnceCell<Result<f64>>,
    budget: OnceCell<Result<NegativeSquaresBudget>>,
}

impl<'a> Ctx<'a> {
    fn hypotheses(&self) -> &Result<HypothesisReport> {
        self.hypotheses.get_or_init(|| check_hypotheses(&self.field, &self.plan))
    }

    fn essential(&self) -> &EssentialSection {
        self.essential
            .get_or_init(|| essential_section(&self.field, self.spec.numerics.k_max, &self.plan))
    }

    fn spectrum_config(&self) -> SpectrumConfig {
        let n = &self.spec.numerics;
        SpectrumConfig {
            levels: n.levels.clone(),
            density: n.density,
            eig: n.eig_options(),
            k_max: n.k_max,
            sweep_levels: n.sweep_levels.clone(),
            sweep_delta: n.sweep_delta,
        }
    }

    fn spectrum(&self) -> &Result<SpectrumReport> {
        self.spectrum
            .get_or_init(|| build_spectrum_report(&self.field, &self.spectrum_config()))
    }

    fn eta(&self) -> &Result<f64> {
        self.eta.get_or_init(|| {
            if let Some(e) = self.spec.numerics.eta {
                return Ok(e);
            }
            let ess = self.essential();
            let (p, m) = match (&ess.plus, &ess.minus) {
                (Some(p), Some(m)) => (&p.bands, &m.bands),
                _ => return Err(Error::Hypothesis("essential spectrum unknown; cannot choose eta".into())),
            };
            default_eta(eta_range(p, m), self.spec.numerics.allow_edge_eta)
        })
    }

    fn budget(&self) -> &Result<NegativeSquaresBudget> {
        self.budget.get_or_init(|| {
            let eta = self.eta().clone()?;
            let ess = self.essential();
            let (p, m) = match (&ess.plus, &ess.minus) {
                (Some(p), Some(m)) => (&p.bands, &m.bands),
                _ => return Err(Error::Hypothesis("essential spectrum unknown".into())),
            };
            let cfg = BudgetConfig {
                density: self.spec.numerics.density,
                allow_edge: self.spec.numerics.allow_edge_eta,
            };
            kappa_budget(&self.field, p, m, eta, &self.spec.numerics.levels, &cfg)
        })
    }
}

/// Middle of the admissible range `(sup sigma_ess(-H_-), inf sigma_ess(H_+))`,
/// or its single point when degenerate and edges are allowed.
pub fn default_eta(range: (f64, f64), allow_edge: bool) -> Result<f64> {
    let (lo, hi) = range;
    if lo < hi {
        return Ok(match (lo.is_finite(), hi.is_finite()) {
            (true, true) => 0.5 * (lo + hi) + 0.0,
            (true, false) => lo + 1.0,
            (false, true) => hi - 1.0,
            (false, false) => 0.0,
        });
    }
    if lo == hi && allow_edge {
        return Ok(lo + 0.0);
    }
    Err(Error::Hypothesis(format!(
        "no admissible eta: range ({lo}, {hi}) is empty{}",
        if lo == hi { " (set allow_edge_eta to use the edge)" } else { "" }
    )))
}

fn clone_section<T: Clone>(r: &Result<T>) -> Section<T> {
    Section::from_result(r.clone())
}

/// Run every enabled section of the problem.
pub fn run_pipeline(spec: &ProblemSpec) -> Result<AnalysisReport> {
    spec.validate()?;
    let ctx = Ctx {
        spec,
        field: spec.field()?,
        perturbed: spec.perturbed_field()?,
        plan: ScanPlan::default(),
        hypotheses: OnceCell::new(),
        essential: OnceCell::new(),
        spectrum: OnceCell::new(),
        eta: OnceCell::new(),
        budget: OnceCell::new(),
    };
    let on = spec.sections;
    let mut report = AnalysisReport::empty(spec.clone());

    if on.hypotheses {
        report.hypotheses = clone_section(ctx.hypotheses());
    }
    let gate = match ctx.hypotheses() {
        Ok(h) if h.all_pass() => None,
        Ok(_) => Some("a hypothesis check failed; set override_hypotheses to run anyway".to_string()),
        Err(e) => Some(format!("hypothesis checks could not run: {e}")),
    };
    let gate = if spec.override_hypotheses { None } else { gate };
    let run = |enabled: bool| -> Option<String> {
        if !enabled {
            Some("disabled".into())
        } else {
            gate.clone()
        }
    };

    report.comparison = match run(on.comparison) {
        Some(r) => Section::skipped(r),
        None => comparison_section(&ctx),
    };
    report.spectrum = match run(on.spectrum) {
        Some(r) => Section::skipped(r),
        None => clone_section(ctx.spectrum()),
    };
    report.kneser = match run(on.kneser) {
        Some(r) => Section::skipped(r),
        None => kneser_section(&ctx),
    };
    report.budget = match run(on.budget) {
        Some(r) => Section::skipped(r),
        None => budget_section(&ctx),
    };
    report.counts = match run(on.counts) {
        Some(r) => Section::skipped(r),
        None => counts_section(&ctx),
    };
    report.structure = match run(on.structure) {
        Some(r) => Section::skipped(r),
        None => Section::Ok(structure_section(&ctx)),
    };
    Ok(report)
}

fn comparison_section(ctx: &Ctx) -> Section<Vec<ComparisonReport>> {
    let Some(c1) = &ctx.perturbed else {
        return Section::skipped("no perturbed coefficients");
    };
    Section::from_result(
        ctx.spec
            .numerics
            .comparison_modes
            .iter()
            .map(|&m| check_comparison_conditions(&ctx.field, c1, m, &ctx.plan))
            .collect(),
    )
}

/// Declared limits, else limits estimated from tail samples.
fn endpoint_limits(ctx: &Ctx) -> Result<(EndpointLimits, LimitsSource)> {
    if let Some(l) = ctx.field.declared_limits() {
        return Ok((l, LimitsSource::Declared));
    }
    let est = estimate_endpoint_limits(&ctx.field, &ctx.plan)?;
    match est.limits() {
        Some(l) => {
            l.validate()?;
            Ok((l, LimitsSource::Estimated))
        }
        None => Err(Error::Numerical("endpoint limits could not be estimated".into())),
    }
}

fn verdict_pair(
    field: &CoefficientField,
    lim: &EndpointLimits,
    n: u32,
    margin: f64,
) -> Result<Vec<KneserVerdict>> {
    [Side::Minus, Side::Plus]
        .iter()
        .map(|&s| kneser_verdict(field, lim, n, s, &TailPlan::default(), margin))
        .collect()
}

fn agreement(k: Verdict, s: Option<AccVerdict>) -> Agreement {
    match (k, s) {
        (Verdict::Accumulate, Some(AccVerdict::Accumulating)) | (Verdict::NoAccumulate, Some(AccVerdict::Finite)) => {
            Agreement::Agree
        }
        (Verdict::Accumulate, Some(AccVerdict::Finite)) | (Verdict::NoAccumulate, Some(AccVerdict::Accumulating)) => {
            Agreement::Disagree
        }
        _ => Agreement::Undetermined,
    }
}

fn kneser_section(ctx: &Ctx) -> Section<KneserSection> {
    let n = &ctx.spec.numerics;
    let periodic = |m: &EndpointMeta| matches!(m, EndpointMeta::Period { .. });
    if periodic(&ctx.field.meta_a) || periodic(&ctx.field.meta_b) {
        return Section::skipped("Kneser verdicts need coefficient limits at both endpoints");
    }
    let (lim, source) = match endpoint_limits(ctx) {
        Ok(v) => v,
        Err(e) => return Section::from_result(Err(e)),
    };
    let verdicts = match verdict_pair(&ctx.field, &lim, n.kneser_order, n.margin) {
        Ok(v) => v,
        Err(e) => return Section::from_result(Err(e)),
    };
    let sweep_levels = n.sweep_levels.as_ref().unwrap_or(&n.levels);
    let cross_links = verdicts
        .iter()
        .map(|v| {
            // Plus edge: lower end of sigma_ess(H_+), approached from below.
            // Minus edge: upper end of sigma_ess(-H_-), approached from above.
            let approach = match v.side {
                Side::Plus => Approach::Below,
                Side::Minus => Approach::Above,
            };
            let sweep = Section::from_result(accumulation_sweep(
                &ctx.field,
                v.side,
                v.edge,
                approach,
                sweep_levels,
                n.density,
                n.sweep_delta,
            ));
            let agreement = agreement(v.verdict, sweep.ok().map(|e| e.verdict));
            CrossLink {
                side: v.side,
                edge: v.edge,
                kneser: v.verdict,
                sweep,
                agreement,
            }
        })
        .collect();
    let (transfer, perturbed) = match &ctx.perturbed {
        None => (
            Section::skipped("no perturbed coefficients"),
            Section::skipped("no perturbed coefficients"),
        ),
        Some(c1) => {
            let t = perturbation_transfer_check(&ctx.field, c1, n.transfer_order, &TailPlan::default(), n.transfer_tol);
            let inherited = t.as_ref().map(|t| t.pass).unwrap_or(false);
            let direct = verdict_pair(c1, &lim, n.kneser_order, n.margin).map(|vs| {
                let identical = vs.iter().zip(&verdicts).all(|(a, b)| a.verdict == b.verdict);
                PerturbedVerdicts {
                    inherited,
                    verdicts: vs,
                    identical,
                }
            });
            (Section::from_result(t), Section::from_result(direct))
        }
    };
    Section::Ok(KneserSection {
        limits: lim,
        limits_source: source,
        order: n.kneser_order,
        margin: n.margin,
        verdicts,
        cross_links,
        transfer,
        perturbed,
    })
}

fn budget_section(ctx: &Ctx) -> Section<BudgetSection> {
    let budget = match ctx.budget() {
        Ok(b) => b.clone(),
        Err(e) => return Section::from_result(Err(e.clone())),
    };
    let pair_bound = match ctx.spectrum() {
        Ok(s) => Section::from_result(pair_bound_check(&budget, s)),
        Err(e) => Section::from_result(Err(e.clone())),
    };
    Section::Ok(BudgetSection { budget, pair_bound })
}

/// Bounds on the real eigenvalues in `(sup sigma_ess(-H_-), eta)` and
/// `(eta, inf sigma_ess(H_+))` at every truncation level.
fn counts_section(ctx: &Ctx) -> Section<Vec<CountEstimate>> {
    let budget = match ctx.budget() {
        Ok(b) if b.available => b,
        Ok(b) => return Section::from_result(Err(Error::Numerical(format!("budget unavailable: {}", b.reason)))),
        Err(e) => return Section::from_result(Err(e.clone())),
    };
    let spectrum = match ctx.spectrum() {
        Ok(s) => s,
        Err(e) => return Section::from_result(Err(e.clone())),
    };
    let (lo, hi) = budget.eta_range;
    let eta = budget.eta;
    let intervals: Vec<(f64, f64)> = [(lo, eta), (eta, hi)]
        .into_iter()
        .filter(|iv| iv.0 < iv.1 && iv.0.is_finite() && iv.1.is_finite())
        .collect();
    if intervals.is_empty() {
        return Section::skipped("no finite interval between eta and the essential spectrum");
    }
    let n = &ctx.spec.numerics;
    let mut out = Vec::new();
    for level in &spectrum.levels {
        for &iv in &intervals {
            match count_estimate(&ctx.field, iv, &level.real, level.level, n.density, budget.kappa) {
                Ok(c) => out.push(c),
                Err(e) => return Section::from_result(Err(e)),
            }
        }
    }
    Section::Ok(out)
}

fn structure_section(ctx: &Ctx) -> StructureSection {
    let n = &ctx.spec.numerics;
    let eta = ctx.eta().clone().unwrap_or(0.0);
    StructureSection {
        rank: Section::from_result(resolvent_rank_check(
            &ctx.field,
            n.structure_level,
            n.density,
            Complex64::i(),
            n.structure_tol,
        )),
        inertia_shift: Section::from_result(inertia_shift_check(&ctx.field, eta, n.structure_level, n.density)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::SideLimits;

    fn small(name: &str, r: &str, q: &str) -> ProblemSpec {
        let mut s = ProblemSpec::new(name, r, "1", q);
        s.numerics.levels = vec![8.0, 12.0, 16.0];
        s.numerics.density = 6.0;
        s.numerics.structure_level = 6.0;
        s
    }

    #[test]
    fn eta_defaults() {
        assert_eq!(default_eta((-1.0, 1.0), false).unwrap(), 0.0);
        assert_eq!(default_eta((0.0, 0.0), true).unwrap(), 0.0);
        assert!(default_eta((0.0, 0.0), false).is_err());
        assert!(default_eta((1.0, -1.0), true).is_err());
    }

    #[test]
    fn gap_problem_runs_every_section() {
        let mut s = small("gap", "sgn(x)", "1");
        s.window = Some(crate::problem::WindowSpec { alpha: 0.0, beta: 0.0 });
        let l = SideLimits { r: -1.0, p: 1.0, q: 1.0 };
        s.endpoints.minus = EndpointMeta::Limits(l);
        s.endpoints.plus = EndpointMeta::Limits(SideLimits { r: 1.0, ..l });
        s.perturbed = Some(crate::problem::TripleSource {
            r: "sgn(x)".into(),
            p: "1".into(),
            q: "1 + exp(-x^2)".into(),
        });
        let r = run_pipeline(&s).unwrap();
        assert!(r.hypotheses.is_ok());
        assert!(r.comparison.is_ok(), "{:?}", r.comparison);
        assert!(r.spectrum.is_ok());
        let k = r.kneser.ok().unwrap();
        assert_eq!(k.verdicts.len(), 2);
        assert!(k.verdicts.iter().all(|v| v.verdict == Verdict::NoAccumulate), "{:?}", k.verdicts);
        assert!(k.cross_links.iter().all(|c| c.agreement == Agreement::Agree), "{:?}", k.cross_links);
        assert!(k.transfer.ok().unwrap().pass);
        assert!(k.perturbed.ok().unwrap().identical);
        let b = r.budget.ok().unwrap();
        assert_eq!(b.budget.eta, 0.0);
        assert!(b.pair_bound.ok().unwrap().pass);
        let c = r.counts.ok().unwrap();
        assert_eq!(c.len(), 6);
        assert!(c.iter().all(|c| c.pass));
        let st = r.structure.ok().unwrap();
        assert!(st.rank.ok().unwrap().pass && st.inertia_shift.ok().unwrap().pass);
    }

    #[test]
    fn failed_hypotheses_skip_sections_unless_overridden() {
        // q / r is unbounded at both ends.
        let mut s = small("unbounded", "sgn(x)", "x^2");
        s.window = Some(crate::problem::WindowSpec { alpha: 0.0, beta: 0.0 });
        let r = run_pipeline(&s).unwrap();
        assert!(matches!(r.hypotheses, Section::Ok(ref h) if !h.all_pass()));
        assert!(matches!(r.spectrum, Section::Skipped { .. }));
        let mut o = s.clone();
        o.override_hypotheses = true;
        o.sections.kneser = false;
        o.sections.budget = false;
        o.sections.counts = false;
        o.sections.structure = false;
        let r = run_pipeline(&o).unwrap();
        assert!(r.spectrum.is_ok(), "{:?}", r.spectrum);
        let d = run_pipeline(&small("definite", "1", "1")).unwrap();
        assert!(matches!(d.hypotheses, Section::Ok(ref h) if !h.all_pass()));
    }

    #[test]
    fn disabling_a_section_leaves_others_unchanged() {
        let mut s = small("coulomb", "sgn(x)", "-1/(1+abs(x))");
        s.window = Some(crate::problem::WindowSpec { alpha: 0.0, beta: 0.0 });
        let full = run_pipeline(&s).unwrap();
        let mut t = s.clone();
        t.sections.spectrum = false;
        let part = run_pipeline(&t).unwrap();
        assert_eq!(js(&full.budget), js(&part.budget));
        assert_eq!(js(&full.kneser), js(&part.kneser));
        assert_eq!(js(&full.structure), js(&part.structure));
        assert!(matches!(part.spectrum, Section::Skipped { .. }));
    }

    fn js<T: Serialize>(v: &T) -> String {
        serde_json::to_string(v).unwrap()
    }
}
