//! Problem files: the coefficient triples, endpoint metadata and numerics of
//! one analysis, read from JSON with field-path error messages.

use serde::{Deserialize, Serialize};

use crate::coeff::{CoefficientField, ComparisonMode, EndpointMeta};
use crate::eigen::{EigOptions, Method};
use crate::error::{Error, Result};
use crate::extnum::ext_f64;
use crate::expr::CoeffExpr;

pub const SCHEMA_VERSION: u32 = 1;

/// Expression sources for `r`, `p` and `q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripleSource {
    pub r: String,
    pub p: String,
    pub q: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalSpec {
    #[serde(with = "ext_f64")]
    pub a: f64,
    #[serde(with = "ext_f64")]
    pub b: f64,
}

impl Default for IntervalSpec {
    fn default() -> Self {
        IntervalSpec {
            a: f64::NEG_INFINITY,
            b: f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub alpha: f64,
    pub beta: f64,
}

/// One regime per endpoint; `unknown` asks for estimated limits.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointsSpec {
    #[serde(default)]
    pub minus: EndpointMeta,
    #[serde(default)]
    pub plus: EndpointMeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    /// Symmetric truncations `X`, strictly increasing, at least three.
    pub levels: Vec<f64>,
    /// Grid cells per unit length.
    pub density: f64,
    /// Spectral parameter of the negative-squares budget; the middle of the
    /// admissible range when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    pub allow_edge_eta: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub im_tol: Option<f64>,
    pub method: Method,
    pub dense_cap: usize,
    /// Order of the iterated-logarithm scale in the Kneser test.
    pub kneser_order: u32,
    pub margin: f64,
    /// Floquet bands per periodic side.
    pub k_max: usize,
    /// Truncations of the accumulation sweeps; `levels` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_levels: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_delta: Option<f64>,
    pub comparison_modes: Vec<ComparisonMode>,
    pub transfer_order: u32,
    pub transfer_tol: f64,
    /// Truncation of the rank and inertia checks.
    pub structure_level: f64,
    pub structure_tol: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        let eig = EigOptions::default();
        Numerics {
            levels: vec![40.0, 80.0, 160.0],
            density: 10.0,
            eta: None,
            allow_edge_eta: false,
            im_tol: None,
            method: eig.method,
            dense_cap: eig.dense_cap,
            kneser_order: 0,
            margin: 0.02,
            k_max: 10,
            sweep_levels: None,
            sweep_delta: None,
            comparison_modes: vec![ComparisonMode::Limits, ComparisonMode::L1, ComparisonMode::FirstMoment],
            transfer_order: 1,
            transfer_tol: 1e-3,
            structure_level: 10.0,
            structure_tol: 1e-8,
        }
    }
}

impl Numerics {
    pub fn eig_options(&self) -> EigOptions {
        EigOptions {
            method: self.method,
            im_tol: self.im_tol,
            dense_cap: self.dense_cap,
            ..EigOptions::default()
        }
    }
}

/// Which report sections run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sections {
    pub hypotheses: bool,
    pub comparison: bool,
    pub spectrum: bool,
    pub kneser: bool,
    pub budget: bool,
    pub counts: bool,
    pub structure: bool,
}

impl Default for Sections {
    fn default() -> Self {
        Sections {
            hypotheses: true,
            comparison: true,
            spectrum: true,
            kneser: true,
            budget: true,
            counts: true,
            structure: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub schema_version: u32,
    pub name: String,
    pub coefficients: TripleSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbed: Option<TripleSource>,
    #[serde(default)]
    pub interval: IntervalSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<WindowSpec>,
    #[serde(default)]
    pub endpoints: EndpointsSpec,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub sections: Sections,
    /// Run every section even when a hypothesis check fails.
    #[serde(default)]
    pub override_hypotheses: bool,
}

impl ProblemSpec {
    /// A spec on the whole line with default numerics.
    pub fn new(name: &str, r: &str, p: &str, q: &str) -> Self {
        ProblemSpec {
            schema_version: SCHEMA_VERSION,
            name: name.into(),
            coefficients: TripleSource {
                r: r.into(),
                p: p.into(),
                q: q.into(),
            },
            perturbed: None,
            interval: IntervalSpec::default(),
            window: None,
            endpoints: EndpointsSpec::default(),
            numerics: Numerics::default(),
            sections: Sections::default(),
            override_hypotheses: false,
        }
    }

    /// Parse and validate; errors name the offending field path.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let spec: ProblemSpec = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::validation(if path == "." { "$".into() } else { path }, e.into_inner().to_string())
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem specs always serialize")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::validation(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        check_triple("coefficients", &self.coefficients)?;
        if let Some(t) = &self.perturbed {
            check_triple("perturbed", t)?;
        }
        let n = &self.numerics;
        check_levels("numerics.levels", &n.levels)?;
        if let Some(s) = &n.sweep_levels {
            check_levels("numerics.sweep_levels", s)?;
        }
        let positive = |path: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::validation(path, format!("must be positive and finite, got {v}")))
            }
        };
        positive("numerics.density", n.density)?;
        positive("numerics.structure_level", n.structure_level)?;
        positive("numerics.structure_tol", n.structure_tol)?;
        positive("numerics.transfer_tol", n.transfer_tol)?;
        if let Some(t) = n.im_tol {
            positive("numerics.im_tol", t)?;
        }
        if let Some(d) = n.sweep_delta {
            positive("numerics.sweep_delta", d)?;
        }
        if !(n.margin >= 0.0 && n.margin.is_finite()) {
            return Err(Error::validation("numerics.margin", "must be nonnegative"));
        }
        if let Some(e) = n.eta {
            if !e.is_finite() {
                return Err(Error::validation("numerics.eta", "must be finite"));
            }
        }
        if n.k_max == 0 {
            return Err(Error::validation("numerics.k_max", "need at least one band"));
        }
        if let Some(w) = self.window {
            if !(w.alpha.is_finite() && w.beta.is_finite()) {
                return Err(Error::validation("window", "alpha and beta must be finite"));
            }
        }
        self.field()?.validate().map_err(to_file_path)?;
        Ok(())
    }

    fn build(&self, t: &TripleSource, path: &str) -> Result<CoefficientField> {
        let parse = |name: &str, src: &str| {
            CoeffExpr::parse(src).map_err(|e| Error::validation(format!("{path}.{name}"), e.to_string()))
        };
        let mut f = CoefficientField::new(parse("r", &t.r)?, parse("p", &t.p)?, parse("q", &t.q)?)
            .with_interval(self.interval.a, self.interval.b);
        if let Some(w) = self.window {
            f = f.with_window(w.alpha, w.beta);
        }
        f.meta_a = self.endpoints.minus;
        f.meta_b = self.endpoints.plus;
        Ok(f)
    }

    /// The base coefficient field.
    pub fn field(&self) -> Result<CoefficientField> {
        self.build(&self.coefficients, "coefficients")
    }

    /// The perturbed field, sharing interval, window and metadata.
    pub fn perturbed_field(&self) -> Result<Option<CoefficientField>> {
        self.perturbed.as_ref().map(|t| self.build(t, "perturbed")).transpose()
    }
}

fn check_triple(path: &str, t: &TripleSource) -> Result<()> {
    for (name, src) in [("r", &t.r), ("p", &t.p), ("q", &t.q)] {
        CoeffExpr::parse(src).map_err(|e| Error::validation(format!("{path}.{name}"), e.to_string()))?;
    }
    Ok(())
}

fn check_levels(path: &str, levels: &[f64]) -> Result<()> {
    if levels.len() < 3 {
        return Err(Error::validation(path, "need at least three truncation levels"));
    }
    if levels.iter().any(|v| !(v.is_finite() && *v > 0.0)) || levels.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::validation(path, "levels must be positive and strictly increasing"));
    }
    Ok(())
}

/// Map field-level validation paths onto problem-file paths.
fn to_file_path(e: Error) -> Error {
    match e {
        Error::Validation { path, msg } => {
            let mapped = match path.as_str() {
                "meta.minus" => "endpoints.minus".to_string(),
                "meta.plus" => "endpoints.plus".to_string(),
                "r" | "p" | "q" => format!("coefficients.{path}"),
                _ => path,
            };
            Error::Validation { path: mapped, msg }
        }
        other => other,
    }
}
