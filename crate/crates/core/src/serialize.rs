//! Report serialization: pretty JSON with shortest round-trip numbers, and a
//! flat CSV of eigenvalues.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::{AnalysisReport, Section};
use crate::spectra::LevelSpectrum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

pub const CSV_HEADER: &str = "level,re,im,residual";

pub fn serialize_report(report: &AnalysisReport, format: Format) -> Vec<u8> {
    match format {
        Format::Json => to_json(report).into_bytes(),
        Format::Csv => match &report.spectrum {
            Section::Ok(s) => eigen_csv(&s.levels),
            _ => eigen_csv(&[]),
        }
        .into_bytes(),
    }
}

/// Pretty JSON terminated by a newline.
pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report types always serialize");
    s.push('\n');
    s
}

pub fn deserialize_report(bytes: &[u8]) -> Result<AnalysisReport> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    serde_path_to_error::deserialize(de)
        .map_err(|e| Error::validation(e.path().to_string(), e.into_inner().to_string()))
}

/// One row per eigenvalue: real ones first, then both members of every
/// conjugate pair.
pub fn eigen_csv(levels: &[LevelSpectrum]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for l in levels {
        for (x, res) in l.real.iter().zip(&l.real_residuals) {
            let _ = writeln!(out, "{},{},0,{}", l.level, x, res);
        }
        for (z, res) in l.pairs.iter().zip(&l.pair_residuals) {
            let _ = writeln!(out, "{},{},{},{}", l.level, z.re, z.im, res);
            let _ = writeln!(out, "{},{},{},{}", l.level, z.re, -z.im, res);
        }
    }
    out
}
