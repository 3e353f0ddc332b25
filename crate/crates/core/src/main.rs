use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use indefsl_core::coeff::{EndpointMeta, ScanPlan, Side};
use indefsl_core::pipeline::{run_pipeline, Section};
use indefsl_core::problem::{ProblemSpec, Sections};
use indefsl_core::serialize::{eigen_csv, serialize_report, to_json, Format};
use indefsl_core::spectra::{essential_section, level_spectrum, periodic_bands, PeriodicBands};
use indefsl_core::{Error, Result};

#[derive(Parser)]
#[command(name = "indefsl", version, about = "Spectral analysis of indefinite Sturm-Liouville problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every section of the analysis.
    Analyze(Common),
    /// Essential spectrum of both half-line pieces.
    Essential(Common),
    /// Floquet bands of the periodic endpoints.
    Bands(Common),
    /// Kneser verdicts with truncation-sweep cross-checks.
    Kneser(Common),
    /// Negative-squares budget, pair bound and gap counts.
    Budget(Common),
    /// Eigenvalues of the truncated pencils.
    Eig(Common),
    /// Compare the base problem with its perturbation.
    Compare(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    /// Problem file (JSON).
    problem: PathBuf,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: OutFormat,
    /// Truncation levels, comma separated.
    #[arg(long, value_delimiter = ',')]
    trunc: Option<Vec<f64>>,
    /// Grid cells per unit length.
    #[arg(long)]
    density: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    eta: Option<f64>,
    /// Kneser order.
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    margin: Option<f64>,
    #[arg(long)]
    override_hypotheses: bool,
}

impl Common {
    fn load(&self) -> Result<ProblemSpec> {
        let text = std::fs::read_to_string(&self.problem)
            .map_err(|e| Error::validation("problem", format!("{}: {e}", self.problem.display())))?;
        let mut spec = ProblemSpec::from_json(&text)?;
        let n = &mut spec.numerics;
        if let Some(t) = &self.trunc {
            n.levels = t.clone();
        }
        if let Some(d) = self.density {
            n.density = d;
        }
        if self.eta.is_some() {
            n.eta = self.eta;
        }
        if let Some(k) = self.n {
            n.kneser_order = k;
        }
        if let Some(m) = self.margin {
            n.margin = m;
        }
        spec.override_hypotheses |= self.override_hypotheses;
        spec.validate()?;
        Ok(spec)
    }

    fn emit(&self, bytes: &[u8]) -> Result<()> {
        use std::io::Write;
        match &self.out {
            Some(p) => std::fs::write(p, bytes).map_err(|e| Error::validation("out", format!("{}: {e}", p.display()))),
            None => std::io::stdout()
                .write_all(bytes)
                .map_err(|e| Error::validation("out", e.to_string())),
        }
    }

    fn json_only(&self) -> Result<()> {
        match self.format {
            OutFormat::Json => Ok(()),
            OutFormat::Csv => Err(Error::validation("format", "csv is only available for analyze and eig")),
        }
    }
}

fn only(sections: &[&str]) -> Sections {
    let has = |s: &str| sections.contains(&s);
    Sections {
        hypotheses: has("hypotheses"),
        comparison: has("comparison"),
        spectrum: has("spectrum"),
        kneser: has("kneser"),
        budget: has("budget"),
        counts: has("counts"),
        structure: has("structure"),
    }
}

#[derive(Serialize)]
struct BandsOutput {
    minus: Section<PeriodicBands>,
    plus: Section<PeriodicBands>,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze(c) => {
            let spec = c.load()?;
            let report = run_pipeline(&spec)?;
            let fmt = match c.format {
                OutFormat::Json => Format::Json,
                OutFormat::Csv => Format::Csv,
            };
            c.emit(&serialize_report(&report, fmt))
        }
        Command::Kneser(c) => sectioned(&c, &["hypotheses", "kneser"], false),
        Command::Budget(c) => sectioned(&c, &["hypotheses", "budget", "counts"], false),
        Command::Compare(c) => sectioned(&c, &["hypotheses", "comparison", "kneser"], true),
        Command::Essential(c) => {
            c.json_only()?;
            let spec = c.load()?;
            let field = spec.field()?;
            c.emit(to_json(&essential_section(&field, spec.numerics.k_max, &ScanPlan::default())).as_bytes())
        }
        Command::Bands(c) => {
            c.json_only()?;
            let spec = c.load()?;
            let field = spec.field()?;
            let side = |s: Side| match field.meta(s) {
                EndpointMeta::Period { .. } => Section::from_result(periodic_bands(&field, s, spec.numerics.k_max)),
                _ => Section::skipped("endpoint is not periodic"),
            };
            let out = BandsOutput {
                minus: side(Side::Minus),
                plus: side(Side::Plus),
            };
            c.emit(to_json(&out).as_bytes())
        }
        Command::Eig(c) => {
            let spec = c.load()?;
            let field = spec.field()?;
            let opts = spec.numerics.eig_options();
            let levels = spec
                .numerics
                .levels
                .iter()
                .map(|&x| level_spectrum(&field, x, spec.numerics.density, &opts))
                .collect::<Result<Vec<_>>>()?;
            match c.format {
                OutFormat::Json => c.emit(to_json(&levels).as_bytes()),
                OutFormat::Csv => c.emit(eigen_csv(&levels).as_bytes()),
            }
        }
    }
}

fn sectioned(c: &Common, sections: &[&str], needs_perturbed: bool) -> Result<()> {
    c.json_only()?;
    let mut spec = c.load()?;
    if needs_perturbed && spec.perturbed.is_none() {
        return Err(Error::validation("perturbed", "compare needs a perturbed triple"));
    }
    spec.sections = only(sections);
    c.emit(&serialize_report(&run_pipeline(&spec)?, Format::Json))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("indefsl: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 3 })
        }
    }
}
