//! `ecslab`: run the identity suites and print constant, eigenvalue and
//! coefficient tables.
//!
//! Exit codes: 0 every check passed, 1 some check failed, 2 a parameter
//! constraint was violated, 3 a numerical-domain error occurred.

mod output;
mod parse;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::builder::{PossibleValuesParser, TypedValueParser};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ecslab::fd::StencilSpec;
use ecslab::states::QuadratureSpec;
use ecslab::verify::{run_suite, Dressing, Suite, SuiteOptions, SuiteParams};
use ecslab::{Complex64, EllipticContext, Error, TruncationPolicy};
use serde::Serialize;

use output::{Format, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "ecslab", version, about = "Residual suites and tables for elliptic Calogero-Sutherland kernel identities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a verification suite and write its residual report.
    Verify {
        #[arg(value_enum)]
        suite: SuiteArg,
        #[command(flatten)]
        flags: Flags,
    },
    /// Print a table of eigenvalues, constants or Laurent coefficients.
    Table {
        #[arg(value_enum)]
        kind: TableKind,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SuiteArg {
    Appendix,
    Prop1,
    Cor1,
    Cor2,
    Cor3,
    Lemma1,
    Shift,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Appendix => Suite::Appendix,
            SuiteArg::Prop1 => Suite::Prop1,
            SuiteArg::Cor1 => Suite::Cor1,
            SuiteArg::Cor2 => Suite::Cor2,
            SuiteArg::Cor3 => Suite::Cor3,
            SuiteArg::Lemma1 => Suite::Lemma1,
            SuiteArg::Shift => Suite::Shift,
            SuiteArg::All => Suite::All,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TableKind {
    Eigenvalues,
    Constants,
    Coefficients,
}

/// Flags shared by both subcommands; each subcommand reads the ones it needs.
#[derive(Debug, Clone, Args, Serialize)]
pub struct Flags {
    /// Inverse temperature β (comma-separated list allowed for tables).
    #[arg(long, value_delimiter = ',', conflicts_with = "q")]
    pub beta: Vec<f64>,
    /// Nome q = e^{-β/2}; 0 selects the trigonometric limit.
    #[arg(long)]
    pub q: Option<f64>,
    /// Coupling, e.g. 1.3 or 1.3-0.4i.
    #[arg(long, value_parser = parse::complex, allow_hyphen_values = true)]
    pub lambda: Option<Complex64>,
    /// Particle number of the many-body operator.
    #[arg(long = "calN")]
    pub cal_n: Option<usize>,
    /// Comma-separated masses, complex allowed.
    #[arg(long, value_delimiter = ',', value_parser = parse::complex, allow_hyphen_values = true)]
    pub masses: Option<Vec<Complex64>>,
    #[arg(long = "N", value_delimiter = ',')]
    pub n: Vec<usize>,
    #[arg(long = "Ntilde", value_delimiter = ',')]
    pub n_tilde: Vec<usize>,
    #[arg(long = "M")]
    pub m: Option<usize>,
    #[arg(long = "Mtilde")]
    pub m_tilde: Option<usize>,
    /// Laurent labels, e.g. -2..3 (inclusive).
    #[arg(long = "n", value_parser = parse::label_range, allow_hyphen_values = true)]
    pub labels: Option<(i64, i64)>,
    /// Plane-wave dressing velocity.
    #[arg(long, allow_hyphen_values = true)]
    pub v: Option<f64>,
    /// Plane-wave dressing constant (default 1).
    #[arg(long, value_parser = parse::complex, allow_hyphen_values = true, requires = "v")]
    pub c: Option<Complex64>,
    /// Constant added to V in the shifted-constant table.
    #[arg(long, allow_hyphen_values = true)]
    pub b0: Option<f64>,
    /// β-log-derivative of the θ rescaling in the shifted-constant table.
    #[arg(long, allow_hyphen_values = true)]
    pub b1: Option<f64>,
    /// Positions x (radians) for the coefficient table.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Option<Vec<f64>>,
    /// Positions x̃ (radians) for the coefficient table.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub xt: Option<Vec<f64>>,
    /// Samples per check (suite default when absent).
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Override the tolerance of every residual check.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file (standard output when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long = "fd-order", default_value_t = 4, value_parser = PossibleValuesParser::new(["2", "4", "6"]).map(|s| s.parse::<u8>().unwrap()))]
    pub fd_order: u8,
    #[arg(long = "fd-step", default_value_t = 1e-3)]
    pub fd_step: f64,
    #[arg(long = "fd-levels", default_value_t = 1)]
    pub fd_levels: u32,
    #[arg(long = "quad-nodes", default_value_t = 256)]
    pub quad_nodes: usize,
    #[arg(long = "quad-radius")]
    pub quad_radius: Option<f64>,
    /// Minimal pair separation of sampled configurations.
    #[arg(long = "min-sep", default_value_t = 0.2)]
    pub min_sep: f64,
    /// Leave wall-time fields out so identical runs give identical bytes.
    #[arg(long = "omit-timing")]
    pub omit_timing: bool,
}

impl Flags {
    /// The single β/q context requested, if any.
    pub fn context(&self) -> Result<Option<EllipticContext>, Error> {
        match (self.beta.as_slice(), self.q) {
            ([], None) => Ok(None),
            ([], Some(q)) => nome_context(q).map(Some),
            ([b], None) => beta_context(*b).map(Some),
            _ => Err(Error::Constraint("give a single --beta or --q".into())),
        }
    }

    /// Every requested context, for tables; β = 2.5 when none is given.
    pub fn contexts(&self) -> Result<Vec<EllipticContext>, Error> {
        match (self.beta.as_slice(), self.q) {
            ([], None) => Ok(vec![beta_context(2.5)?]),
            ([], Some(q)) => Ok(vec![nome_context(q)?]),
            (bs, _) => bs.iter().map(|&b| beta_context(b)).collect(),
        }
    }

    pub fn stencil(&self) -> StencilSpec {
        StencilSpec {
            order: self.fd_order,
            h: self.fd_step,
            richardson_levels: self.fd_levels,
        }
    }

    pub fn quad(&self) -> QuadratureSpec {
        QuadratureSpec {
            nodes: self.quad_nodes,
            radius: self.quad_radius,
            ..QuadratureSpec::default()
        }
    }

    pub fn dressing(&self) -> Option<Dressing> {
        self.v.map(|v| Dressing {
            v,
            c: self.c.unwrap_or(Complex64::new(1.0, 0.0)),
        })
    }

    fn single(list: &[usize], name: &str) -> Result<Option<usize>, Error> {
        match list {
            [] => Ok(None),
            [x] => Ok(Some(*x)),
            _ => Err(Error::Constraint(format!("--{name} takes a single value here"))),
        }
    }
}

// Invalid β or q is a parameter problem, not a numerical one.
fn beta_context(beta: f64) -> Result<EllipticContext, Error> {
    EllipticContext::new(beta).map_err(|e| Error::Constraint(format!("--beta {beta}: {e}")))
}

fn nome_context(q: f64) -> Result<EllipticContext, Error> {
    if q == 0.0 {
        return Ok(EllipticContext::trigonometric());
    }
    EllipticContext::from_nome(q, TruncationPolicy::default()).map_err(|e| Error::Constraint(format!("--q {q}: {e}")))
}

fn validate(flags: &Flags) -> Result<(), Error> {
    flags.stencil().validate()?;
    if flags.quad_nodes < 16 || !flags.quad_nodes.is_multiple_of(2) {
        return Err(Error::Constraint(format!("--quad-nodes must be even and >= 16, got {}", flags.quad_nodes)));
    }
    if let Some(t) = flags.tol {
        if !(t > 0.0) {
            return Err(Error::Constraint(format!("--tol must be positive, got {t}")));
        }
    }
    if !(flags.min_sep > 0.0) {
        return Err(Error::Constraint(format!("--min-sep must be positive, got {}", flags.min_sep)));
    }
    Ok(())
}

fn verify(suite: SuiteArg, flags: &Flags) -> Result<bool, Error> {
    validate(flags)?;
    let params = SuiteParams {
        ctx: flags.context()?,
        lambda: flags.lambda,
        masses: flags.masses.clone(),
        count: flags.cal_n,
        n: Flags::single(&flags.n, "N")?,
        n_tilde: Flags::single(&flags.n_tilde, "Ntilde")?,
        m: flags.m,
        m_tilde: flags.m_tilde,
        labels: flags.labels,
        dressing: flags.dressing(),
    };
    let opts = SuiteOptions {
        samples: flags.samples,
        seed: flags.seed,
        tol: flags.tol,
        stencil: flags.stencil(),
        quad: flags.quad(),
        min_sep: flags.min_sep,
    };
    let manifest = RunManifest::new("verify", serde_json::to_value(suite).unwrap_or_default(), flags);
    let report = run_suite(suite.into(), &params, &opts)?;
    output::write_suite(&manifest, &report, flags)?;
    Ok(report.pass)
}

fn run(cli: Cli) -> Result<bool, Box<(Error, RunManifest)>> {
    match cli.command {
        Command::Verify { suite, flags } => verify(suite, &flags).map_err(|e| {
            Box::new((e, RunManifest::new("verify", serde_json::to_value(suite).unwrap_or_default(), &flags)))
        }),
        Command::Table { kind, flags } => {
            let manifest = RunManifest::new("table", serde_json::to_value(kind).unwrap_or_default(), &flags);
            validate(&flags)
                .and_then(|_| table::build(kind, &flags))
                .and_then(|t| output::write_table(&manifest, &t, &flags))
                .map(|_| true)
                .map_err(|e| Box::new((e, manifest)))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(failure) => {
            let (err, manifest) = *failure;
            output::report_error(&manifest, &err);
            ExitCode::from(if err.is_constraint() { 2 } else { 3 })
        }
    }
}
