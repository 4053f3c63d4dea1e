//! Report serialisation: JSON objects or flat CSV.

use std::fs::File;
use std::io::{self, BufWriter, Write};

use clap::ValueEnum;
use ecslab::verify::SuiteReport;
use ecslab::Error;
use serde::Serialize;
use serde_json::{json, Value};

use crate::table::Table;
use crate::Flags;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Everything needed to reproduce a run; copied verbatim into its output.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: &'static str,
    pub target: Value,
    pub seed: u64,
    pub tolerance_override: Option<f64>,
    pub output: Option<String>,
    pub format: Format,
    pub parameters: Value,
}

impl RunManifest {
    pub fn new(subcommand: &'static str, target: Value, flags: &Flags) -> Self {
        Self {
            tool: "ecslab",
            version: env!("CARGO_PKG_VERSION"),
            subcommand,
            target,
            seed: flags.seed,
            tolerance_override: flags.tol,
            output: flags.out.as_ref().map(|p| p.display().to_string()),
            format: flags.format,
            parameters: serde_json::to_value(flags).unwrap_or(Value::Null),
        }
    }
}

fn sink(flags: &Flags) -> Result<Box<dyn Write>, Error> {
    match &flags.out {
        Some(path) => File::create(path)
            .map(|f| Box::new(BufWriter::new(f)) as Box<dyn Write>)
            .map_err(|e| Error::Constraint(format!("cannot write {}: {e}", path.display()))),
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Constraint(format!("cannot write output: {e}"))
}

fn write_json(value: &Value, flags: &Flags) -> Result<(), Error> {
    let mut w = sink(flags)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(io_err)?;
    writeln!(w).and_then(|_| w.flush()).map_err(io_err)
}

pub fn write_suite(manifest: &RunManifest, report: &SuiteReport, flags: &Flags) -> Result<(), Error> {
    let report = if flags.omit_timing { report.canonical() } else { report.clone() };
    match flags.format {
        Format::Json => {
            let mut v = json!({
                "manifest": manifest,
                "suite": report.suite,
                "checks": report.checks,
                "pass": report.pass,
            });
            if let Some(ms) = report.elapsed_ms {
                v["elapsed_ms"] = json!(ms);
            }
            write_json(&v, flags)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(sink(flags)?);
            w.write_record([
                "suite",
                "check",
                "check_pass",
                "tolerance",
                "derived",
                "seed",
                "label",
                "backend",
                "residual_abs",
                "scale",
                "rel_residual",
                "error_estimate",
                "coords",
                "params",
            ])
            .map_err(io_err)?;
            for c in &report.checks {
                for s in &c.samples {
                    let coords: Vec<String> = s.coords.iter().map(|x| format!("{x:?}")).collect();
                    w.write_record([
                        report.suite.clone(),
                        c.id.clone(),
                        c.pass.to_string(),
                        format!("{:e}", c.tolerance),
                        c.derived.to_string(),
                        s.seed.to_string(),
                        s.label.clone().unwrap_or_default(),
                        s.backend
                            .and_then(|b| serde_json::to_value(b).ok().and_then(|v| v.as_str().map(String::from)))
                            .unwrap_or_default(),
                        format!("{:e}", s.residual_abs),
                        format!("{:e}", s.scale),
                        format!("{:e}", s.rel_residual),
                        s.error_estimate.map(|e| format!("{e:e}")).unwrap_or_default(),
                        coords.join(" "),
                        s.params.as_ref().map(Value::to_string).unwrap_or_default(),
                    ])
                    .map_err(io_err)?;
                }
            }
            w.flush().map_err(io_err)
        }
    }
}

pub fn write_table(manifest: &RunManifest, table: &Table, flags: &Flags) -> Result<(), Error> {
    match flags.format {
        Format::Json => write_json(
            &json!({ "manifest": manifest, "table": table.kind, "columns": table.columns, "rows": table.rows }),
            flags,
        ),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(sink(flags)?);
            w.write_record(&table.columns).map_err(io_err)?;
            for row in &table.rows {
                w.write_record(row.iter().map(|v| match v {
                    Value::String(s) => s.clone(),
                    Value::Null => String::new(),
                    other => other.to_string(),
                }))
                .map_err(io_err)?;
            }
            w.flush().map_err(io_err)
        }
    }
}

/// Error record on standard error, with the parameters that caused it.
pub fn report_error(manifest: &RunManifest, err: &Error) {
    let kind = if err.is_constraint() { "constraint" } else { "numerical" };
    let v = json!({ "manifest": manifest, "error": { "kind": kind, "message": err.to_string() } });
    eprintln!("{}", serde_json::to_string_pretty(&v).unwrap_or_else(|_| err.to_string()));
}
