use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use rayon::prelude::*;

use drlint::engine::Firing;
use drlint::extract::{extract_model, SourceUnit};
use drlint::report::{lint_detailed, FaultReport};
use drlint::rules::{load_rules_with, BUILTIN_CATALOG};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

/// Static fault detection for DQN-style reinforcement learning programs.
#[derive(Debug, Parser)]
#[command(name = "drlint", version)]
struct Cli {
    /// Python source files to lint.
    #[arg(required = true)]
    files: Vec<PathBuf>,

    /// Rule document to use instead of the built-in catalog.
    #[arg(long, value_name = "PATH")]
    rules: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "json")]
    format: Format,

    /// Print the extracted model graph instead of a report.
    #[arg(long)]
    dump_model: bool,

    /// Log every rule firing to stderr.
    #[arg(long)]
    trace: bool,

    /// Override a rule-document threshold, e.g. `--threshold epsFinalMax=0.1`.
    #[arg(long = "threshold", value_name = "NAME=VALUE", value_parser = parse_threshold)]
    thresholds: Vec<(String, f64)>,
}

fn parse_threshold(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=VALUE, got {s:?}"))?;
    let value = value
        .trim()
        .parse()
        .map_err(|_| format!("threshold {name} is not a number: {value:?}"))?;
    Ok((name.trim().to_string(), value))
}

const EXIT_CLEAN: u8 = 0;
const EXIT_FINDINGS: u8 = 1;
const EXIT_ERROR: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    ExitCode::from(run(&cli))
}

fn run(cli: &Cli) -> u8 {
    if cli.dump_model {
        return dump_models(cli);
    }
    let document = match &cli.rules {
        Some(path) => match std::fs::read(path) {
            Ok(bytes) => bytes,
            Err(e) => {
                eprintln!("drlint: {}: {e}", path.display());
                return EXIT_ERROR;
            }
        },
        None => BUILTIN_CATALOG.as_bytes().to_vec(),
    };
    let overrides: BTreeMap<String, f64> = cli.thresholds.iter().cloned().collect();
    let rules = match load_rules_with(&document, &overrides) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("drlint: cannot load rules: {e}");
            return EXIT_ERROR;
        }
    };

    let results: Vec<Result<(FaultReport, Vec<Firing>), String>> = cli
        .files
        .par_iter()
        .map(|path| {
            let source = SourceUnit::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
            let outcome = lint_detailed(&source, &rules).map_err(|e| e.to_string())?;
            Ok((outcome.report, outcome.firings))
        })
        .collect();

    let mut failed = false;
    let mut reports = Vec::new();
    for r in results {
        match r {
            Ok((report, firings)) => {
                if cli.trace {
                    for f in &firings {
                        eprintln!("{}", trace_line(&report.source, f));
                    }
                }
                reports.push(report);
            }
            Err(e) => {
                eprintln!("drlint: {e}");
                failed = true;
            }
        }
    }

    let mut out = std::io::stdout().lock();
    let _ = match cli.format {
        Format::Json if cli.files.len() == 1 => reports
            .first()
            .map_or(Ok(()), |r| writeln!(out, "{}", r.to_json())),
        Format::Json => writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&reports).expect("reports serialize")
        ),
        Format::Text => reports
            .iter()
            .try_for_each(|r| write!(out, "{}", r.to_text())),
    };

    if failed {
        EXIT_ERROR
    } else if reports.iter().any(|r| !r.findings.is_empty()) {
        EXIT_FINDINGS
    } else {
        EXIT_CLEAN
    }
}

fn trace_line(source: &str, f: &Firing) -> String {
    let mapped: Vec<String> = f.mapped.iter().map(|(p, n)| format!("{p}={n}")).collect();
    format!(
        "{source}: {} [{}] -> {}",
        f.rule_id,
        mapped.join(" "),
        f.fault
    )
}

fn dump_models(cli: &Cli) -> u8 {
    let results: Vec<Result<serde_json::Value, String>> = cli
        .files
        .par_iter()
        .map(|path| {
            let source = SourceUnit::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
            extract_model(&source)
                .map(|g| g.to_json_value())
                .map_err(|e| format!("{}: {e}", path.display()))
        })
        .collect();
    let mut failed = false;
    let mut models = Vec::new();
    for r in results {
        match r {
            Ok(v) => models.push(v),
            Err(e) => {
                eprintln!("drlint: {e}");
                failed = true;
            }
        }
    }
    let value = if cli.files.len() == 1 {
        models.pop().unwrap_or(serde_json::Value::Null)
    } else {
        serde_json::Value::Array(models)
    };
    if !value.is_null() {
        println!(
            "{}",
            serde_json::to_string_pretty(&value).expect("model serializes")
        );
    }
    if failed {
        EXIT_ERROR
    } else {
        EXIT_CLEAN
    }
}
