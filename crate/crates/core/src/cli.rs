//! The `failsec` command line.
//!
//! Exit codes: 0 when the design is fail-secure (or valid, or a replay
//! reproduces), 1 when a breach is found (or a replay does not reproduce),
//! 2 on usage, I/O, parse or validation errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analyze::{verify_counterexample, Analyzer};
use crate::dsl::parse;
use crate::model::Model;
use crate::report::{breach_from_json, emit_dot, emit_json, emit_text, Report, TOOL, VERSION};
use crate::validate::validate;

pub const EXIT_OK: i32 = 0;
pub const EXIT_BREACH: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SimpleFormat {
    Text,
    Json,
}

#[derive(Parser)]
#[command(name = "failsec", version, about = "Bounded fail-secure analysis of component architectures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate an architecture file.
    Validate { file: PathBuf },
    /// Check that no combination of up to N failures leaks a product input.
    Check {
        file: PathBuf,
        #[arg(long, value_name = "N")]
        max_faults: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// List every breach at the minimal breaching fault count.
        #[arg(long)]
        all: bool,
        /// Worker threads.
        #[arg(long, value_name = "J", default_value_t = 1)]
        jobs: usize,
    },
    /// Smallest number of failures that allows a leak, up to a bound.
    MinFaults {
        file: PathBuf,
        #[arg(long, value_name = "B")]
        bound: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: SimpleFormat,
    },
    /// Re-evaluate a breach from a JSON `check` report.
    Replay {
        file: PathBuf,
        #[arg(long, value_name = "BREACH_JSON")]
        breach: PathBuf,
    },
}

#[derive(Serialize)]
struct MinFaultsJson<'a> {
    tool: &'a str,
    version: &'a str,
    file: String,
    bound: usize,
    min_faults: Option<usize>,
    scenarios_checked: u64,
    elapsed_ms: u64,
}

/// A failure that ends the command with exit code 2.
struct Fatal(String);

fn read(path: &Path) -> Result<String, Fatal> {
    fs::read_to_string(path).map_err(|e| Fatal(format!("{}: {e}", path.display())))
}

fn load(path: &Path, err: &mut dyn Write) -> Result<Model, Fatal> {
    let text = read(path)?;
    let arch = parse(&text).map_err(|e| Fatal(format!("{}:{e}", path.display())))?;
    match Model::new(arch) {
        Ok(model) => {
            for w in model.warnings() {
                let _ = writeln!(err, "{}:{w}", path.display());
            }
            Ok(model)
        }
        Err(invalid) => {
            for d in &invalid.diagnostics {
                let _ = writeln!(err, "{}:{d}", path.display());
            }
            Err(Fatal(format!("{}: architecture is invalid", path.display())))
        }
    }
}

fn elapsed_ms(start: Instant) -> u64 {
    start.elapsed().as_millis() as u64
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write, color: bool) -> Result<i32, Fatal> {
    let io = |e: std::io::Error| Fatal(format!("cannot write output: {e}"));
    match cli.command {
        Command::Validate { file } => {
            let text = read(&file)?;
            let arch = parse(&text).map_err(|e| Fatal(format!("{}:{e}", file.display())))?;
            let diagnostics = validate(&arch);
            for d in &diagnostics {
                writeln!(err, "{}:{d}", file.display()).map_err(io)?;
            }
            if diagnostics.iter().any(|d| d.is_error()) {
                return Ok(EXIT_ERROR);
            }
            writeln!(
                out,
                "{}: valid ({} instance(s), {} net(s))",
                arch.name,
                arch.instances.len(),
                arch.nets.len()
            )
            .map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Check { file, max_faults, format, all, jobs } => {
            let model = load(&file, err)?;
            let analyzer = Analyzer::with_jobs(&model, jobs)
                .map_err(|e| Fatal(format!("cannot start {jobs} workers: {e}")))?;
            let start = Instant::now();
            let name = file.display().to_string();
            let report = if all {
                let a = analyzer.check_all(max_faults);
                Report::from_all(name, a, elapsed_ms(start))
            } else {
                let a = analyzer.check(max_faults);
                Report::from_analysis(name, a, elapsed_ms(start))
            };
            match format {
                Format::Text => write!(out, "{}", emit_text(&model, &report, color)),
                Format::Json => writeln!(out, "{}", emit_json(&model, &report)),
                Format::Dot => write!(out, "{}", emit_dot(model.architecture(), report.breaches().first())),
            }
            .map_err(io)?;
            Ok(if report.is_breach() { EXIT_BREACH } else { EXIT_OK })
        }
        Command::MinFaults { file, bound, format } => {
            let model = load(&file, err)?;
            let start = Instant::now();
            let (min, checked) = Analyzer::new(&model).min_fault_count(bound);
            match format {
                SimpleFormat::Text => match min {
                    Some(k) => writeln!(out, "{k}"),
                    None => writeln!(out, "none"),
                },
                SimpleFormat::Json => {
                    let j = MinFaultsJson {
                        tool: TOOL,
                        version: VERSION,
                        file: file.display().to_string(),
                        bound: bound.min(model.instance_count()),
                        min_faults: min,
                        scenarios_checked: checked,
                        elapsed_ms: elapsed_ms(start),
                    };
                    writeln!(out, "{}", serde_json::to_string(&j).expect("serializes"))
                }
            }
            .map_err(io)?;
            Ok(if min.is_some() { EXIT_BREACH } else { EXIT_OK })
        }
        Command::Replay { file, breach } => {
            let model = load(&file, err)?;
            let text = read(&breach)?;
            let parsed = breach_from_json(&model, &text)
                .map_err(|e| Fatal(format!("{}: {e}", breach.display())))?;
            let ok = parsed.is_some_and(|b| verify_counterexample(&model, &b));
            if ok {
                writeln!(out, "counterexample reproduced").map_err(io)?;
                Ok(EXIT_OK)
            } else {
                writeln!(out, "counterexample does not reproduce").map_err(io)?;
                Ok(EXIT_BREACH)
            }
        }
    }
}

/// Runs the tool on `args` (program name first). Reports go to `out`,
/// diagnostics to `err`. ANSI styling in text reports only when `color`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write, color: bool) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match dispatch(cli, out, err, color) {
        Ok(code) => code,
        Err(Fatal(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_ERROR
        }
    }
}
