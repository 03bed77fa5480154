//! The `tmkit` command line.
//!
//! Exit codes: 0 success, 1 the model or run was rejected, 2 the input
//! could not be read or parsed, 3 internal error.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::dsl::{self, Document, ParseError, SourceUnit};
use crate::eventing::{check_behavior, EventId};
use crate::expr::Value;
use crate::model::{validate_static, ThimacPath};
use crate::render::{emit_dot, RankDir, RenderOptions, Target};
use crate::report::ValidationReport;
use crate::sim::{init_world, simulate, trace_to_json, trace_to_text, Outcome, DEFAULT_MAX_STEPS};
use crate::uml::{class_to_tm, read_class_json, tm_to_class, write_class_json};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECTED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "tmkit", version, about = "Thinging Machine modeling toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and validate a model, printing diagnostics to stderr.
    Check { file: PathBuf },
    /// Print a model in canonical form.
    Fmt {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convert a TM model to a class model (JSON).
    ToClass {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Expand a class model (JSON) into a TM model.
    ToTm {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a model as Graphviz DOT.
    Dot {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = TargetArg::Static)]
        target: TargetArg,
        #[arg(long)]
        show_stores: bool,
        #[arg(long, value_enum, default_value_t = RankDirArg::LR)]
        rankdir: RankDirArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the chronology and print the trace.
    Simulate {
        file: PathBuf,
        /// Initial store value, `Path.To.Store=value`.
        #[arg(long = "world", value_name = "PATH=VALUE")]
        world: Vec<String>,
        /// Payload for an input-taking event, `EVENT:value`.
        #[arg(long = "input", value_name = "EVENT:VALUE")]
        input: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
        max_steps: usize,
        #[arg(long, value_enum, default_value_t = TraceFormat::Text)]
        trace_format: TraceFormat,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TargetArg {
    Static,
    Behavior,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[allow(clippy::upper_case_acronyms)]
enum RankDirArg {
    #[value(name = "LR")]
    LR,
    #[value(name = "TB")]
    TB,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TraceFormat {
    Text,
    Json,
}

/// A failure that ends the command with an exit code. The message has
/// already been formatted for stderr.
struct Exit(i32, String);

type CmdResult = Result<i32, Exit>;

/// Runs the CLI with `args` (including the program name) and returns the
/// exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{rendered}");
            } else {
                let _ = write!(stdout, "{rendered}");
            }
            return code;
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(Exit(code, message)) => {
            let _ = writeln!(stderr, "{message}");
            code
        }
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    match command {
        Command::Check { file } => {
            let doc = load(&file)?;
            let report = full_report(&doc);
            report_to(stderr, &report)?;
            Ok(if report.is_valid() { EXIT_OK } else { EXIT_REJECTED })
        }
        Command::Fmt { file, out } => {
            let doc = load(&file)?;
            emit(stdout, out.as_deref(), &dsl::print(&doc))
        }
        Command::ToClass { file, out } => {
            let doc = load(&file)?;
            let converted = tm_to_class(&doc.model).map_err(|e| Exit(EXIT_REJECTED, format!("ERROR\t{}\t{e}", file.display())))?;
            report_to(stderr, &warnings(converted.warnings))?;
            emit(stdout, out.as_deref(), &write_class_json(&converted.value))
        }
        Command::ToTm { file, out } => {
            let text = read(&file)?;
            let cm = read_class_json(&text)
                .map_err(|e| Exit(EXIT_REJECTED, format!("ERROR\t{}{}\t{}", file.display(), location(&e.pointer), e.message)))?;
            let converted = class_to_tm(&cm).map_err(|e| Exit(EXIT_REJECTED, format!("ERROR\t{}\t{e}", file.display())))?;
            report_to(stderr, &warnings(converted.warnings))?;
            let doc = Document {
                model: converted.value,
                events: Vec::new(),
                behavior: None,
            };
            emit(stdout, out.as_deref(), &dsl::print(&doc))
        }
        Command::Dot {
            file,
            target,
            show_stores,
            rankdir,
            out,
        } => {
            let doc = load(&file)?;
            let opts = RenderOptions {
                target: match target {
                    TargetArg::Static => Target::Static,
                    TargetArg::Behavior => Target::Behavior,
                },
                show_stores,
                rankdir: match rankdir {
                    RankDirArg::LR => RankDir::LR,
                    RankDirArg::TB => RankDir::TB,
                },
            };
            let behavior = doc.behavior_or_default();
            emit(stdout, out.as_deref(), &emit_dot(&doc.model, Some(&behavior), &opts))
        }
        Command::Simulate {
            file,
            world,
            input,
            max_steps,
            trace_format,
        } => {
            let doc = load(&file)?;
            let report = full_report(&doc);
            if !report.is_valid() {
                report_to(stderr, &report)?;
                return Ok(EXIT_REJECTED);
            }
            let behavior = doc.behavior_or_default();

            let mut fills = BTreeMap::new();
            for spec in &world {
                let (path, raw) = spec
                    .split_once('=')
                    .ok_or_else(|| usage(format!("--world expects PATH=VALUE, found `{spec}`")))?;
                let path = ThimacPath::parse(path.trim()).ok_or_else(|| usage(format!("`{path}` is not a thimac path")))?;
                let ty = doc.model.store(&path).and_then(|s| s.effective_type());
                let value = Value::parse_loose(raw, ty).map_err(|e| usage(format!("--world {spec}: {e}")))?;
                fills.insert(path, value);
            }
            let mut inputs = BTreeMap::new();
            for spec in &input {
                let (event, raw) = spec
                    .split_once(':')
                    .ok_or_else(|| usage(format!("--input expects EVENT:VALUE, found `{spec}`")))?;
                let event = EventId::new(event.trim());
                let ty = behavior
                    .event(&event)
                    .and_then(|e| e.input.as_ref())
                    .and_then(|p| doc.model.store(p))
                    .and_then(|s| s.effective_type());
                let value = Value::parse_loose(raw, ty).map_err(|e| usage(format!("--input {spec}: {e}")))?;
                inputs.insert(event, value);
            }

            let world = init_world(&doc.model, &fills).map_err(|e| Exit(EXIT_REJECTED, format!("ERROR\tWorldError\t{e}")))?;
            let result = simulate(&doc.model, &behavior, world, &inputs, max_steps)
                .map_err(|e| Exit(EXIT_REJECTED, format!("ERROR\t{}\t{e}", e.name())))?;
            let text = match trace_format {
                TraceFormat::Text => trace_to_text(&result.trace),
                TraceFormat::Json => trace_to_json(&result.trace),
            };
            emit(stdout, None, &text)?;
            let outcome = result.trace.outcome;
            writeln!(stderr, "outcome\t{outcome}").map_err(io_error)?;
            Ok(if outcome == Outcome::Completed { EXIT_OK } else { EXIT_REJECTED })
        }
    }
}

fn usage(message: String) -> Exit {
    Exit(EXIT_INPUT, format!("error: {message}"))
}

fn io_error(e: std::io::Error) -> Exit {
    Exit(EXIT_INTERNAL, format!("error: {e}"))
}

fn location(pointer: &str) -> String {
    format!("#{pointer}")
}

fn read(path: &Path) -> Result<String, Exit> {
    std::fs::read_to_string(path).map_err(|e| Exit(EXIT_INPUT, format!("ERROR\t{}\t{e}", path.display())))
}

fn load(path: &Path) -> Result<Document, Exit> {
    let text = read(path)?;
    dsl::parse(&SourceUnit::new(text, path.display().to_string())).map_err(|e: ParseError| {
        Exit(
            EXIT_INPUT,
            format!("ERROR\t{}:{}:{}\t{}", path.display(), e.line, e.column, e.message),
        )
    })
}

fn full_report(doc: &Document) -> ValidationReport {
    let mut report = validate_static(&doc.model);
    if let Some(b) = &doc.behavior {
        report.extend(check_behavior(b, &doc.model));
    }
    report
}

fn warnings(list: Vec<crate::report::Diagnostic>) -> ValidationReport {
    let mut report = ValidationReport::default();
    for d in list {
        report.push(d);
    }
    report
}

fn report_to(stderr: &mut dyn Write, report: &ValidationReport) -> Result<(), Exit> {
    for d in report.errors().chain(report.warnings()) {
        writeln!(stderr, "{d}").map_err(io_error)?;
    }
    Ok(())
}

fn emit(stdout: &mut dyn Write, out: Option<&Path>, text: &str) -> CmdResult {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Exit(EXIT_INPUT, format!("ERROR\t{}\t{e}", path.display())))?,
        None => stdout.write_all(text.as_bytes()).map_err(io_error)?,
    }
    Ok(EXIT_OK)
}
