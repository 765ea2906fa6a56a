use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use thimac::dsl;
use thimac::interop::activity::camel_name;
use thimac::interop::{
    export_dot, export_json, import_activity, import_json, AdDocument, DotOptions,
};
use thimac::normalize::normalize;
use thimac::sim::{simulate, SimConfig, SimError};
use thimac::validate::{validate_static_with, CheckOptions, RuleTable};
use thimac::{Mode, ModelBundle, Rule};

const EXIT_OK: u8 = 0;
const EXIT_INVALID: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_BUDGET: u8 = 4;

#[derive(Parser)]
#[command(name = "tm", version, about = "Thinging-machine model toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Strict,
    Simplified,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Check the static model and the behavior.
    Validate {
        file: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Report trigger-kind violations as warnings.
        #[arg(long)]
        relaxed_triggers: bool,
        /// Report disconnected event regions as warnings.
        #[arg(long)]
        allow_disconnected_regions: bool,
        #[arg(long)]
        json: bool,
    },
    /// List events with their region sizes and uncovered actions.
    Events {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Run the behavior and print the trace.
    Simulate {
        file: PathBuf,
        #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
        max_steps: u64,
        /// Bound for `[repeat]` loops without an explicit number.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        loop_bound: u32,
        #[arg(long)]
        trace_out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Write the model as DOT or JSON.
    Export {
        file: PathBuf,
        #[arg(long, value_enum)]
        format: Format,
        #[arg(long)]
        show_events: bool,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Convert an activity-diagram JSON document to model text.
    ImportAd {
        file: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Insert the gates a simplified model leaves out and print strict text.
    Normalize {
        file: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
}

/// A failed invocation: message for the error stream plus exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            if !f.message.is_empty() {
                eprintln!("{}", f.message.trim_end());
            }
            ExitCode::from(f.code)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| {
        Failure::new(
            EXIT_IO,
            format!("error: cannot read {}: {e}", path.display()),
        )
    })
}

fn write_or_print(output: Option<&Path>, text: &str) -> Result<(), Failure> {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| {
            Failure::new(EXIT_IO, format!("error: cannot write {}: {e}", p.display()))
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Reads `.json` files as model interchange documents, anything else as
/// model text.
fn load(path: &Path) -> Result<ModelBundle, Failure> {
    let text = read(path)?;
    if path.extension().is_some_and(|e| e == "json") {
        import_json(&text).map_err(|e| {
            Failure::new(
                EXIT_IO,
                format!("error[{}]: {}: {e}", e.code(), path.display()),
            )
        })
    } else {
        dsl::parse_named(&text, &path.display().to_string())
            .map_err(|e| Failure::new(EXIT_PARSE, format!("error: {e}")))
    }
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Validate {
            file,
            mode,
            relaxed_triggers,
            allow_disconnected_regions,
            json,
        } => {
            let bundle = load(&file)?;
            let mode = match mode {
                Some(ModeArg::Strict) => Mode::Strict,
                Some(ModeArg::Simplified) => Mode::Simplified,
                None => bundle.model.mode,
            };
            let options = CheckOptions {
                relaxed_triggers,
                allow_disconnected_regions,
            };
            let report = bundle.validate(&RuleTable::for_mode(mode).with_options(options), options);
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report.to_json()).unwrap()
                );
            } else {
                println!("{report}");
            }
            Ok(if report.has_errors() {
                EXIT_INVALID
            } else {
                EXIT_OK
            })
        }
        Command::Events { file, json } => {
            let bundle = load(&file)?;
            let report = bundle.validate(
                &RuleTable::for_mode(bundle.model.mode),
                CheckOptions::default(),
            );
            let coverage: Vec<_> = report.with_rule(Rule::Coverage).collect();
            let m = &bundle.model;
            if json {
                let events: Vec<_> = bundle
                    .events
                    .iter()
                    .map(|e| {
                        json!({
                            "name": e.name,
                            "label": e.label,
                            "time": e.time,
                            "size": e.region.len(),
                            "actions": e.region.actions().iter().map(|a| m.action_path(*a)).collect::<Vec<_>>(),
                        })
                    })
                    .collect();
                let doc = json!({ "events": events, "coverage": coverage });
                println!("{}", serde_json::to_string_pretty(&doc).unwrap());
            } else {
                for e in &bundle.events {
                    let noun = if e.region.len() == 1 {
                        "action"
                    } else {
                        "actions"
                    };
                    match &e.label {
                        Some(l) => println!("{}\t{} {noun}\t{l}", e.name, e.region.len()),
                        None => println!("{}\t{} {noun}", e.name, e.region.len()),
                    }
                }
                for v in &coverage {
                    println!("{v}");
                }
                println!(
                    "{} events, {} uncovered actions",
                    bundle.events.len(),
                    coverage.len()
                );
            }
            Ok(EXIT_OK)
        }
        Command::Simulate {
            file,
            max_steps,
            loop_bound,
            trace_out,
            json,
        } => {
            let bundle = load(&file)?;
            let config = SimConfig {
                max_steps: usize::try_from(max_steps).unwrap_or(usize::MAX),
                default_loop_bound: loop_bound,
                ..Default::default()
            };
            let render = |t: &thimac::sim::Trace| {
                if json {
                    let mut s = t.to_json(&bundle);
                    s.push('\n');
                    s
                } else {
                    t.to_text(&bundle)
                }
            };
            match simulate(&bundle, &config) {
                Ok(trace) => {
                    let text = render(&trace);
                    print!("{text}");
                    if let Some(p) = trace_out {
                        write_or_print(Some(&p), &text)?;
                    }
                    Ok(EXIT_OK)
                }
                Err(SimError::Budget { max_steps, partial }) => {
                    print!("{}", render(&partial));
                    Err(Failure::new(
                        EXIT_BUDGET,
                        format!("error[BUDGET]: step budget of {max_steps} exhausted"),
                    ))
                }
                Err(e) => Err(Failure::new(
                    EXIT_INVALID,
                    format!("error[{}]: {e}", e.code()),
                )),
            }
        }
        Command::Export {
            file,
            format,
            show_events,
            output,
        } => {
            let bundle = load(&file)?;
            let text = match format {
                Format::Dot => export_dot(&bundle, DotOptions { show_events }),
                Format::Json => export_json(&bundle),
            };
            write_or_print(output.as_deref(), &text)?;
            Ok(EXIT_OK)
        }
        Command::ImportAd { file, output } => {
            let text = read(&file)?;
            let doc = AdDocument::from_json(&text)
                .map_err(|e| Failure::new(EXIT_IO, format!("error[{}]: {e}", e.code())))?;
            let mut bundle = import_activity(&doc)
                .map_err(|e| Failure::new(EXIT_IO, format!("error[{}]: {e}", e.code())))?;
            if let Some(stem) = file.file_stem().and_then(|s| s.to_str()) {
                bundle.model.name = camel_name(stem, "Activity");
            }
            write_or_print(output.as_deref(), &dsl::print(&bundle))?;
            Ok(EXIT_OK)
        }
        Command::Normalize { file, output } => {
            let mut bundle = load(&file)?;
            bundle.model.mode = Mode::Simplified;
            match normalize(&bundle.model) {
                Ok(model) => {
                    bundle.model = model;
                    write_or_print(output.as_deref(), &dsl::print(&bundle))?;
                    Ok(EXIT_OK)
                }
                Err(e) => {
                    let report = validate_static_with(&bundle.model, &RuleTable::simplified());
                    Err(Failure::new(
                        EXIT_INVALID,
                        format!(
                            "error[{}]: model is not simplified-valid\n{report}",
                            e.code()
                        ),
                    ))
                }
            }
        }
    }
}
