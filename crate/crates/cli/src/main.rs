use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use serde_json::{Map, Value};
use wavelab_cli::plan::{apply_override, default_out_root, OUT_ENV};
use wavelab_cli::{exit, plan_from_value, CliError, CliResult, Command, ExecOptions, RunPlan};

/// Blow-up and lifespan laboratory for weakly coupled wave systems.
#[derive(Debug, Parser)]
#[command(name = "wavelab", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,

    /// JSON configuration document.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory (default: `$WAVELAB_OUT/<command>`).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Artifact kinds to write, e.g. `csv,json,svg`.
    #[arg(long)]
    emit: Option<String>,

    #[arg(long)]
    threads: Option<usize>,

    /// Override a configuration key, e.g. `--set p=1.5`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Print the resolved plan and stop.
    #[arg(long)]
    dry_run: bool,
}

fn build_plan(args: &Args) -> CliResult<RunPlan> {
    let mut doc = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            match serde_json::from_str(&text) {
                Ok(Value::Object(map)) => map,
                Ok(_) => return Err(CliError::config(".", "the document must be a JSON object")),
                Err(e) => {
                    return Err(CliError::config(
                        format!("{}:{}:{}", path.display(), e.line(), e.column()),
                        e.to_string(),
                    ))
                }
            }
        }
        None => Map::new(),
    };
    let name = args.command.name();
    match doc.get("command") {
        Some(Value::String(s)) if s != name => {
            return Err(CliError::config(
                "command",
                format!("document is for `{s}` but `{name}` was requested"),
            ))
        }
        _ => {
            doc.insert("command".into(), Value::from(name));
        }
    }
    for o in &args.overrides {
        apply_override(&mut doc, o)?;
    }
    if let Some(out) = &args.out {
        doc.insert("out".into(), Value::from(out.to_string_lossy().as_ref()));
    }
    if let Some(emit) = &args.emit {
        doc.insert("emit".into(), Value::from(emit.as_str()));
    }
    plan_from_value(Value::Object(doc), &default_out_root())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::CONFIG as u8 } else { 0 });
        }
    };
    let result = build_plan(&args).and_then(|plan| {
        if args.dry_run {
            println!("{}", plan.to_json());
            return Ok(());
        }
        let outcome = wavelab_cli::execute(&plan, &ExecOptions { threads: args.threads })?;
        print!("{}", outcome.summary);
        eprintln!("artifacts in {}", outcome.out.display());
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wavelab: {e}");
            if matches!(e, CliError::Io { .. }) {
                eprintln!("(set --out or {OUT_ENV} to a writable directory)");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
