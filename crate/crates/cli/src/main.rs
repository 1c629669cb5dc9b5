mod args;
mod config;
mod run;

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::error::ErrorKind as ClapKind;
use clap::Parser;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use twophoton::io::SCHEMA_VERSION;
use twophoton::{Error, ErrorKind};

use args::{Cli, Command};
use config::RunConfig;

const EXIT_INVALID: u8 = 2;
const EXIT_CONVERGENCE: u8 = 3;
const EXIT_TRUNCATION: u8 = 4;
const EXIT_INTERNAL: u8 = 5;

/// Failure of a CLI run, with its exit code.
struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl Failure {
    fn invalid(message: String) -> Self {
        Self {
            code: EXIT_INVALID,
            kind: "invalid_config",
            message,
        }
    }

    fn io(message: String) -> Self {
        Self {
            code: EXIT_INTERNAL,
            kind: "io",
            message,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, kind) = match e.kind() {
            ErrorKind::InvalidInput => (EXIT_INVALID, "invalid_config"),
            ErrorKind::Convergence => (EXIT_CONVERGENCE, "convergence"),
            ErrorKind::Truncation => (EXIT_TRUNCATION, "truncation"),
            ErrorKind::Internal => (EXIT_INTERNAL, "internal"),
        };
        Self {
            code,
            kind,
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    schema_version: String,
    tool_version: String,
    config: RunConfig,
    outputs: Vec<String>,
    summary: Value,
    created_unix: u64,
    elapsed_s: f64,
}

fn manifest_name(config: &RunConfig) -> String {
    format!("{}.json", config.task.name())
}

fn run(config: RunConfig, out: &Path) -> Result<Value, Failure> {
    config.validate()?;
    let start = Instant::now();
    let artifacts = run::execute(&config)?;
    let elapsed_s = start.elapsed().as_secs_f64();

    fs::create_dir_all(out).map_err(|e| Failure::io(format!("{}: {e}", out.display())))?;
    for (name, bytes) in &artifacts.files {
        let path = out.join(name);
        fs::write(&path, bytes).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    }
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION.to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        outputs: artifacts.files.iter().map(|(n, _)| n.clone()).collect(),
        summary: artifacts.summary,
        created_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
        elapsed_s,
        config,
    };
    let path = out.join(manifest_name(&manifest.config));
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
    fs::write(&path, text + "\n").map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    Ok(json!({
        "command": manifest.config.task.name(),
        "manifest": path.display().to_string(),
        "outputs": manifest.outputs,
        "summary": manifest.summary,
    }))
}

fn replay(a: &args::ReplayArgs) -> Result<Value, Failure> {
    let text = fs::read_to_string(&a.manifest)
        .map_err(|e| Failure::invalid(format!("{}: {e}", a.manifest.display())))?;
    let manifest: Manifest = serde_json::from_str(&text)
        .map_err(|e| Failure::invalid(format!("{}: {e}", a.manifest.display())))?;
    if manifest.schema_version.split('.').next() != SCHEMA_VERSION.split('.').next() {
        return Err(Failure::invalid(format!(
            "manifest schema {} is incompatible with {SCHEMA_VERSION}",
            manifest.schema_version
        )));
    }
    let mut config = manifest.config;
    if let Some(w) = a.workers {
        config.set_workers(config::resolve_workers(w));
    }
    run(config, &a.out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ClapKind::DisplayHelp | ClapKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let _ = e.print();
            let message = e.to_string();
            report(&Failure::invalid(
                message
                    .lines()
                    .next()
                    .unwrap_or_default()
                    .trim_start_matches("error: ")
                    .to_string(),
            ));
            return ExitCode::from(EXIT_INVALID);
        }
    };
    let result = match &cli.command {
        Command::Replay(a) => replay(a),
        cmd => {
            let out = match cmd {
                Command::Evolve(a) => &a.common.out,
                Command::Steady(a) => &a.common.out,
                Command::Sweep(a) | Command::Susceptibility(a) | Command::Threshold(a) => {
                    &a.common.out
                }
                Command::Exponent(a) => &a.common.out,
                Command::Curvature(a) => &a.common.out,
                Command::Replay(_) => unreachable!(),
            };
            run(config::from_command(cmd), out)
        }
    };
    match result {
        Ok(v) => {
            println!("{v}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            report(&f);
            ExitCode::from(f.code)
        }
    }
}

fn report(f: &Failure) {
    eprintln!(
        "{}",
        json!({ "error": { "kind": f.kind, "exit_code": f.code, "message": f.message } })
    );
}
