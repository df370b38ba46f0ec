use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use marketflux_cli::cli::{Cli, Plan};
use marketflux_cli::commands;
use marketflux_cli::error::{CliError, CliResult};
use marketflux_cli::output::MANIFEST_NAME;

fn execute(plan: Plan) -> CliResult<String> {
    match plan {
        Plan::Run { config, out } => {
            commands::run(&config, &out)?;
            Ok(out.join(MANIFEST_NAME).display().to_string())
        }
        Plan::Replay { manifest, source, out, verify } => {
            if verify {
                for input in &manifest.inputs {
                    let now = marketflux_cli::output::file_artifact(std::path::Path::new(&input.path))?;
                    if now.sha256 != input.sha256 {
                        return Err(CliError::Runtime(format!("input {} changed since the recorded run", input.path)));
                    }
                }
            }
            let fresh = commands::run(&manifest.config, &out)?;
            if verify && fresh.artifacts != manifest.artifacts {
                let differing: Vec<&str> = manifest
                    .artifacts
                    .iter()
                    .filter(|a| !fresh.artifacts.contains(a))
                    .map(|a| a.path.as_str())
                    .collect();
                return Err(CliError::Runtime(format!(
                    "replay of {} does not reproduce: {}",
                    source.display(),
                    if differing.is_empty() { "artifact set differs".into() } else { differing.join(", ") }
                )));
            }
            Ok(out.join(MANIFEST_NAME).display().to_string())
        }
    }
}

fn fail(e: &CliError) -> ExitCode {
    let report = serde_json::to_string(&e.report()).unwrap_or_else(|_| e.to_string());
    let _ = writeln!(std::io::stderr(), "{report}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&CliError::input(e.render().to_string().trim_end())),
    };
    match cli.command.plan().and_then(execute) {
        Ok(path) => {
            println!("{path}");
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}
