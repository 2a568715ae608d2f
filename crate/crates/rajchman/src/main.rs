use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use rajchman::cache::Cache;
use rajchman::{run, CliError, Command, RunConfig, Status};

/// Fourier decay classification, measure construction and gap certificates.
#[derive(Parser)]
#[command(name = "rajchman", version)]
struct Cli {
    /// Run the JSON config file instead of a subcommand.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

fn config_of(cli: Cli) -> Result<RunConfig, CliError> {
    match (cli.config, cli.command) {
        (Some(_), Some(_)) => Err(CliError::invalid(
            "usage",
            "--config and a subcommand are exclusive",
        )),
        (None, Some(command)) => Ok(RunConfig { command }),
        (Some(path), None) => {
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            RunConfig::parse_json(&text)
        }
        (None, None) => Err(CliError::invalid(
            "usage",
            "a subcommand or --config is required",
        )),
    }
}

fn fail(e: &CliError) -> ExitCode {
    let _ = std::io::stderr().write_all(e.to_json().as_bytes());
    ExitCode::from(e.status.code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e)
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) =>
        {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&CliError::invalid("usage", e.to_string())),
    };
    let outcome = config_of(cli).and_then(|cfg| run(&cfg, &Cache::from_env()));
    match outcome {
        Ok(o) => {
            let _ = std::io::stdout().write_all(o.stdout.as_bytes());
            if o.status == Status::Ok {
                return ExitCode::SUCCESS;
            }
            // the report already went to stdout; stderr gets the short reason
            let report: serde_json::Value = serde_json::from_str(&o.stdout).unwrap_or_default();
            let reason = report["result"]["failure"]["reason"]
                .as_str()
                .unwrap_or("verification-failed");
            let summary = report["summary"].as_str().unwrap_or_default();
            let e = CliError {
                status: o.status,
                reason: "verification-failed",
                message: format!("{reason}: {summary}"),
            };
            fail(&e)
        }
        Err(e) => fail(&e),
    }
}

#[cfg(test)]
mod tests {
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        super::Cli::command().debug_assert();
    }
}
