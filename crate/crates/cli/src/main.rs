use std::process::ExitCode;

use clap::Parser;
use wavpert_cli::{emit, run, Cli, CliError, RunConfig};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn execute(cli: Cli) -> Result<u8, CliError> {
    let config = RunConfig::try_from(cli)?;
    let output = run(&config)?;
    emit(&output.document, config.out_path.as_deref())?;
    Ok(output.exit_code)
}
