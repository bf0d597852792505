use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use moyforge_cli::{run, EXIT_INPUT};

fn main() -> ExitCode {
    let report = match run(std::env::args()) {
        Ok(r) => r,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_INPUT as u8),
            };
        }
    };
    // a closed pipe on stdout is not an error of the command
    let _ = writeln!(std::io::stdout().lock(), "{}", report.to_json());
    ExitCode::from(report.exit_code as u8)
}
