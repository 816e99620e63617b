use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(extremal_causality_cli::run(std::env::args_os()))
}
