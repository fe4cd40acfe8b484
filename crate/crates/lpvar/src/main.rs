use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(lpvar::cli::execute_cli(std::env::args()) as u8)
}
