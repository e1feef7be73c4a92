use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(potts_cli::dispatch(std::env::args()) as u8)
}
