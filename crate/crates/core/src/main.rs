use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(boxspline_gap::cli::run(std::env::args_os()) as u8)
}
