use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(sombrero::cli::run())
}
