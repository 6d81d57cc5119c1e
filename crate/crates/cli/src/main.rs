use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(almostprime_cli::run(std::env::args_os()))
}
