use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(oldroyd_lab::cli::run(std::env::args_os()))
}
