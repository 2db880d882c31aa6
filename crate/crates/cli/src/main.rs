use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(weakdamp_cli::run(std::env::args_os()))
}
