use std::process::ExitCode;

fn main() -> ExitCode {
    orthoinv_cli::run(std::env::args_os())
}
