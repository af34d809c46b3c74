use std::process::ExitCode;

fn main() -> ExitCode {
    footsense::cli::main_with_args(std::env::args_os())
}
