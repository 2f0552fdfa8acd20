use std::process::ExitCode;

fn main() -> ExitCode {
    moqt_lab::run_cli(std::env::args_os())
}
