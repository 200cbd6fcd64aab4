use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(rdsim_cli::execute(std::env::args_os()))
}
