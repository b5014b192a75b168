use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(agentcomm::cli::main_with(std::env::args_os()))
}
