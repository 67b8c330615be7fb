use std::process::ExitCode;

fn main() -> ExitCode {
    qcpu_sim::cli::run_from_env()
}
