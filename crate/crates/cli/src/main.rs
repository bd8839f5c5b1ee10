use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(coherence_bench::run(std::env::args_os()))
}
