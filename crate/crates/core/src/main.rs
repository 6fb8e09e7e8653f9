use std::process::ExitCode;

fn main() -> ExitCode {
    krep::cli::main()
}
