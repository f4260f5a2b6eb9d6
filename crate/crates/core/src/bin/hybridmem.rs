use std::process::ExitCode;

fn main() -> ExitCode {
    hybridmem::cli::main()
}
