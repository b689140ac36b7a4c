use std::process::ExitCode;

fn main() -> ExitCode {
    treeshift::cli::main_entry()
}
