use std::process::ExitCode;

use clap::Parser;
use nxfem::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    run(&cli, &mut stdout).into()
}
