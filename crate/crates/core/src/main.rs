use clap::Parser;

use christoffel::cli_io::{run_and_write, RunConfig};

fn main() {
    let config = RunConfig::parse();
    std::process::exit(run_and_write(&config));
}
