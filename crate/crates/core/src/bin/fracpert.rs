use clap::Parser;
use fracpert::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
