use clap::Parser;

use lcforecast::cli::{run, Cli};

fn main() -> anyhow::Result<()> {
    run(Cli::parse())
}
