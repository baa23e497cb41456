use clap::Parser;

use tpa::cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    let outcome = execute(cli);
    print!("{}", outcome.stdout);
    std::process::exit(outcome.code);
}
