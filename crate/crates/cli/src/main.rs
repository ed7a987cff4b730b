use clap::Parser;
use hoplab_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("hoplab: {e}");
        std::process::exit(e.exit_code());
    }
}
