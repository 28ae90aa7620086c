use clap::Parser;

use tewa_sim::cli::{run_cli, Cli};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // argument problems are validation errors per the CLI contract
            let _ = e.print();
            std::process::exit(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Err(err) = run_cli(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
