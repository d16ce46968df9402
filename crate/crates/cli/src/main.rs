use clap::Parser;
use oqw_cli::commands::{run, Cli};

fn main() {
    if let Ok(value) = std::env::var("OQW_NUM_THREADS") {
        match value.trim().parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = oqw_core::simulate::configure_threads(n) {
                    eprintln!("warning: {e}");
                }
            }
            _ => {
                eprintln!("error: OQW_NUM_THREADS must be a positive integer, got `{value}`");
                std::process::exit(2);
            }
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            std::process::exit(outcome.status.code());
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.status.code());
        }
    }
}
