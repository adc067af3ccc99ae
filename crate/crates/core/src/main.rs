use clap::Parser;
use typetopos::cli::{execute, Cli};

fn main() {
    match execute(Cli::parse()) {
        Ok((out, code)) => {
            print!("{out}");
            std::process::exit(code);
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}
