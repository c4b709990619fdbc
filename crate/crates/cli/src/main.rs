use std::process::ExitCode;

use clap::Parser;
use semistable_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args: Vec<String> = std::env::args().skip(1).collect();
    let outcome = run(&cli, args);
    if let Some(report) = &outcome.report {
        println!("{}", report.to_json());
    }
    for e in &outcome.errors {
        eprintln!("error: {e}");
    }
    ExitCode::from(outcome.exit_code as u8)
}
