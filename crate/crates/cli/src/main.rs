use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

mod commands;

use commands::{Cli, Outcome};

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let started = Instant::now();
    match commands::run(&cli) {
        Ok(mut report) => {
            report.command = argv[1..].to_vec();
            report.elapsed_ms = started.elapsed().as_millis();
            eprintln!("{}", report.summary());
            println!("{}", serde_json::to_string_pretty(&report).expect("reports serialize"));
            match report.outcome() {
                Outcome::Ok => ExitCode::SUCCESS,
                Outcome::Failed => ExitCode::from(1),
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
