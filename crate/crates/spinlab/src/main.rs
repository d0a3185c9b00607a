use clap::Parser;
use spinlab::cli::{config_from_cli, execute, render, Cli};
use std::process::ExitCode;
use std::time::Instant;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let outcome = config_from_cli(&cli).and_then(|cfg| {
        let result = execute(&cfg)?;
        render(&result, &cfg.formats, &cfg.output_dir)
    });
    match outcome {
        Ok(paths) => {
            for path in paths {
                println!("{}", path.display());
            }
            eprintln!("wall time: {:.3} s", start.elapsed().as_secs_f64());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
