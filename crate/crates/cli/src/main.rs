use std::io;
use std::process::ExitCode;

use clap::Parser;
use delab_cli::{rows, run, Cli, RunConfig};

const CONFIG_EXIT: u8 = 2;

fn init_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("DELAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("DELAB_THREADS={raw:?} is not a thread count"))?;
    if n == 0 {
        return Err("DELAB_THREADS must be positive".into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    if let Err(e) = init_threads() {
        eprintln!("delab: {e}");
        return ExitCode::from(CONFIG_EXIT);
    }
    let cfg = match RunConfig::from_cli(Cli::parse()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("delab: {e}");
            return ExitCode::from(CONFIG_EXIT);
        }
    };
    match run(&cfg) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            let code = outcome.exit_code() as u8;
            if outcome.failures > 0 {
                let failed: Vec<_> = outcome.rows.into_iter().filter(|r| !r.pass).collect();
                // Failures go to stderr in the report's own CSV format.
                let _ = rows::write_csv(&failed, io::stderr());
            }
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("delab: {e}");
            ExitCode::from(CONFIG_EXIT)
        }
    }
}
