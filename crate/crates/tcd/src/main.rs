use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use tcd::commands::{render, run, Cli};
use tcd::error::{CliError, EXIT_INVALID_INPUT};

/// Applies `TCD_THREADS` (0 or unset: one thread per core).
fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("TCD_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Input(format!("TCD_THREADS must be a non-negative integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Input(format!("cannot configure thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let result = configure_threads()
        .and_then(|_| run(&cli))
        .and_then(|report| render(&report, cli.global.format))
        .and_then(|text| match &cli.global.out {
            Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            }),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())
                    .and_then(|_| out.flush())
                    .map_err(|source| CliError::Io {
                        path: "<stdout>".into(),
                        source,
                    })
            }
        });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tcd: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
