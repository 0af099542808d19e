//! `complab` command-line interface.

mod config;
mod run;

use std::process::ExitCode;

use clap::error::ErrorKind;

/// Environment variable fixing the size of the worker pool.
const THREADS_VAR: &str = "COMPLAB_THREADS";

fn init_threads() -> anyhow::Result<()> {
    if let Ok(raw) = std::env::var(THREADS_VAR) {
        let n: usize = raw
            .parse()
            .map_err(|_| anyhow::anyhow!("{THREADS_VAR} must be a positive integer, got '{raw}'"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cfg = match config::parse_config(std::env::args_os()) {
        Ok(cfg) => cfg,
        Err(e) => {
            if let Some(c) = e.downcast_ref::<clap::Error>() {
                if matches!(c.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                    let _ = c.print();
                    return ExitCode::SUCCESS;
                }
                let _ = c.print();
                return ExitCode::from(1);
            }
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let outcome = init_threads().and_then(|()| run::run_and_emit(&cfg));
    match outcome {
        Ok(o) => ExitCode::from(o.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
