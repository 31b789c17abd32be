mod args;
mod commands;
mod figures;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;
use commands::Usage;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // clap reports --help/--version as errors with exit code 0
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    match commands::run(cli.command, &argv[1..]) {
        Ok(code) => code,
        Err(e) if e.is::<Usage>() => {
            eprintln!("usage error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// `STA_THREADS` caps the rayon pool; unset or 0 leaves it automatic.
fn configure_threads() -> anyhow::Result<()> {
    let Ok(value) = std::env::var("STA_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .map_err(|_| anyhow::anyhow!("STA_THREADS must be a non-negative integer, got {value:?}"))?;
    if threads > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    }
    Ok(())
}
