use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use numasched::{render_report, run_parallel, verify_optimality, Cli, RunConfig};

const VERIFY_INSTANCES: usize = 200;

fn run(cfg: RunConfig) -> Result<(), String> {
    if cfg.verify {
        let checked = verify_optimality(
            cfg.spec.base_seed,
            VERIFY_INSTANCES,
            10_000,
            &cfg.spec.latencies,
        )
        .map_err(|m| format!("verification failed: {m}"))?;
        eprintln!("verify: optimal scheduler matched exhaustive search on {checked} instances");
    }
    let result = run_parallel(&cfg.spec, &cfg.topology).map_err(|e| e.to_string())?;
    let text = render_report(&result, cfg.format, &cfg.spec, &cfg.topology);
    match &cfg.out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| format!("cannot write output: {e}"))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match cli.into_config() {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("numasched: {e}");
            return ExitCode::from(2);
        }
    };
    match run(cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("numasched: {e}");
            ExitCode::from(1)
        }
    }
}
