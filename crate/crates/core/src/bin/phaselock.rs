use clap::Parser;
use phaselock::commands::{run_command, Command};
use phaselock::config::{parse_config, split_assignment, RunConfig};
use phaselock::Error;
use std::path::PathBuf;
use std::process::ExitCode;

/// Overrides the `workers` config key.
const WORKERS_ENV: &str = "PHASELOCK_WORKERS";

const EXIT_USER: u8 = 1;
const EXIT_INTERNAL: u8 = 2;

/// Phase-locked Morse wave packets: eigenstates, Wigner functions, quantum
/// carpets and sub-Planck metrics.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Cli {
    /// eigen | state | wigner | carpet | metrics | sensitivity | table1 | table2
    #[arg(value_parser = parse_command)]
    command: Command,

    /// Config file of key=value lines.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Override one config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn parse_command(s: &str) -> Result<Command, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn load(cli: &Cli) -> Result<RunConfig, Error> {
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| Error::Config {
            line: 0,
            key: "--config".into(),
            reason: format!("{}: {e}", path.display()),
        })?,
        None => String::new(),
    };
    let mut config = parse_config(&text)?;
    for (i, item) in cli.set.iter().enumerate() {
        let (k, v) = split_assignment(item).ok_or_else(|| Error::Config {
            line: 0,
            key: item.clone(),
            reason: format!("--set #{} is not key=value", i + 1),
        })?;
        config.set(k, v, 0)?;
    }
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        config
            .set("workers", v.trim(), 0)
            .map_err(|e| Error::Config {
                line: 0,
                key: WORKERS_ENV.into(),
                reason: e.to_string(),
            })?;
    }
    config.validate()?;
    Ok(config)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USER)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let config = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USER);
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(EXIT_INTERNAL);
        }
    };
    match pool.install(|| run_command(cli.command, &config)) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_user_error() {
                EXIT_USER
            } else {
                EXIT_INTERNAL
            })
        }
    }
}
