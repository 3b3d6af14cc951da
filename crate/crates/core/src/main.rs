use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use stationary_light::config::{self, RunConfig};
use stationary_light::run::{run, RunOptions};
use stationary_light::Result;

/// Simulate slow and stationary light pulses in EIT media.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    /// JSON run config. Optional when --preset is given.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Built-in preset; a --config file is merged over it.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(config::PRESETS.map(|(n, _)| n)))]
    preset: Option<String>,

    /// Worker threads for spectra and sweeps (default: all cores).
    #[arg(long)]
    threads: Option<usize>,

    /// Recorded in the manifest; the solvers use no randomness.
    #[arg(long)]
    seed: Option<u64>,
}

fn load(cli: &Cli) -> Result<RunConfig> {
    match (&cli.config, &cli.preset) {
        (Some(path), preset) => config::parse_config(path, preset.as_deref()),
        (None, Some(preset)) => config::preset_config(preset),
        (None, None) => Err(stationary_light::Error::validation(
            "<cli>",
            "one of --config or --preset is required",
        )),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let options = RunOptions {
        threads: cli.threads,
        seed: cli.seed,
    };
    let result = load(&cli).and_then(|cfg| run(&cfg, &cli.out, &options));
    match result {
        Ok(manifest) => {
            for w in &manifest.warnings {
                eprintln!("warning: {w}");
            }
            for f in &manifest.files {
                println!("{}", cli.out.join(f).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
