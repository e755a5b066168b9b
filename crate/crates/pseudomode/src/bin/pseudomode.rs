use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use pseudomode::{run, write_all, Command, Format, RunError, RunOptions, SimulationConfig};

#[derive(Debug, Parser)]
#[command(
    version,
    about = "Pseudomode simulation of non-Markovian spontaneous decay"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Simulation config (TOML); not used by figure2
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Overrides sampler.seed
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,

    /// Sampler threads (default: all cores); results do not depend on it
    #[arg(long, global = true)]
    workers: Option<usize>,
}

fn load(cli: &Cli) -> Result<SimulationConfig, RunError> {
    let mut cfg = match (&cli.config, cli.command) {
        (Some(_), Command::Figure2) => {
            return Err(RunError::Usage(
                "figure2 runs at fixed parameters and takes no --config".into(),
            ))
        }
        (None, Command::Figure2) => SimulationConfig::figure2(),
        (None, _) => return Err(RunError::Usage("--config is required".into())),
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| RunError::Usage(format!("cannot read {}: {e}", path.display())))?;
            SimulationConfig::parse(&text)
                .map_err(|e| RunError::Usage(format!("{}: {e}", path.display())))?
        }
    };
    if let Some(seed) = cli.seed {
        cfg.override_seed(seed);
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = load(&cli).and_then(|cfg| {
        for w in &cfg.warnings {
            eprintln!("warning: {w}");
        }
        let artifacts = run(
            cli.command,
            &cfg,
            &RunOptions {
                workers: cli.workers,
            },
        )?;
        Ok(write_all(&cli.out, &artifacts, cli.format)?)
    });
    match result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
