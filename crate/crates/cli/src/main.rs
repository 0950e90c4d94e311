use beamlab_cli::{list_experiments, load_config, run};
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "beamlab",
    version,
    about = "Spectral Galerkin experiments for the damped extensible beam"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration; built-in defaults when omitted
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the configured output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print only the final status line
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Plain trajectory under the configured laws
    Simulate,
    /// Run the experiment with the given id
    Exp {
        id: String,
    },
    NakaoSuite,
    HarauxSuite,
    Stationary,
    /// Print the experiment catalog
    List,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let id = match &cli.command {
        Command::List => {
            for line in list_experiments() {
                println!("{line}");
            }
            return ExitCode::SUCCESS;
        }
        Command::Simulate => "simulate".to_string(),
        Command::Exp { id } => id.clone(),
        Command::NakaoSuite => "nakao_suite".to_string(),
        Command::HarauxSuite => "haraux_suite".to_string(),
        Command::Stationary => "stationary".to_string(),
    };
    match execute(&cli, &id) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: &Cli, id: &str) -> anyhow::Result<u8> {
    let mut config = load_config(cli.config.as_deref())?;
    if config.experiment.id != id {
        if !beamlab_cli::config::experiment_ids().any(|k| k == id) {
            anyhow::bail!("unknown experiment {id:?}; run `beamlab list`");
        }
        // experiment-specific keys belong to the configured id only
        config.experiment = beamlab_cli::config::ExperimentConfig {
            initial: config.experiment.initial.clone(),
            ..beamlab_cli::config::ExperimentConfig::new(id)
        };
    }
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    if let Some(o) = &cli.out {
        config.output_dir = o.clone();
    }
    let outcome = run(&config)?;
    if !cli.quiet {
        print!("{}", outcome.report.render());
        for a in &outcome.artifacts {
            println!("wrote {}", a.display());
        }
    }
    let status = if outcome.report.passed() { "PASS" } else { "FAIL" };
    println!("{id} seed {}: {status} ({})", config.seed, outcome.dir.display());
    Ok(outcome.exit_code() as u8)
}
