use apfsim::cli::{cmd_compare, cmd_emd, cmd_simulate, load_config, CliError};
use apfsim::emd::EmdConfig;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "apfsim", version, about = "Shunt active power filter simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario JSON; omitted fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also write SVG plots.
    #[arg(long)]
    plots: bool,
    /// Print the effective configuration as JSON and exit.
    #[arg(long)]
    dump_config: bool,
    /// Override the disturbance seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one strategy and write trace, metrics and summary.
    Simulate(RunArgs),
    /// Run both strategies on the same scenario and compare them.
    Compare(RunArgs),
    /// Decompose a single-column CSV signal into IMFs.
    Emd {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        sample_rate: f64,
        #[arg(long)]
        out: PathBuf,
        /// JSON file with EMD settings.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(a) | Command::Compare(a) if a.dump_config => {
            let cfg = load_config(a.config.as_deref(), a.seed)?;
            println!("{}", cfg.to_json());
        }
        Command::Simulate(a) => {
            let cfg = load_config(a.config.as_deref(), a.seed)?;
            let out = cmd_simulate(&cfg, &a.out, a.plots)?;
            print!("{}", std::fs::read_to_string(&out.summary).unwrap_or_default());
            eprintln!("wrote {}", a.out.display());
        }
        Command::Compare(a) => {
            let cfg = load_config(a.config.as_deref(), a.seed)?;
            let table = cmd_compare(&cfg, &a.out, a.plots)?;
            print!("{}", table.to_text());
            eprintln!("wrote {}", a.out.display());
        }
        Command::Emd {
            input,
            sample_rate,
            out,
            config,
        } => {
            let cfg: EmdConfig = match config {
                Some(p) => {
                    let text = std::fs::read_to_string(&p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
                    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?
                }
                None => EmdConfig::default(),
            };
            let n = cmd_emd(&input, sample_rate, &out, &cfg)?;
            eprintln!("wrote {n} IMFs and residue to {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("apfsim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
