//! `gibbs`: thermodynamic sweeps, verification, sampling and equilibration
//! from a JSON model configuration.

mod commands;
mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gibbs_core::Engine;

use config::{linear_grid, parse_vector, CliError, CliResult, EquilibrateConfig, RunConfig};

const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Parser)]
#[command(name = "gibbs", version, about = "Gibbs states of classical and Lie-group models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate log P, energy, entropy and variance over a grid of b.
    Thermo(RunArgs),
    /// Cross-check closed forms against the oracles; exit 1 on any failure.
    Verify(RunArgs),
    /// Draw a batch from the Gibbs density as CSV.
    Sample(RunArgs),
    /// Bring two scalar systems into thermal contact.
    Equilibrate(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON model configuration.
    #[arg(long)]
    config: PathBuf,
    /// Single parameter value; comma-separated for vector parameters.
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["b_min", "b_max", "steps"])]
    b: Option<String>,
    #[arg(long, allow_hyphen_values = true, requires_all = ["b_max", "steps"])]
    b_min: Option<String>,
    #[arg(long, allow_hyphen_values = true, requires_all = ["b_min", "steps"])]
    b_max: Option<String>,
    #[arg(long)]
    steps: Option<usize>,
    /// Sample count (oracle budget for thermo and verify).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn grid(&self, cfg: &RunConfig) -> CliResult<Vec<Vec<f64>>> {
        if let Some(b) = &self.b {
            return Ok(vec![parse_vector(b)?]);
        }
        if let (Some(lo), Some(hi), Some(steps)) = (&self.b_min, &self.b_max, self.steps) {
            return linear_grid(&parse_vector(lo)?, &parse_vector(hi)?, steps);
        }
        match &cfg.b {
            Some(b) => Ok(vec![b.clone()]),
            None => Err(CliError::usage("no b given: pass --b, or --b-min/--b-max/--steps")),
        }
    }

    fn single_b(&self, cfg: &RunConfig) -> CliResult<Vec<f64>> {
        let grid = self.grid(cfg)?;
        match grid.as_slice() {
            [b] => Ok(b.clone()),
            _ => Err(CliError::usage("this command takes a single b")),
        }
    }

    fn engine(&self, boltzmann: f64) -> CliResult<Engine> {
        let mut e = Engine::with_seed(self.seed);
        e.boltzmann = boltzmann;
        if let Some(n) = self.n {
            if n == 0 {
                return Err(CliError::usage("--n must be positive"));
            }
            e.n_samples = n;
        }
        Ok(e)
    }

    fn output(&self) -> CliResult<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => {
                Box::new(BufWriter::new(File::create(p).map_err(|e| {
                    CliError::usage(format!("cannot create {}: {e}", p.display()))
                })?))
            }
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Thermo(a) => {
            let cfg = RunConfig::load(&a.config)?;
            let grid = a.grid(&cfg)?;
            let engine = a.engine(cfg.boltzmann_constant)?;
            let mut out = a.output()?;
            commands::thermo(&cfg, &grid, &engine, &mut out)?;
            out.flush()?;
        }
        Command::Verify(a) => {
            let cfg = RunConfig::load(&a.config)?;
            let b = a.single_b(&cfg)?;
            let engine = a.engine(cfg.boltzmann_constant)?;
            let mut out = a.output()?;
            let r = commands::verify_cmd(&cfg, &b, engine.n_samples, a.seed, &mut out);
            out.flush()?;
            r?;
        }
        Command::Sample(a) => {
            let cfg = RunConfig::load(&a.config)?;
            let b = a.single_b(&cfg)?;
            let mut out = a.output()?;
            commands::sample(&cfg, &b, a.n.unwrap_or(10_000), a.seed, &mut out)?;
            out.flush()?;
        }
        Command::Equilibrate(a) => {
            let cfg = EquilibrateConfig::load(&a.config)?;
            let engine = a.engine(cfg.boltzmann_constant)?;
            let mut out = a.output()?;
            commands::equilibrate(&cfg, &engine, &mut out)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gibbs: {e}");
            ExitCode::from(e.code)
        }
    }
}
