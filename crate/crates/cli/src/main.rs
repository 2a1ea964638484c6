use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use infreg_cli::config::{ExampleName, VariantName};
use infreg_cli::{parse_config, run, CliError, Command, ConfigError, JobConfig};
use infreg_core::Exponents;

/// Capacities, Wiener integrals and regularity at infinity.
#[derive(Debug, Parser)]
#[command(name = "infreg", version)]
struct Args {
    /// Job file; without one, n = p = 2 and the flags below describe the job.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    command: Option<Command>,
    /// Directory for CSV and domain files.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Seeds a random initial guess for the grid solvers.
    #[arg(long)]
    seed: Option<u64>,
    /// Grid spacing; for `capacity` it also selects the grid solver.
    #[arg(long)]
    grid_h: Option<f64>,
    /// Upper end of the sampled radii.
    #[arg(long)]
    rmax: Option<f64>,
    #[arg(long, value_enum)]
    variant: Option<VariantName>,
    #[arg(long, value_enum)]
    which: Option<ExampleName>,
}

fn job(args: &Args) -> Result<JobConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
            parse_config(&text)?
        }
        None => {
            let Some(command) = args.command else {
                return Err(ConfigError::Validation("give --config or --command".into()).into());
            };
            JobConfig::new(command, Exponents::new(2, 2.0)?)
        }
    };
    let p = &mut cfg.params;
    if let Some(c) = args.command {
        cfg.command = c;
    }
    p.seed = args.seed.or(p.seed);
    p.grid_h = args.grid_h.or(p.grid_h);
    p.r_max = args.rmax.or(p.r_max);
    p.variant = args.variant.or(p.variant);
    p.which = args.which.or(p.which);
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match job(&args).and_then(|cfg| run(&cfg, &args.out)) {
        Ok(o) => {
            println!("{}", o.summary);
            for f in &o.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
