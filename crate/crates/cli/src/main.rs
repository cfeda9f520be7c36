use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use propoor_cli::pipeline::parse_list;
use propoor_cli::simulate::{load_mc_config, render_coverage};
use propoor_cli::{run_pipeline, CliError, Format, PanelSource, RunConfig};
use propoor_core::mc::coverage_experiment;
use propoor_core::poverty::DEFAULT_GRID;
use propoor_core::LinePolicy;

/// Poverty and inequality variations between two periods of paired incomes.
#[derive(Parser)]
#[command(name = "propoor", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate ΔI, ΔJ and the ratios ΔJ/ΔI with confidence intervals.
    Estimate(EstimateArgs),
    /// Run a Monte-Carlo coverage experiment from a key = value file.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct EstimateArgs {
    /// Period-1 incomes, one per line.
    #[arg(long, env = "PROPOOR_DATA1", requires = "data2", conflicts_with = "paired")]
    data1: Option<PathBuf>,
    /// Period-2 incomes, one per line, paired with --data1 by line number.
    #[arg(long, env = "PROPOOR_DATA2", requires = "data1")]
    data2: Option<PathBuf>,
    /// Two whitespace-separated columns: period-1 and period-2 income.
    #[arg(long, env = "PROPOOR_PAIRED", required_unless_present = "data1")]
    paired: Option<PathBuf>,
    /// Inequality measures, e.g. GE:0.5,THEIL,MLD,ATK:0.5,ATK:-0.5,CHAMP,KOLM:1
    #[arg(long, env = "PROPOOR_INEQ", default_value = "")]
    ineq: String,
    /// Poverty measures, e.g. FGT:0,FGT:1,FGT:2,SEN,KAK:1,KAK:2,SHOR
    #[arg(long, env = "PROPOOR_POV", default_value = "")]
    pov: String,
    #[arg(long, env = "PROPOOR_Z1", requires = "z2", conflicts_with = "z_median_frac", allow_negative_numbers = true)]
    z1: Option<f64>,
    #[arg(long, env = "PROPOOR_Z2", requires = "z1", allow_negative_numbers = true)]
    z2: Option<f64>,
    /// Poverty line as this fraction of each period's sample median [default: 0.5]
    #[arg(long, env = "PROPOOR_Z_MEDIAN_FRAC")]
    z_median_frac: Option<f64>,
    #[arg(long, env = "PROPOOR_LEVEL", default_value_t = 0.95)]
    level: f64,
    /// Quadrature nodes per axis for the poverty variance.
    #[arg(long, env = "PROPOOR_GRID", default_value_t = DEFAULT_GRID)]
    grid: usize,
    /// Percentile-bootstrap intervals with this many pair resamples.
    #[arg(long, env = "PROPOOR_BOOTSTRAP")]
    bootstrap: Option<usize>,
    #[arg(long, env = "PROPOOR_SEED", default_value_t = 0)]
    seed: u64,
    /// text, csv or json
    #[arg(long, env = "PROPOOR_FORMAT", default_value = "text")]
    format: String,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, env = "PROPOOR_CONFIG")]
    config: PathBuf,
    /// json or csv
    #[arg(long, env = "PROPOOR_FORMAT", default_value = "json")]
    format: String,
}

fn estimate(args: EstimateArgs) -> Result<String, CliError> {
    let source = match (args.paired, args.data1, args.data2) {
        (Some(p), None, None) => PanelSource::Paired(p),
        (None, Some(data1), Some(data2)) => PanelSource::Files { data1, data2 },
        _ => return Err(CliError::Config("give --data1 and --data2, or --paired".into())),
    };
    let mut cfg = RunConfig::new(source);
    cfg.inequality = parse_list(&args.ineq)?;
    cfg.poverty = parse_list(&args.pov)?;
    cfg.lines = match (args.z1, args.z2, args.z_median_frac) {
        (Some(z1), Some(z2), None) => LinePolicy::Fixed { z1, z2 },
        (None, None, Some(f)) => LinePolicy::MedianFraction(f),
        (None, None, None) => LinePolicy::default(),
        _ => return Err(CliError::Config("give --z1 with --z2, or --z-median-frac".into())),
    };
    cfg.level = args.level;
    cfg.grid = args.grid;
    cfg.bootstrap = args.bootstrap;
    cfg.seed = args.seed;
    cfg.format = args.format.parse()?;
    run_pipeline(&cfg)?.render(cfg.format)
}

fn simulate(args: SimulateArgs) -> Result<String, CliError> {
    let format: Format = args.format.parse()?;
    let cfg = load_mc_config(&args.config)?;
    render_coverage(&coverage_experiment(&cfg)?, format)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Estimate(args) => estimate(args),
        Command::Simulate(args) => simulate(args),
    };
    match result {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(5);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
