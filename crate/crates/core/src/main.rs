//! Command-line front end.
//!
//! Exit codes: 0 = the run completed (statistical outcomes live in the
//! report, never in the exit code); 2 = usage or data error.

use clap::{Args, Parser, Subcommand, ValueEnum};

use ladbias::cli::{cmd_test, render_cells, render_diagnostic, OutputFormat, RunConfig};
use ladbias::regression::BpVariant;
use ladbias::simulate::{run_table, Table};

#[derive(Parser)]
#[command(
    name = "ladbias",
    about = "OLS bias diagnostics from LAD residual correlations, with bootstrap calibration",
    disable_version_flag = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full diagnostic (OLS + HAC, Breusch-Pagan, bootstrap bias
    /// test) on a CSV file
    Test(TestArgs),
    /// Reproduce a published simulation grid
    Simulate(SimulateArgs),
    /// Print the version
    Version,
}

#[derive(Args)]
struct TestArgs {
    /// Path to a CSV file with a header row
    #[arg(long)]
    data: String,
    /// Dependent (response) column
    #[arg(long)]
    dep: String,
    /// Comma-separated regressor columns
    #[arg(long, value_delimiter = ',', required = true)]
    regressors: Vec<String>,
    /// Comma-separated columns to natural-log transform
    #[arg(long, value_delimiter = ',')]
    log: Vec<String>,
    /// Bootstrap resamples
    #[arg(long, default_value_t = 1000)]
    b: usize,
    #[arg(long, default_value_t = 20250801)]
    seed: u64,
    /// Newey-West lag (default: plug-in rule)
    #[arg(long)]
    lag: Option<usize>,
    /// Significance level for describing the Breusch-Pagan outcome
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Critical value for the bias decision
    #[arg(long, default_value_t = 1.96)]
    critical: f64,
    /// Breusch-Pagan auxiliary design
    #[arg(long, value_enum, default_value_t = BpArg::Levels)]
    bp: BpArg,
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
    /// Worker threads (0 = automatic)
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct SimulateArgs {
    /// table1 | table2 | table3 | delta5
    table: String,
    /// Replications per cell
    #[arg(long, default_value_t = 500)]
    reps: usize,
    /// Bootstrap resamples per replication
    #[arg(long, default_value_t = 200)]
    b: usize,
    #[arg(long, default_value_t = 20250801)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
    /// Worker threads (0 = automatic)
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum BpArg {
    Levels,
    Squares,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Text => OutputFormat::Text,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

fn configure_threads(threads: usize) {
    if threads > 0 {
        // Ignore the error when a global pool already exists.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
}

fn run(cli: Cli) -> ladbias::Result<()> {
    match cli.command {
        Command::Test(args) => {
            configure_threads(args.threads);
            let config = RunConfig {
                input_path: args.data,
                dep: args.dep,
                regressors: args.regressors,
                log_columns: args.log,
                bootstrap_b: args.b,
                seed: args.seed,
                lag: args.lag,
                alpha: args.alpha,
                critical_value: args.critical,
                bp_variant: match args.bp {
                    BpArg::Levels => BpVariant::Levels,
                    BpArg::Squares => BpVariant::Squares,
                },
                format: args.format.into(),
            };
            let report = cmd_test(&config)?;
            print!("{}", render_diagnostic(&report, config.format));
            Ok(())
        }
        Command::Simulate(args) => {
            configure_threads(args.threads);
            let table: Table = args.table.parse()?;
            let cells = run_table(table, args.reps, args.b, args.seed)?;
            print!("{}", render_cells(&cells, table, args.format.into()));
            Ok(())
        }
        Command::Version => {
            println!("ladbias {}", env!("CARGO_PKG_VERSION"));
            Ok(())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        let mut source = std::error::Error::source(&e);
        while let Some(s) = source {
            eprintln!("  caused by: {s}");
            source = s.source();
        }
        std::process::exit(2);
    }
}
