use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use smm_decoherence::scenarios::{self, FigureName, Overrides, PathChoice, StrategyChoice};
use smm_decoherence::verify::{self, Suite};

/// Decoherence dynamics of a driven chiral spin qubit in a Lorentzian bath.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reproduce one of the figure data sets (fig1 … fig5).
    Fig {
        name: String,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Run a JSON configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Run the oracle checks and print a report table.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: SuiteArg,
    },
}

#[derive(Args)]
struct RunFlags {
    /// Relative ODE tolerance (absolute is 1% of it).
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long, value_enum)]
    strategy: Option<StrategyChoice>,
    /// Include the non-Lindblad cross terms in the ODE path.
    #[arg(long)]
    include_nl: bool,
    /// Include the Lamb-shift Hamiltonian in the ODE path.
    #[arg(long)]
    include_lamb: bool,
    #[arg(long, value_enum)]
    path: Option<PathChoice>,
}

impl From<&RunFlags> for Overrides {
    fn from(f: &RunFlags) -> Self {
        Overrides {
            tolerance: f.tolerance,
            strategy: f.strategy,
            include_nl: f.include_nl,
            include_lamb: f.include_lamb,
            path: f.path,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Kernels,
    Jc,
    Paths,
    All,
}

fn run(cli: Cli) -> smm_decoherence::Result<bool> {
    match cli.command {
        Command::Fig { name, out, flags } => {
            let fig: FigureName = name.parse()?;
            for p in scenarios::run_figure(fig, &out, &(&flags).into())? {
                println!("{}", p.display());
            }
            Ok(true)
        }
        Command::Run { config, out, flags } => {
            for p in scenarios::run_config(&config, &out, &(&flags).into())? {
                println!("{}", p.display());
            }
            Ok(true)
        }
        Command::Verify { suite } => {
            let suite = match suite {
                SuiteArg::Kernels => Suite::Kernels,
                SuiteArg::Jc => Suite::Jc,
                SuiteArg::Paths => Suite::Paths,
                SuiteArg::All => Suite::All,
            };
            let reports = verify::run_suite(suite)?;
            for r in &reports {
                println!("{}", r.table_row());
            }
            Ok(!reports.iter().any(|r| r.failed()))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
