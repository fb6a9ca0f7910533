use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ellsym::estimators::{EstimatorChoice, LocationEstimator, ScatterEstimator};
use ellsym::harness::{self, Dataset, PitfallConfig, SimulationConfig};
use ellsym::radial::RadialFamily;
use ellsym::testing::{ReferenceScale, TestKind};
use ellsym::Error;

#[derive(Parser)]
#[command(name = "ellsym", version, about = "Tests for elliptical symmetry")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo study described by a JSON file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed of the configuration.
        #[arg(long)]
        seed: Option<u64>,
        /// CSV output; defaults to the `output` field of the configuration.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run tests once on a CSV dataset.
    Test {
        #[command(flatten)]
        common: DataArgs,
        /// Also write the results as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run tests on sliding windows of a CSV dataset.
    Rolling {
        #[command(flatten)]
        common: DataArgs,
        #[arg(long)]
        window: usize,
        #[arg(long)]
        step: usize,
        /// CSV output; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Asymptotic relative efficiencies against the pseudo-Gaussian test.
    Are {
        #[arg(long = "d", value_delimiter = ',', default_values_t = [2usize, 3, 5, 10])]
        dims: Vec<usize>,
        #[arg(
            long = "ref",
            value_delimiter = ',',
            default_value = "t4,t5,t7,t10,t20"
        )]
        references: Vec<RadialFamily>,
        #[arg(
            long = "under",
            value_delimiter = ',',
            default_value = "t4.1,t5,t7,t10,t20"
        )]
        actuals: Vec<RadialFamily>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The location pitfall experiment in dimension 10.
    Pitfall {
        #[arg(long, default_value_t = 500)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        n: usize,
        /// Use the standardized Student scores instead of the raw ones.
        #[arg(long)]
        standardized: bool,
    },
}

#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    data: PathBuf,
    /// Comma-separated test names, e.g. `specified,semiparam-t4-raw,cassart-pg`.
    #[arg(long, value_delimiter = ',', required = true)]
    tests: Vec<TestKind>,
    /// Location for the specified-location tests, e.g. `0,0,0`.
    #[arg(long, value_parser = parse_theta, allow_hyphen_values = true)]
    theta0: Option<Theta>,
    #[arg(long, default_value = "mean")]
    location_estimator: LocationEstimator,
    #[arg(long, default_value = "tyler")]
    scatter_estimator: ScatterEstimator,
}

impl DataArgs {
    fn theta0(&self) -> Option<&[f64]> {
        self.theta0.as_ref().map(|t| t.0.as_slice())
    }

    fn choice(&self) -> EstimatorChoice {
        EstimatorChoice::new(self.location_estimator, self.scatter_estimator)
    }
}

#[derive(Clone)]
struct Theta(Vec<f64>);

fn parse_theta(s: &str) -> Result<Theta, String> {
    harness::parse_vector(s)
        .map(Theta)
        .map_err(|e| e.to_string())
}

fn output(path: Option<&PathBuf>) -> ellsym::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> ellsym::Result<()> {
    match cli.command {
        Command::Simulate { config, seed, out } => {
            let mut cfg = SimulationConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let table = harness::run_simulation(&cfg)?;
            print!("{table}");
            if let Some(path) = out.or(cfg.output.clone()) {
                table.save(&path)?;
            }
            let failed = table.failed_cells().count();
            if failed > 0 {
                return Err(Error::NumericalFailure(format!(
                    "{failed} cells exceeded the failure budget"
                )));
            }
        }
        Command::Test { common, out } => {
            let data = Dataset::load(&common.data)?;
            let results =
                harness::cmd_test(&data, &common.tests, common.theta0(), common.choice())?;
            print!("{}", harness::ResultsDisplay(&results));
            if let Some(p) = out {
                harness::write_results_csv(&results, output(Some(&p))?)?;
            }
        }
        Command::Rolling {
            common,
            window,
            step,
            out,
        } => {
            let data = Dataset::load(&common.data)?;
            let rows = harness::cmd_rolling(
                &data,
                window,
                step,
                &common.tests,
                common.theta0(),
                common.choice(),
            )?;
            harness::write_rolling_csv(&rows, output(out.as_ref())?)?;
        }
        Command::Are {
            dims,
            references,
            actuals,
            out,
        } => {
            let rows = harness::cmd_are(&dims, &references, &actuals);
            harness::write_are_csv(&rows, output(out.as_ref())?)?;
        }
        Command::Pitfall {
            reps,
            seed,
            n,
            standardized,
        } => {
            let reference_scale = if standardized {
                ReferenceScale::Standardized
            } else {
                ReferenceScale::Raw
            };
            let cfg = PitfallConfig {
                replications: reps,
                n,
                seed,
                reference_scale,
                ..Default::default()
            };
            print!("{}", harness::run_pitfall(cfg)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
