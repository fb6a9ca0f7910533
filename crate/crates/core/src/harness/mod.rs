//! Monte Carlo engine and the command implementations behind the CLI.

mod commands;
mod config;
mod data;
mod presets;
mod simulate;

pub use commands::{
    cmd_are, cmd_rolling, cmd_test, pitfall_alternative, run_pitfall, write_are_csv,
    write_results_csv, write_rolling_csv, AreReportRow, PitfallConfig, PitfallReport,
    ResultsDisplay, RollingRow, PITFALL_DIM,
};
pub use config::{SimulationConfig, TestSpec};
pub use data::{parse_vector, Dataset};
pub use presets::{
    benchmark_sigma, skew_alternative, specified_study, unspecified_study, BENCHMARK_SIGMA,
    SPECIFIED_LAMBDAS, UNSPECIFIED_LAMBDAS,
};
pub use simulate::{run_simulation, ResultRow, ResultTable, MAX_FAILURE_RATE};
