//! Figure-reproduction scenarios, configuration-file runs and their CSV and
//! manifest output.

pub mod config;
pub mod figures;
pub mod output;

pub use config::{Overrides, PathChoice, ResolvedRun, ScenarioConfig, StrategyChoice};
pub use figures::{fig2_config, fig3_config, run_config, run_figure, run_series, FigureName};
pub use output::{CsvTable, Manifest};
