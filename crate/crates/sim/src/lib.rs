//! Scenario generation, Monte Carlo sweeps and result files for
//! [`fedalloc_core`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod emit;
pub mod error;
pub mod generate;
pub mod scenario_file;
pub mod sweep;

pub use config::{GeneratorConfig, PathLoss};
pub use emit::{emit, read_records, Format, CSV_HEADER};
pub use error::{HarnessError, Result};
pub use generate::{generate_layout, generate_scenario, realize, Layout};
pub use scenario_file::{read_scenario, ScenarioFile};
pub use sweep::{run_sweep, SweepParam, SweepSpec, TrialRecord};
