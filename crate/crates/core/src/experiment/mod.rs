//! Scenario configuration, the subcommands and their reports.

mod commands;
mod config;
mod report;

pub use commands::{cmd_extend, cmd_lemmas, cmd_rigidity, cmd_sweep, cmd_validate};
pub use config::{
    build_twist, random_ideal, BumpConfig, GateConfig, ProbeConfig, SampleConfig, Scenario,
    ScenarioConfig, SweepConfig, TwistConfig,
};
pub use report::{error_exit_code, Check, RunReport, Status};
