//! Ensemble runs, statistics, power-law fits and table output.

pub mod config;
pub mod ensemble;
pub mod fit;
pub mod output;
pub mod sweep;

pub use config::{EnsembleConfig, GraphTemplate, ProblemSpec, Quantity, SampleSchedule};
pub use ensemble::{run_ensemble, EnsembleResult, Stat};
pub use fit::{fit_power_law, fit_power_law_weighted, FitResult};
pub use sweep::{scaling_sweep, sweep_cell, SweepCell, SweepRow};
