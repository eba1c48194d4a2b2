//! Benchmark configuration, drivers, and CSV output.

pub mod config;
pub mod csv;
pub mod run;

pub use config::{BenchmarkConfig, LoadingConfig, MacroConfig, MicroConfig, SolverConfig};
pub use run::{
    prepare_surface, run_alpha_table, run_benchmark, run_offline_fit, write_run_outputs,
    BenchmarkRun,
};
