//! Experiment orchestration for `ehsense`: TOML experiment files, parameter
//! sweeps, figure tables and simulation runs, emitted as CSV or JSON.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod table;

pub use config::{ExperimentKind, ExperimentSpec, SRange};
pub use error::{CliError, Result};

/// Builds the global worker pool, capped by `EHSENSE_THREADS` when set.
pub fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("EHSENSE_THREADS") {
        let n: usize = v.parse().map_err(|_| {
            CliError::Config(format!("EHSENSE_THREADS=`{v}` is not a thread count"))
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    Ok(())
}
