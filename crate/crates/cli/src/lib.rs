//! Run configuration, output formats (CSV time series, legacy VTK snapshots,
//! EOC tables), and the command drivers behind the `thinfilm` binary.

pub mod config;
pub mod csv;
pub mod driver;
pub mod vtk;

pub use config::{parse_config, ConfigError, RunConfig};
pub use driver::{build_initial_state, run_config, run_context, DriverError};
