//! Device experiments built on `magnon-core`: free and guided propagation,
//! bends, directional couplers, crystal phase shifts and the Michelson
//! interferometer. Each runner returns a [`RunRecord`] that can be written
//! to a run directory.

pub mod bend;
mod common;
pub mod coupler;
pub mod dmc;
pub mod config;
pub mod error;
pub mod fit;
pub mod michelson;
pub mod propagation;
pub mod record;
pub mod spectra;

pub use config::{parse_config, parse_config_str, ExperimentConfig};
pub use error::{ExpError, Result};
pub use propagation::{run_free_propagation, run_guided_propagation};
pub use record::{write_run_dir, RunManifest, RunRecord, Table};
