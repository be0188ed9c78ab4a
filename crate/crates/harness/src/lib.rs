//! Configuration, experiment orchestration and CSV output for the deep
//! backward scheme solver in `dbs-core`.
//!
//! - [`config`]: run configurations and the `key=value` file format.
//! - [`experiment`]: repeated seeded runs and their statistics.
//! - [`study`]: grids of experiments over `N`, `σ̂`, `p` and width.
//! - [`table`]: CSV emission and parsing.

pub mod config;
pub mod error;
pub mod experiment;
pub mod study;
pub mod table;

pub use config::{load_config, parse_config, Quantile, RunConfig};
pub use error::{Category, HarnessError, Result};
pub use experiment::{run_experiment, RunReport};
pub use study::{convergence_study, StudyGrid, StudyTable};
pub use table::{emit_csv, read_csv, Cell, Table};
