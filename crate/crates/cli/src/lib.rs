//! Batch driver for `levysym`: experiment files in, JSON and CSV reports out.
//!
//! Exit codes: 0 when every row holds, 1 when some row fails or a
//! computation errors out (the report is still written), 2 for an invalid
//! spec or command line (nothing is written).

pub mod run;
pub mod spec;
pub mod sweep;

pub use run::{run, Report, Row, CSV_COLUMNS};
pub use spec::{ExperimentSpec, Kind, SchemaError};
pub use sweep::{Parameter, Sweep};
