//! Experiment runner for the underlay relay outage toolkit: figure presets,
//! parameter sweeps, three-way validation and CSV output.

pub mod presets;
pub mod spec;
pub mod sweep;
pub mod table;
pub mod validation;

pub use presets::figure_preset;
pub use spec::{Antennas, CurveSpec, McSpec, SweepRange, SweepSpec, SweptParameter};
pub use sweep::{run_sweep, CurvePoint, McPoint, RunOptions};
pub use table::{read_csv, write_csv};
pub use validation::{validate_mode, ValidateOptions, ValidationOutcome};
