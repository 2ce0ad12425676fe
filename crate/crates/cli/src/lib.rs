//! Command-line front end for the collective ladder-atom simulator: grid
//! sweeps, single points, figure presets and the brute-force cross-check.

pub mod config;
pub mod oracle_check;
pub mod output;
pub mod plotdata;
pub mod presets;
pub mod run;

pub use config::{Mode, OutputFormat, PresetId, RawConfig, SweepConfig};
pub use run::{evaluate, run_points, PointSpec, Row, SeriesRequest};
