//! Vanishing-viscosity sweeps, the pinned acceptance checks, and the
//! manifest runner that aggregates them into a report.

pub mod checks;
pub mod fit;
pub mod manifest;
pub mod sweep;

pub use checks::{run_check, CheckKind, CheckOutcome, Settings};
pub use manifest::{run_manifest, run_manifest_in, ExperimentReport, Manifest};
pub use sweep::{viscosity_sweep, InitialData, RateReport, Reference, SweepConfig};
