//! File formats and run configuration.

pub mod capture;
pub mod config;
pub mod occasions;
pub mod output;

pub use capture::{parse_capture_csv, read_capture_csv, write_capture_csv};
pub use config::{ExperimentSection, ModelChoice, Overrides, RunConfig, SimulateSection};
pub use occasions::{parse_occasions_csv, read_occasions_csv, write_occasions_csv, Occasions};
pub use output::{
    block_of, draws_csvs, json_bytes, read_draws, read_membership, sha256_hex, write_fit_outputs, Manifest,
    OutputDir, WaicRecord,
};
