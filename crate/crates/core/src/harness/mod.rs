//! CLI-facing orchestration: experiment configuration, run execution with
//! artifact persistence, bundled presets and the kernel selftest.

pub mod config;
pub mod presets;
pub mod runner;

pub use config::{ClaimRequest, DataSpec, ExperimentConfig, FormKind, ParsedConfig};
pub use runner::{
    execute_config_text, fit_exponential, kernels_selftest, report_dir, run_single, RunArtifacts,
};
