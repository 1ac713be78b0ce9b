//! Orchestration behind the `treekit` binary: scenario preparation, pipeline
//! runs and density sweeps.

pub mod exit;
pub mod files;
pub mod pipeline;
pub mod scenario;
pub mod sweep;

pub use exit::exit_code;
pub use pipeline::{run_pipeline, PipelineOutput};
pub use scenario::{
    prepare_scenario, Artifact, Platform, RunManifest, ScenarioConfig, ScenarioName, Source,
};
pub use sweep::{sweep_densities, write_csv, PredictionSource, SweepRow};
