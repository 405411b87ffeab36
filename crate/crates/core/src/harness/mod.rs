//! Command orchestration, reporting, similarity analysis and rendering.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod render;
pub mod report;

pub use commands::{exit_code, shipped_eval_batch, PolicyChoice, EVAL_BATCH_SEED, EVAL_BATCH_SIZE};
pub use config::RunConfig;
pub use manifest::{RunManifest, MANIFEST_FILE};
pub use render::render_artifacts;
pub use report::{report_results, similarity_analysis, ResultRow, SimilarityReport};
