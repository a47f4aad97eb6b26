//! Orchestrates chained translations into a persisted, navigable world.
//!
//! Output layout:
//!
//! ```text
//! <out>/world.json
//! <out>/scenes/<id>.png
//! <out>/scenes/<id>.distorted.png
//! ```

mod build;
mod config;
mod export;
mod manifest;

use std::path::PathBuf;

use thiserror::Error;

use crate::raster::RasterError;
use crate::reproject::ReprojectError;
use crate::restorer::RestoreError;

pub use build::build_world;
pub use config::{GridSpec, InitialScene, MoveSpec, PlannedMove, WorldConfig};
pub use export::{export_viewer, ExportError, ExportSummary, FileFailure};
pub use manifest::{
    graph_violations, validate_manifest, BuildStatus, Edge, Metadata, SceneEntry, Violation,
    WorldGraph, MANIFEST_FILE, SCENES_DIR,
};

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("invalid world config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error(transparent)]
    Reproject(#[from] ReprojectError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse manifest {path}: {detail}")]
    Manifest { path: PathBuf, detail: String },
    #[error("world build stopped at scene '{scene}': {source}")]
    Partial {
        scene: String,
        #[source]
        source: RestoreError,
        graph: Box<WorldGraph>,
    },
}
