//! Translate an observer inside an equirectangular panorama and build
//! navigable worlds from chained translations.
//!
//! The crate is organised bottom-up:
//!
//! * [`geom`]: coordinate conventions and the new-sphere → old-sphere
//!   direction map.
//! * [`raster`]: 8-bit RGB equirectangular images.
//! * [`reproject`]: remap fields and whole-image warping.
//! * [`restorer`]: the pluggable distortion-removal step.
//! * [`world`]: move → distort → restore orchestration, manifests and export.

pub mod geom;
pub mod raster;
pub mod reproject;
pub mod restorer;
pub mod world;

pub use geom::{Displacement, ImageDims, PixelCoord, SphereDir, StepReading, UnitVec3};
pub use raster::EquirectImage;
pub use reproject::{Interpolation, RemapField, RemapMethod};

/// Version string recorded in world manifests.
pub const TOOL_VERSION: &str = concat!("panoshift ", env!("CARGO_PKG_VERSION"));
