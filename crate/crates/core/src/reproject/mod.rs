//! Whole-image panorama translation by inverse warping.
//!
//! For every destination pixel the [`RemapField`] stores where in the source
//! panorama its colour comes from; [`remap_image`] then pulls those colours
//! with the chosen [`Interpolation`]. Both passes split work by destination
//! rows on the current rayon pool and are deterministic regardless of the
//! pool size.

mod compare;
mod field;
mod sample;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{Displacement, GeomError, ImageDims, StepReading};
use crate::raster::EquirectImage;

pub use compare::{compare_methods, CompareReport};
pub use field::{build_remap_field, RemapField};
pub use sample::{remap_image, sample};

#[derive(Debug, Error)]
pub enum ReprojectError {
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("remap field is {field} but image is {image}")]
    DimsMismatch { field: ImageDims, image: ImageDims },
}

/// Which direction map drives the warp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum RemapMethod {
    /// Exact ray–sphere intersection.
    #[default]
    Oracle3d,
    /// Separable closed-form approximation.
    PaperSeparable(StepReading),
}

impl fmt::Display for RemapMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RemapMethod::Oracle3d => f.write_str("oracle3d"),
            RemapMethod::PaperSeparable(StepReading::Literal) => f.write_str("paper-separable"),
            RemapMethod::PaperSeparable(StepReading::InPlane) => {
                f.write_str("paper-separable:in-plane")
            }
        }
    }
}

impl FromStr for RemapMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "oracle3d" => Ok(RemapMethod::Oracle3d),
            "paper-separable" | "paper-separable:literal" => {
                Ok(RemapMethod::PaperSeparable(StepReading::Literal))
            }
            "paper-separable:in-plane" => Ok(RemapMethod::PaperSeparable(StepReading::InPlane)),
            other => Err(format!(
                "unknown remap method '{other}' (expected oracle3d, paper-separable or paper-separable:in-plane)"
            )),
        }
    }
}

impl Serialize for RemapMethod {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RemapMethod {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    Nearest,
    #[default]
    Bilinear,
}

impl fmt::Display for Interpolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Interpolation::Nearest => "nearest",
            Interpolation::Bilinear => "bilinear",
        })
    }
}

impl FromStr for Interpolation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nearest" => Ok(Interpolation::Nearest),
            "bilinear" => Ok(Interpolation::Bilinear),
            other => Err(format!(
                "unknown interpolation '{other}' (expected nearest or bilinear)"
            )),
        }
    }
}

/// Warps `image` to what an observer moved by `disp` would see.
pub fn reproject_image(
    image: &EquirectImage,
    disp: &Displacement,
    method: RemapMethod,
    interp: Interpolation,
) -> Result<EquirectImage, ReprojectError> {
    let field = build_remap_field(image.dims(), disp, method)?;
    remap_image(image, &field, interp)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct FieldKey {
    dims: ImageDims,
    step_bits: u64,
    direction_bits: u64,
    method: RemapMethod,
}

/// Memoizes remap fields by (dims, displacement, method).
///
/// Fields are immutable and shared through `Arc`, so a cache can serve any
/// number of threads.
#[derive(Debug, Default)]
pub struct RemapCache {
    fields: Mutex<HashMap<FieldKey, Arc<RemapField>>>,
}

impl RemapCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get_or_build(
        &self,
        dims: ImageDims,
        disp: &Displacement,
        method: RemapMethod,
    ) -> Result<Arc<RemapField>, ReprojectError> {
        let key = FieldKey {
            dims,
            step_bits: disp.step().to_bits(),
            direction_bits: disp.direction().to_bits(),
            method,
        };
        if let Some(field) = self.fields.lock().expect("cache poisoned").get(&key) {
            return Ok(Arc::clone(field));
        }
        let field = Arc::new(build_remap_field(dims, disp, method)?);
        self.fields
            .lock()
            .expect("cache poisoned")
            .entry(key)
            .or_insert_with(|| Arc::clone(&field));
        Ok(field)
    }

    pub fn reproject(
        &self,
        image: &EquirectImage,
        disp: &Displacement,
        method: RemapMethod,
        interp: Interpolation,
    ) -> Result<EquirectImage, ReprojectError> {
        let field = self.get_or_build(image.dims(), disp, method)?;
        remap_image(image, &field, interp)
    }

    pub fn len(&self) -> usize {
        self.fields.lock().expect("cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
