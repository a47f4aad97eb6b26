use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use super::{RemapMethod, ReprojectError};
use crate::geom::{
    dir_to_pixel, horizontal_map_closed, intersect_relative, separable_from_parts, wrap,
    wrap_signed, Displacement, GeomError, ImageDims, PixelCoord,
};

/// Source coordinate for every destination pixel, row-major.
///
/// Every stored `x` lies in `[0, width)` and every `y` in `[0, height)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RemapField {
    dims: ImageDims,
    coords: Vec<PixelCoord>,
}

impl RemapField {
    pub fn dims(&self) -> ImageDims {
        self.dims
    }

    pub fn coords(&self) -> &[PixelCoord] {
        &self.coords
    }

    pub fn source(&self, x: u32, y: u32) -> PixelCoord {
        self.coords[y as usize * self.dims.width() as usize + x as usize]
    }

    pub(crate) fn row(&self, y: usize) -> &[PixelCoord] {
        let w = self.dims.width() as usize;
        &self.coords[y * w..(y + 1) * w]
    }
}

/// Per-column azimuths relative to the displacement, computed in pixel units
/// so that grid-aligned directions give exact offsets.
fn relative_columns(dims: ImageDims, disp: &Displacement) -> (f64, Vec<f64>) {
    let w = dims.width() as f64;
    let dir_px = disp.direction() * w / 360.0;
    let rel = (0..dims.width())
        .map(|x| (x as f64 + 0.5 - dir_px) * TAU / w)
        .collect();
    (dir_px, rel)
}

fn row_polars(dims: ImageDims) -> Vec<f64> {
    let h = dims.height() as f64;
    (0..dims.height())
        .map(|y| PI * (y as f64 + 0.5) / h)
        .collect()
}

pub fn build_remap_field(
    dims: ImageDims,
    disp: &Displacement,
    method: RemapMethod,
) -> Result<RemapField, ReprojectError> {
    let w = dims.width() as usize;
    let mut coords = vec![PixelCoord::default(); dims.pixel_count()];
    let (dir_px, rel) = relative_columns(dims, disp);
    let polars = row_polars(dims);
    let step = disp.step();

    match method {
        RemapMethod::Oracle3d => {
            let cols: Vec<(f64, f64)> = rel.iter().map(|r| r.sin_cos()).collect();
            let (wf, hf) = (dims.width() as f64, dims.height() as f64);
            let px_per_rad = wf / TAU;
            let rows_per_rad = hf / PI;
            let y_max = hf - 0.5;
            coords
                .par_chunks_mut(w)
                .zip(polars.par_iter())
                .for_each(|(row, &polar)| {
                    let (sin_p, cos_p) = polar.sin_cos();
                    for (out, &(sin_r, cos_r)) in row.iter_mut().zip(&cols) {
                        let (rel_src, polar_src) =
                            intersect_relative(cos_r, sin_r, sin_p, cos_p, step);
                        out.x = wrap(dir_px + rel_src * px_per_rad - 0.5, wf);
                        out.y = (polar_src * rows_per_rad - 0.5).clamp(0.0, y_max);
                    }
                });
        }
        RemapMethod::PaperSeparable(reading) => {
            let psis = rel
                .iter()
                .map(|&r| horizontal_map_closed(wrap_signed(r), step))
                .collect::<Result<Vec<_>, _>>()?;
            let dir = disp.direction_rad();
            coords
                .par_chunks_mut(w)
                .zip(polars.par_iter())
                .try_for_each(|(row, &polar)| -> Result<(), GeomError> {
                    for (out, &psi) in row.iter_mut().zip(&psis) {
                        let src = separable_from_parts(psi, polar, step, dir, reading)?;
                        *out = dir_to_pixel(src, dims);
                    }
                    Ok(())
                })?;
        }
    }
    Ok(RemapField { dims, coords })
}
