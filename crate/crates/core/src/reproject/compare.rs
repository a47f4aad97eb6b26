use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rayon::prelude::*;
use serde::Serialize;

use super::ReprojectError;
use crate::geom::{map_dir, map_dir_separable, Displacement, ImageDims, SphereDir, StepReading};

/// Angular disagreement between the exact and the separable direction maps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub width: u32,
    pub height: u32,
    pub step: f64,
    pub direction: f64,
    pub reading: StepReading,
    /// Largest per-pixel angle over the full frame, radians.
    pub max_error: f64,
    pub mean_error: f64,
    /// Destination pixel `(x, y)` holding `max_error`.
    pub worst_pixel: (u32, u32),
    /// Largest angle on the exact equator (polar = π/2) sampled at every
    /// column center.
    pub equator_max_error: f64,
}

#[derive(Clone, Copy)]
struct RowStats {
    max: f64,
    argmax: u32,
    sum: f64,
}

fn disagreement(
    d: SphereDir,
    disp: &Displacement,
    reading: StepReading,
) -> Result<f64, ReprojectError> {
    let exact = map_dir(d, disp);
    let approx = map_dir_separable(d, disp, reading)?;
    Ok(exact.angle_to(&approx))
}

fn scan_row(
    polar: f64,
    width: u32,
    disp: &Displacement,
    reading: StepReading,
) -> Result<RowStats, ReprojectError> {
    let mut stats = RowStats {
        max: 0.0,
        argmax: 0,
        sum: 0.0,
    };
    for x in 0..width {
        let az = TAU * (x as f64 + 0.5) / width as f64;
        let err = disagreement(SphereDir::new(az, polar), disp, reading)?;
        stats.sum += err;
        if err > stats.max {
            stats.max = err;
            stats.argmax = x;
        }
    }
    Ok(stats)
}

/// Compares the two direction maps at every pixel center.
///
/// Rows are scanned in parallel and folded in row order, so the report is
/// identical for any thread count.
pub fn compare_methods(
    dims: ImageDims,
    disp: &Displacement,
    reading: StepReading,
) -> Result<CompareReport, ReprojectError> {
    let h = dims.height();
    let rows = (0..h)
        .into_par_iter()
        .map(|y| {
            scan_row(
                PI * (y as f64 + 0.5) / h as f64,
                dims.width(),
                disp,
                reading,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut max_error = 0.0;
    let mut worst_pixel = (0, 0);
    let mut sum = 0.0;
    for (y, r) in rows.iter().enumerate() {
        sum += r.sum;
        if r.max > max_error {
            max_error = r.max;
            worst_pixel = (r.argmax, y as u32);
        }
    }
    let equator = scan_row(FRAC_PI_2, dims.width(), disp, reading)?;

    Ok(CompareReport {
        width: dims.width(),
        height: h,
        step: disp.step(),
        direction: disp.direction(),
        reading,
        max_error,
        mean_error: sum / dims.pixel_count() as f64,
        worst_pixel,
        equator_max_error: equator.max,
    })
}
