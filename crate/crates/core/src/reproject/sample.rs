use rayon::prelude::*;

use super::{Interpolation, RemapField, ReprojectError};
use crate::geom::{wrap, PixelCoord};
use crate::raster::EquirectImage;

/// Colour at a continuous coordinate.
///
/// `x` wraps across the longitude seam (column `width - 1` neighbours
/// column 0); `y` clamps at the pole rows.
pub fn sample(image: &EquirectImage, coord: PixelCoord, interp: Interpolation) -> [u8; 3] {
    let w = image.dims().width() as f64;
    let h = image.dims().height() as f64;
    let c = PixelCoord {
        x: wrap(coord.x, w),
        y: coord.y.clamp(0.0, h - 0.5),
    };
    let sampler = Sampler::new(image);
    let mut out = [0u8; 3];
    match interp {
        Interpolation::Nearest => sampler.nearest(c, &mut out),
        Interpolation::Bilinear => sampler.bilinear(c, &mut out),
    }
    out
}

/// `v.round()` for `v >= 0` without the libm call.
#[inline]
fn round_nonneg(v: f64) -> usize {
    let t = v as usize;
    if v - t as f64 >= 0.5 {
        t + 1
    } else {
        t
    }
}

struct Sampler<'a> {
    pixels: &'a [u8],
    width: usize,
    height: usize,
}

impl<'a> Sampler<'a> {
    fn new(image: &'a EquirectImage) -> Self {
        Self {
            pixels: image.pixels(),
            width: image.dims().width() as usize,
            height: image.dims().height() as usize,
        }
    }

    /// Expects `c` already normalized (x in `[0, w)`, y in `[0, h)`).
    #[inline(always)]
    fn nearest(&self, c: PixelCoord, out: &mut [u8]) {
        let mut xi = round_nonneg(c.x);
        if xi >= self.width {
            xi -= self.width;
        }
        let yi = round_nonneg(c.y).min(self.height - 1);
        let i = (yi * self.width + xi) * 3;
        let s = &self.pixels[i..i + 3];
        out[0] = s[0];
        out[1] = s[1];
        out[2] = s[2];
    }

    /// Weights are quantized to 1/256 of a pixel; the result is within one
    /// level of exact float blending and exact at pixel centres.
    #[inline(always)]
    fn bilinear(&self, c: PixelCoord, out: &mut [u8]) {
        // Scaling by 256 is exact, so one cast yields both tap and weight.
        let qx = (c.x * 256.0 + 0.5) as u32;
        let qy = (c.y * 256.0 + 0.5) as u32;
        let (fx, fy) = (qx & 255, qy & 255);
        let mut x0 = (qx >> 8) as usize;
        if x0 >= self.width {
            x0 -= self.width;
        }
        let y0 = ((qy >> 8) as usize).min(self.height - 1);
        let y1 = (y0 + 1).min(self.height - 1);

        let top = self.pair(y0, x0);
        let bottom = self.pair(y1, x0);
        let (gx, gy) = (256 - fx, 256 - fy);
        for ch in 0..3 {
            let t = top[ch] as u32 * gx + top[ch + 3] as u32 * fx;
            let b = bottom[ch] as u32 * gx + bottom[ch + 3] as u32 * fx;
            out[ch] = ((t * gy + b * fy + (1 << 15)) >> 16) as u8;
        }
    }

    /// Pixel `(x, y)` followed by its right neighbour, wrapping at the seam.
    #[inline(always)]
    fn pair(&self, y: usize, x: usize) -> [u8; 6] {
        let i = (y * self.width + x) * 3;
        if x + 1 < self.width {
            if let Some(s) = self.pixels.get(i..i + 6) {
                return [s[0], s[1], s[2], s[3], s[4], s[5]];
            }
        }
        let j = y * self.width * 3;
        let (a, b) = (&self.pixels[i..i + 3], &self.pixels[j..j + 3]);
        [a[0], a[1], a[2], b[0], b[1], b[2]]
    }
}

/// Pulls every destination pixel from `field`'s source coordinate.
pub fn remap_image(
    image: &EquirectImage,
    field: &RemapField,
    interp: Interpolation,
) -> Result<EquirectImage, ReprojectError> {
    let dims = image.dims();
    if field.dims() != dims {
        return Err(ReprojectError::DimsMismatch {
            field: field.dims(),
            image: dims,
        });
    }
    let w = dims.width() as usize;
    let sampler = Sampler::new(image);
    let mut out = vec![0u8; dims.pixel_count() * 3];
    out.par_chunks_mut(w * 3).enumerate().for_each(|(y, row)| {
        let src = field.row(y);
        match interp {
            Interpolation::Nearest => {
                for (px, &c) in row.chunks_exact_mut(3).zip(src) {
                    sampler.nearest(c, px);
                }
            }
            Interpolation::Bilinear => {
                for (px, &c) in row.chunks_exact_mut(3).zip(src) {
                    sampler.bilinear(c, px);
                }
            }
        }
    });
    Ok(EquirectImage::new(dims, out).expect("output sized from dims"))
}
