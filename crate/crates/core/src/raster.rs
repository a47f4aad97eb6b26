//! 8-bit RGB equirectangular rasters and their PNG/JPEG I/O.

use std::io::Cursor;
use std::path::Path;

use image::{ImageFormat, RgbImage};
use thiserror::Error;

use crate::geom::{GeomError, ImageDims};

#[derive(Debug, Error)]
pub enum RasterError {
    #[error(transparent)]
    Dims(#[from] GeomError),
    #[error("pixel buffer holds {got} bytes, expected {expected} for {dims}")]
    BufferLength {
        dims: ImageDims,
        expected: usize,
        got: usize,
    },
    #[error("image codec error: {0}")]
    Codec(#[from] image::ImageError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// A 2:1 row-major RGB panorama, 3 bytes per pixel.
#[derive(Clone, PartialEq, Eq)]
pub struct EquirectImage {
    dims: ImageDims,
    pixels: Vec<u8>,
}

impl std::fmt::Debug for EquirectImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EquirectImage")
            .field("dims", &self.dims)
            .field("bytes", &self.pixels.len())
            .finish()
    }
}

impl EquirectImage {
    pub fn new(dims: ImageDims, pixels: Vec<u8>) -> Result<Self, RasterError> {
        let expected = dims.pixel_count() * 3;
        if pixels.len() != expected {
            return Err(RasterError::BufferLength {
                dims,
                expected,
                got: pixels.len(),
            });
        }
        Ok(Self { dims, pixels })
    }

    pub fn filled(dims: ImageDims, rgb: [u8; 3]) -> Self {
        let pixels = rgb
            .iter()
            .copied()
            .cycle()
            .take(dims.pixel_count() * 3)
            .collect();
        Self { dims, pixels }
    }

    pub fn from_fn(dims: ImageDims, f: impl Fn(u32, u32) -> [u8; 3]) -> Self {
        let mut pixels = Vec::with_capacity(dims.pixel_count() * 3);
        for y in 0..dims.height() {
            for x in 0..dims.width() {
                pixels.extend_from_slice(&f(x, y));
            }
        }
        Self { dims, pixels }
    }

    pub fn dims(&self) -> ImageDims {
        self.dims
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        let i = (y as usize * self.dims.width() as usize + x as usize) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn set(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let i = (y as usize * self.dims.width() as usize + x as usize) * 3;
        self.pixels[i..i + 3].copy_from_slice(&rgb);
    }

    /// Rolls columns so that output column `x` shows input column `x - k`.
    pub fn roll_columns(&self, k: i64) -> Self {
        let w = self.dims.width() as i64;
        Self::from_fn(self.dims, |x, y| {
            let src = (x as i64 - k).rem_euclid(w) as u32;
            self.get(src, y)
        })
    }

    pub fn from_rgb_image(img: RgbImage) -> Result<Self, RasterError> {
        let dims = ImageDims::new(img.width(), img.height())?;
        Self::new(dims, img.into_raw())
    }

    pub fn to_rgb_image(&self) -> RgbImage {
        RgbImage::from_raw(self.dims.width(), self.dims.height(), self.pixels.clone())
            .expect("buffer length checked at construction")
    }

    /// Loads a PNG or JPEG file. Alpha and grayscale inputs are converted to RGB.
    pub fn load(path: &Path) -> Result<Self, RasterError> {
        let bytes = std::fs::read(path).map_err(|source| RasterError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::decode(&bytes)
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, RasterError> {
        let img = image::load_from_memory(bytes)?.into_rgb8();
        Self::from_rgb_image(img)
    }

    pub fn encode_png(&self) -> Result<Vec<u8>, RasterError> {
        let mut buf = Cursor::new(Vec::new());
        self.to_rgb_image().write_to(&mut buf, ImageFormat::Png)?;
        Ok(buf.into_inner())
    }

    pub fn save_png(&self, path: &Path) -> Result<(), RasterError> {
        let bytes = self.encode_png()?;
        std::fs::write(path, bytes).map_err(|source| RasterError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// Deterministic high-entropy chart: every pixel differs from its
/// neighbours, with thin grid lines every 1/8 of the frame.
pub fn test_chart(dims: ImageDims) -> EquirectImage {
    let (w, h) = (dims.width(), dims.height());
    EquirectImage::from_fn(dims, |x, y| {
        let gx = x % (w / 8).max(1) == 0;
        let gy = y % (h / 8).max(1) == 0;
        if gx || gy {
            return [255, 255, 255];
        }
        let mut v = (x as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
            ^ (y as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
        v ^= v >> 29;
        v = v.wrapping_mul(0xBF58_476D_1CE4_E5B9);
        v ^= v >> 32;
        [
            (v & 0xff) as u8,
            ((v >> 8) & 0xff) as u8,
            ((v >> 16) & 0xfe) as u8,
        ]
    })
}
