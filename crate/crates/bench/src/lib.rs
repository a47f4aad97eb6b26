//! Shared fixtures for the remap benchmarks.

use panoshift::raster::{test_chart, EquirectImage};
use panoshift::{Displacement, ImageDims};

/// Frame size the throughput targets are stated for.
pub const BENCH_DIMS: (u32, u32) = (2048, 1024);

/// A high-entropy chart at `BENCH_DIMS` and a typical forward move.
pub fn fixture() -> (EquirectImage, Displacement) {
    let dims = ImageDims::new(BENCH_DIMS.0, BENCH_DIMS.1).expect("valid bench dims");
    let disp = Displacement::new(0.5, 30.0).expect("valid displacement");
    (test_chart(dims), disp)
}
