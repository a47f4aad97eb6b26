//! Spherical geometry for translated equirectangular panoramas.
//!
//! Conventions used throughout the crate:
//!
//! * Pixel column `x` (integer = pixel center) covers longitude
//!   `2π (x + 0.5) / width`; row `y` covers polar angle `π (y + 0.5) / height`.
//! * Polar angle 0 is the zenith, π the nadir. Azimuth grows with `x`.
//! * The old sphere is the unit sphere at the origin. After a
//!   [`Displacement`] the observer sits at `step · (cos d, sin d, 0)`.
//!
//! [`map_dir`] is the normative "new panorama direction → old panorama
//! direction" map, computed by exact ray–sphere intersection. The separable
//! closed forms ([`horizontal_map_closed`], [`vertical_map_closed`]) are kept
//! for compatibility and diagnostics only.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Slack allowed on inverse-trig arguments before they count as a domain error.
pub const TRIG_SLACK: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("invalid displacement step {step}: must satisfy 0 <= step < 1")]
    InvalidDisplacement { step: f64 },
    #[error("invalid displacement direction {direction}: must be finite")]
    InvalidDirection { direction: f64 },
    #[error("invalid image dimensions {width}x{height}: need width = 2 * height and width >= 2")]
    InvalidDims { width: u32, height: u32 },
    #[error("domain error in {what}: argument {value} outside [-1, 1]")]
    Domain { what: &'static str, value: f64 },
}

/// Size of a 2:1 equirectangular raster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawDims")]
pub struct ImageDims {
    width: u32,
    height: u32,
}

#[derive(Deserialize)]
struct RawDims {
    width: u32,
    height: u32,
}

impl TryFrom<RawDims> for ImageDims {
    type Error = GeomError;

    fn try_from(raw: RawDims) -> Result<Self, Self::Error> {
        ImageDims::new(raw.width, raw.height)
    }
}

impl ImageDims {
    pub fn new(width: u32, height: u32) -> Result<Self, GeomError> {
        if width < 2 || height == 0 || width as u64 != 2 * height as u64 {
            return Err(GeomError::InvalidDims { width, height });
        }
        Ok(Self { width, height })
    }

    /// Dimensions for a panorama of the given width (height = width / 2).
    pub fn from_width(width: u32) -> Result<Self, GeomError> {
        Self::new(width, width / 2).map_err(|_| GeomError::InvalidDims {
            width,
            height: width / 2,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }
}

impl std::fmt::Display for ImageDims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

/// Continuous pixel coordinate; integer values are pixel centers.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PixelCoord {
    pub x: f64,
    pub y: f64,
}

impl PixelCoord {
    /// Wraps `x` into `[0, width)` and clamps `y` into `[0, height)`.
    pub fn normalized(x: f64, y: f64, dims: ImageDims) -> Self {
        let w = dims.width as f64;
        let h = dims.height as f64;
        Self {
            x: wrap(x, w),
            y: y.clamp(0.0, h - 0.5),
        }
    }
}

/// Wraps into `[0, period)`, guarding against `rem_euclid` rounding up to `period`.
#[inline]
pub(crate) fn wrap(value: f64, period: f64) -> f64 {
    // One period either side is the common case; same result as rem_euclid.
    let r = if (0.0..period).contains(&value) {
        value
    } else if (-period..0.0).contains(&value) {
        value + period
    } else if (period..2.0 * period).contains(&value) {
        value - period
    } else {
        value.rem_euclid(period)
    };
    if r >= period {
        r - period
    } else {
        r
    }
}

/// A direction on the unit sphere in angular form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereDir {
    azimuth: f64,
    polar: f64,
}

impl SphereDir {
    /// Normalizes azimuth into `[0, 2π)` and clamps polar into `[0, π]`.
    pub fn new(azimuth: f64, polar: f64) -> Self {
        Self {
            azimuth: wrap(azimuth, TAU),
            polar: polar.clamp(0.0, PI),
        }
    }

    pub const ZENITH: SphereDir = SphereDir {
        azimuth: 0.0,
        polar: 0.0,
    };

    pub fn azimuth(&self) -> f64 {
        self.azimuth
    }

    pub fn polar(&self) -> f64 {
        self.polar
    }

    /// Elevation above the horizon, in `[-π/2, π/2]`.
    pub fn elevation(&self) -> f64 {
        FRAC_PI_2 - self.polar
    }

    pub fn rotate_azimuth(&self, delta: f64) -> Self {
        Self::new(self.azimuth + delta, self.polar)
    }

    pub fn to_vec(&self) -> UnitVec3 {
        let (sp, cp) = self.polar.sin_cos();
        let (sa, ca) = self.azimuth.sin_cos();
        UnitVec3 {
            x: sp * ca,
            y: sp * sa,
            z: cp,
        }
    }

    pub fn from_vec(v: UnitVec3) -> Self {
        let horiz = (v.x * v.x + v.y * v.y).sqrt();
        Self::new(v.y.atan2(v.x), horiz.atan2(v.z))
    }

    /// Great-circle angle between two directions.
    pub fn angle_to(&self, other: &SphereDir) -> f64 {
        self.to_vec().angle_to(&other.to_vec())
    }
}

/// A unit vector in Cartesian form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVec3 {
    x: f64,
    y: f64,
    z: f64,
}

impl UnitVec3 {
    /// Normalizes the input. Returns `None` for a zero or non-finite vector.
    pub fn new(x: f64, y: f64, z: f64) -> Option<Self> {
        let n = (x * x + y * y + z * z).sqrt();
        if n == 0.0 || !n.is_finite() {
            return None;
        }
        Some(Self {
            x: x / n,
            y: y / n,
            z: z / n,
        })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn dot(&self, o: &UnitVec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn angle_to(&self, o: &UnitVec3) -> f64 {
        let cx = self.y * o.z - self.z * o.y;
        let cy = self.z * o.x - self.x * o.z;
        let cz = self.x * o.y - self.y * o.x;
        (cx * cx + cy * cy + cz * cz).sqrt().atan2(self.dot(o))
    }
}

/// Observer translation inside the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDisplacement")]
pub struct Displacement {
    step: f64,
    direction: f64,
}

#[derive(Deserialize)]
struct RawDisplacement {
    step: f64,
    direction: f64,
}

impl TryFrom<RawDisplacement> for Displacement {
    type Error = GeomError;

    fn try_from(raw: RawDisplacement) -> Result<Self, Self::Error> {
        Displacement::new(raw.step, raw.direction)
    }
}

impl Displacement {
    /// `step` is a fraction of the sphere radius in `[0, 1)`; `direction` is
    /// a horizontal angle in degrees, normalized into `[0, 360)`.
    pub fn new(step: f64, direction: f64) -> Result<Self, GeomError> {
        if !(0.0..1.0).contains(&step) {
            return Err(GeomError::InvalidDisplacement { step });
        }
        if !direction.is_finite() {
            return Err(GeomError::InvalidDirection { direction });
        }
        Ok(Self {
            step,
            direction: wrap(direction, 360.0),
        })
    }

    pub const ZERO: Displacement = Displacement {
        step: 0.0,
        direction: 0.0,
    };

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Direction in degrees, `[0, 360)`.
    pub fn direction(&self) -> f64 {
        self.direction
    }

    pub fn direction_rad(&self) -> f64 {
        self.direction.to_radians()
    }

    /// New observer center `l`.
    pub fn center(&self) -> [f64; 3] {
        let (s, c) = self.direction_rad().sin_cos();
        [self.step * c, self.step * s, 0.0]
    }

    pub fn with_direction(&self, direction: f64) -> Result<Self, GeomError> {
        Self::new(self.step, direction)
    }
}

pub fn pixel_to_dir(p: PixelCoord, dims: ImageDims) -> SphereDir {
    let w = dims.width as f64;
    let h = dims.height as f64;
    SphereDir::new(TAU * (p.x + 0.5) / w, PI * (p.y + 0.5) / h)
}

pub fn dir_to_pixel(d: SphereDir, dims: ImageDims) -> PixelCoord {
    let w = dims.width as f64;
    let h = dims.height as f64;
    PixelCoord::normalized(d.azimuth * w / TAU - 0.5, d.polar * h / PI - 0.5, dims)
}

/// Intersects the ray from the displaced center along `v` with the old unit
/// sphere. Returns the hit point `b` and the ray parameter `t > 0`.
pub fn displace_intersect_with_t(v: UnitVec3, disp: &Displacement) -> (UnitVec3, f64) {
    let [lx, ly, lz] = disp.center();
    let s = disp.step;
    let ldv = lx * v.x + ly * v.y + lz * v.z;
    let t = -ldv + (ldv * ldv + 1.0 - s * s).sqrt();
    let (bx, by, bz) = (lx + t * v.x, ly + t * v.y, lz + t * v.z);
    // |b| = 1 up to rounding; renormalize so the invariant holds to 1e-12.
    let b = UnitVec3::new(bx, by, bz).expect("ray hit is on the unit sphere");
    (b, t)
}

pub fn displace_intersect(v: UnitVec3, disp: &Displacement) -> UnitVec3 {
    displace_intersect_with_t(v, disp).0
}

/// Ray–sphere map in the frame where the displacement points along +x.
///
/// Takes the destination direction as (cos, sin) of its azimuth relative to
/// the displacement plus (sin, cos) of its polar angle. Returns the relative
/// azimuth in `(-π, π]` and the polar angle of the hit point.
#[inline]
pub(crate) fn intersect_relative(
    cos_rel: f64,
    sin_rel: f64,
    sin_polar: f64,
    cos_polar: f64,
    step: f64,
) -> (f64, f64) {
    let vx = sin_polar * cos_rel;
    let vy = sin_polar * sin_rel;
    let vz = cos_polar;
    let ldv = step * vx;
    let t = -ldv + (ldv * ldv + 1.0 - step * step).sqrt();
    let bx = step + t * vx;
    let by = t * vy;
    let bz = t * vz;
    let rel = by.atan2(bx);
    let polar = (bx * bx + by * by).sqrt().atan2(bz);
    (rel, polar)
}

/// Maps a direction seen from the displaced observer to the direction of
/// the same scene point in the original panorama.
pub fn map_dir(d_new: SphereDir, disp: &Displacement) -> SphereDir {
    let dir = disp.direction_rad();
    let (sin_rel, cos_rel) = (d_new.azimuth - dir).sin_cos();
    let (sin_p, cos_p) = d_new.polar.sin_cos();
    let (rel, polar) = intersect_relative(cos_rel, sin_rel, sin_p, cos_p, disp.step);
    SphereDir::new(rel + dir, polar)
}

fn clamp_unit(value: f64, what: &'static str) -> Result<f64, GeomError> {
    if !value.is_finite() || value.abs() > 1.0 + TRIG_SLACK {
        return Err(GeomError::Domain { what, value });
    }
    Ok(value.clamp(-1.0, 1.0))
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_signed(angle: f64) -> f64 {
    let a = wrap(angle + PI, TAU) - PI;
    if a == -PI {
        PI
    } else {
        a
    }
}

/// Separable horizontal map: `ψ = θ − asin(step · sin θ)`.
///
/// `theta_rel` is the destination azimuth relative to the displacement
/// direction. The result is the relative azimuth of the same point in the
/// old panorama. On the equator this is exact.
pub fn horizontal_map_closed(theta_rel: f64, step: f64) -> Result<f64, GeomError> {
    if !(0.0..1.0).contains(&step) {
        return Err(GeomError::InvalidDisplacement { step });
    }
    let arg = clamp_unit(step * theta_rel.sin(), "horizontal asin")?;
    Ok(theta_rel - arg.asin())
}

/// Separable vertical map, evaluated literally.
///
/// `elev` is measured downward from the horizon (the sign convention of
/// `π (y / height − 1/2)`); `a` is the effective in-plane displacement.
/// `crossed_pole = false` selects the nadir-crossing form
/// `sign(e) · acos(−(a − cos e) / n)`, `true` the zenith-crossing form
/// `sign(e) · (π − acos((a − cos e) / n))`, where
/// `n = sqrt(a² − 2 a cos e + 1)`. The two are algebraically identical; both
/// are kept so either can be evaluated as written.
pub fn vertical_map_closed(elev: f64, a: f64, crossed_pole: bool) -> Result<f64, GeomError> {
    let cos_e = elev.cos();
    let norm = (a * a - 2.0 * a * cos_e + 1.0).sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(GeomError::Domain {
            what: "vertical normalizer",
            value: norm,
        });
    }
    let ratio = (a - cos_e) / norm;
    let sign = if elev > 0.0 {
        1.0
    } else if elev < 0.0 {
        -1.0
    } else {
        0.0
    };
    let beta = if crossed_pole {
        PI - clamp_unit(ratio, "zenith acos")?.acos()
    } else {
        clamp_unit(-ratio, "nadir acos")?.acos()
    };
    Ok(sign * beta)
}

/// How the separable vertical map derives its effective displacement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepReading {
    /// `step · α` with `α = ψ / π`, as written in the closed form.
    #[default]
    Literal,
    /// `step · cos ψ`, the displacement component along the vertical plane.
    InPlane,
}

impl StepReading {
    pub fn effective_step(&self, step: f64, psi: f64) -> f64 {
        match self {
            StepReading::Literal => step * psi / PI,
            StepReading::InPlane => step * psi.cos(),
        }
    }
}

/// The separable closed-form approximation of [`map_dir`].
///
/// The horizontal part is exact on the equator. The vertical part uses
/// [`vertical_map_closed`] with a downward elevation; a result past a pole
/// is reflected back onto the sphere (azimuth flips by π).
pub fn map_dir_separable(
    d_new: SphereDir,
    disp: &Displacement,
    reading: StepReading,
) -> Result<SphereDir, GeomError> {
    let dir = disp.direction_rad();
    let theta = wrap_signed(d_new.azimuth - dir);
    let psi = horizontal_map_closed(theta, disp.step)?;
    separable_from_parts(psi, d_new.polar, disp.step, dir, reading)
}

#[inline]
pub(crate) fn separable_from_parts(
    psi: f64,
    polar: f64,
    step: f64,
    dir: f64,
    reading: StepReading,
) -> Result<SphereDir, GeomError> {
    let elev_down = polar - FRAC_PI_2;
    let a = reading.effective_step(step, psi);
    let beta = vertical_map_closed(elev_down, a, false)?;
    let mut polar_src = FRAC_PI_2 + beta;
    let mut az = psi + dir;
    if polar_src < 0.0 {
        polar_src = -polar_src;
        az += PI;
    } else if polar_src > PI {
        polar_src = TAU - polar_src;
        az += PI;
    }
    Ok(SphereDir::new(az, polar_src))
}
