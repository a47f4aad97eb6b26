//! The step that removes reprojection distortion.
//!
//! A [`Restorer`] takes a distorted panorama plus the scene prompt and
//! returns a plausible panorama of the same size. [`IdentityRestorer`]
//! returns its input unchanged and makes world building fully
//! deterministic; [`HttpRestorer`] delegates to a text+image → image service.

mod http;

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::ImageDims;
use crate::raster::EquirectImage;

pub use http::HttpRestorer;

/// Environment variable that overrides the configured service endpoint.
pub const ENDPOINT_ENV: &str = "PANO_RESTORER_ENDPOINT";

pub const DEFAULT_STRENGTH: f64 = 0.55;
pub const DEFAULT_TIMEOUT_SECS: f64 = 120.0;
pub const DEFAULT_RETRIES: u32 = 2;
pub const DEFAULT_BACKOFF_MS: u64 = 1000;
pub const DEFAULT_MAX_IN_FLIGHT: usize = 2;

#[derive(Debug, Error)]
pub enum RestoreError {
    #[error("restorer service at {endpoint} is unreachable: {detail}")]
    NetworkUnreachable { endpoint: String, detail: String },
    #[error("restorer service at {endpoint} timed out after {attempts} attempt(s)")]
    Timeout { endpoint: String, attempts: u32 },
    #[error("malformed response from restorer service: {0}")]
    MalformedResponse(String),
    #[error("restored image is {got}, expected {expected}")]
    DimsMismatch { expected: ImageDims, got: String },
    #[error("invalid restore request: {0}")]
    InvalidRequest(String),
    #[error("invalid restorer config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestoreRequest {
    pub image: EquirectImage,
    pub prompt: String,
    /// Denoising strength in `[0, 1]`.
    pub strength: f64,
    pub seed: Option<u64>,
}

impl RestoreRequest {
    pub fn new(image: EquirectImage, prompt: impl Into<String>) -> Self {
        Self {
            image,
            prompt: prompt.into(),
            strength: DEFAULT_STRENGTH,
            seed: None,
        }
    }

    fn check_strength(&self) -> Result<(), RestoreError> {
        if !(0.0..=1.0).contains(&self.strength) {
            return Err(RestoreError::InvalidRequest(format!(
                "strength {} outside [0, 1]",
                self.strength
            )));
        }
        Ok(())
    }
}

pub trait Restorer: Send + Sync {
    /// Returns a restored image with the same dimensions as the request's.
    fn restore(&self, req: &RestoreRequest) -> Result<EquirectImage, RestoreError>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityRestorer;

impl Restorer for IdentityRestorer {
    fn restore(&self, req: &RestoreRequest) -> Result<EquirectImage, RestoreError> {
        req.check_strength()?;
        Ok(req.image.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RestorerKind {
    #[default]
    Identity,
    Http,
}

impl std::str::FromStr for RestorerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "identity" => Ok(RestorerKind::Identity),
            "http" => Ok(RestorerKind::Http),
            other => Err(format!(
                "unknown restorer '{other}' (expected identity or http)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RestorerConfig {
    pub kind: RestorerKind,
    /// Base URL; requests go to `<endpoint>/restore`.
    pub endpoint: Option<String>,
    pub timeout_secs: f64,
    pub retries: u32,
    /// First retry delay; each further retry waits four times longer.
    pub backoff_ms: u64,
    pub max_in_flight: usize,
}

impl Default for RestorerConfig {
    fn default() -> Self {
        Self {
            kind: RestorerKind::Identity,
            endpoint: None,
            timeout_secs: DEFAULT_TIMEOUT_SECS,
            retries: DEFAULT_RETRIES,
            backoff_ms: DEFAULT_BACKOFF_MS,
            max_in_flight: DEFAULT_MAX_IN_FLIGHT,
        }
    }
}

impl RestorerConfig {
    pub fn http(endpoint: impl Into<String>) -> Self {
        Self {
            kind: RestorerKind::Http,
            endpoint: Some(endpoint.into()),
            ..Self::default()
        }
    }

    /// Replaces the endpoint with `$PANO_RESTORER_ENDPOINT` when it is set.
    pub fn apply_env_override(&mut self) {
        if let Ok(ep) = std::env::var(ENDPOINT_ENV) {
            if !ep.trim().is_empty() {
                self.endpoint = Some(ep);
            }
        }
    }

    pub fn validate(&self) -> Result<(), RestoreError> {
        if !(self.timeout_secs.is_finite() && self.timeout_secs > 0.0) {
            return Err(RestoreError::InvalidConfig(format!(
                "timeout must be positive, got {}",
                self.timeout_secs
            )));
        }
        if self.max_in_flight == 0 {
            return Err(RestoreError::InvalidConfig(
                "max_in_flight must be at least 1".into(),
            ));
        }
        if self.kind == RestorerKind::Http {
            let ep = self.endpoint.as_deref().ok_or_else(|| {
                RestoreError::InvalidConfig("http restorer requires an endpoint".into())
            })?;
            http::parse_endpoint(ep)?;
        }
        Ok(())
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout_secs)
    }

    /// Delay before retry number `attempt` (1-based).
    pub fn backoff(&self, attempt: u32) -> Duration {
        Duration::from_millis(
            self.backoff_ms
                .saturating_mul(4u64.saturating_pow(attempt - 1)),
        )
    }

    pub fn build(&self) -> Result<Box<dyn Restorer>, RestoreError> {
        self.validate()?;
        Ok(match self.kind {
            RestorerKind::Identity => Box::new(IdentityRestorer),
            RestorerKind::Http => Box::new(HttpRestorer::new(self.clone())?),
        })
    }
}

/// Restores with the restorer described by `cfg`.
pub fn restore(req: &RestoreRequest, cfg: &RestorerConfig) -> Result<EquirectImage, RestoreError> {
    cfg.build()?.restore(req)
}
