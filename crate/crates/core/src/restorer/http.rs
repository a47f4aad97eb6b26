use std::sync::{Condvar, Mutex};

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use log::{debug, warn};
use reqwest::blocking::Client;
use reqwest::header::CONTENT_TYPE;
use reqwest::Url;
use serde::{Deserialize, Serialize};

use super::{RestoreError, RestoreRequest, Restorer, RestorerConfig};
use crate::raster::EquirectImage;

pub(super) fn parse_endpoint(endpoint: &str) -> Result<Url, RestoreError> {
    let url = Url::parse(endpoint)
        .map_err(|e| RestoreError::InvalidConfig(format!("bad endpoint '{endpoint}': {e}")))?;
    if !matches!(url.scheme(), "http" | "https") {
        return Err(RestoreError::InvalidConfig(format!(
            "endpoint '{endpoint}' must use http or https"
        )));
    }
    Ok(url)
}

#[derive(Serialize)]
struct WireRequest<'a> {
    image: String,
    prompt: &'a str,
    strength: f64,
    seed: Option<u64>,
}

#[derive(Deserialize)]
struct WireResponse {
    image: String,
}

/// Counting gate that caps concurrent requests.
#[derive(Debug)]
struct InFlight {
    used: Mutex<usize>,
    freed: Condvar,
    cap: usize,
}

struct Permit<'a>(&'a InFlight);

impl InFlight {
    fn acquire(&self) -> Permit<'_> {
        let mut used = self.used.lock().expect("in-flight gate poisoned");
        while *used >= self.cap {
            used = self.freed.wait(used).expect("in-flight gate poisoned");
        }
        *used += 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.used.lock().expect("in-flight gate poisoned") -= 1;
        self.0.freed.notify_one();
    }
}

enum Attempt {
    Retry(RestoreError),
    Fatal(RestoreError),
}

/// Client for a restoration service speaking the JSON protocol:
/// `POST <endpoint>/restore` with
/// `{"image": <base64 PNG>, "prompt": .., "strength": .., "seed": ..}`,
/// answered by `{"image": <base64 PNG>}`.
#[derive(Debug)]
pub struct HttpRestorer {
    cfg: RestorerConfig,
    url: Url,
    client: Client,
    gate: InFlight,
}

impl HttpRestorer {
    pub fn new(cfg: RestorerConfig) -> Result<Self, RestoreError> {
        cfg.validate()?;
        let endpoint = cfg.endpoint.as_deref().ok_or_else(|| {
            RestoreError::InvalidConfig("http restorer requires an endpoint".into())
        })?;
        let base = parse_endpoint(endpoint)?;
        let url = Url::parse(&format!("{}/restore", base.as_str().trim_end_matches('/')))
            .map_err(|e| RestoreError::InvalidConfig(e.to_string()))?;
        let client = Client::builder()
            .timeout(cfg.timeout())
            .build()
            .map_err(|e| RestoreError::InvalidConfig(format!("http client: {e}")))?;
        let gate = InFlight {
            used: Mutex::new(0),
            freed: Condvar::new(),
            cap: cfg.max_in_flight,
        };
        Ok(Self {
            cfg,
            url,
            client,
            gate,
        })
    }

    pub fn url(&self) -> &Url {
        &self.url
    }

    fn encode(&self, req: &RestoreRequest) -> Result<Vec<u8>, RestoreError> {
        let png = req
            .image
            .encode_png()
            .map_err(|e| RestoreError::InvalidRequest(format!("encoding image: {e}")))?;
        let wire = WireRequest {
            image: STANDARD.encode(png),
            prompt: &req.prompt,
            strength: req.strength,
            seed: req.seed,
        };
        serde_json::to_vec(&wire).map_err(|e| RestoreError::InvalidRequest(e.to_string()))
    }

    fn attempt(&self, body: &[u8], req: &RestoreRequest) -> Result<EquirectImage, Attempt> {
        let _permit = self.gate.acquire();
        let resp = self
            .client
            .post(self.url.clone())
            .header(CONTENT_TYPE, "application/json")
            .body(body.to_vec())
            .send()
            .map_err(|e| Attempt::Retry(self.transport_error(&e)))?;
        let status = resp.status();
        let bytes = resp
            .bytes()
            .map_err(|e| Attempt::Retry(self.transport_error(&e)))?;
        if !status.is_success() {
            return Err(Attempt::Fatal(RestoreError::MalformedResponse(format!(
                "status {status}"
            ))));
        }
        decode_response(&bytes, req).map_err(Attempt::Fatal)
    }

    fn transport_error(&self, e: &reqwest::Error) -> RestoreError {
        if e.is_timeout() {
            RestoreError::Timeout {
                endpoint: self.url.to_string(),
                attempts: 1,
            }
        } else {
            RestoreError::NetworkUnreachable {
                endpoint: self.url.to_string(),
                detail: e.to_string(),
            }
        }
    }
}

fn decode_response(bytes: &[u8], req: &RestoreRequest) -> Result<EquirectImage, RestoreError> {
    let wire: WireResponse = serde_json::from_slice(bytes).map_err(|e| {
        RestoreError::MalformedResponse(format!("body is not the expected JSON: {e}"))
    })?;
    let png = STANDARD
        .decode(wire.image.as_bytes())
        .map_err(|e| RestoreError::MalformedResponse(format!("image is not base64: {e}")))?;
    let img = image::load_from_memory(&png)
        .map_err(|e| RestoreError::MalformedResponse(format!("image does not decode: {e}")))?
        .into_rgb8();
    let expected = req.image.dims();
    if (img.width(), img.height()) != (expected.width(), expected.height()) {
        return Err(RestoreError::DimsMismatch {
            expected,
            got: format!("{}x{}", img.width(), img.height()),
        });
    }
    Ok(EquirectImage::from_rgb_image(img).expect("dims equal to a valid request image"))
}

impl Restorer for HttpRestorer {
    fn restore(&self, req: &RestoreRequest) -> Result<EquirectImage, RestoreError> {
        req.check_strength()?;
        if req.prompt.trim().is_empty() {
            return Err(RestoreError::InvalidRequest(
                "prompt must be non-empty for a restoration service".into(),
            ));
        }
        // Encoded once so every retry sends identical bytes.
        let body = self.encode(req)?;
        debug!(
            "POST {} prompt={:?} strength={} seed={:?} image=<{} bytes elided>",
            self.url,
            req.prompt,
            req.strength,
            req.seed,
            body.len()
        );
        let attempts = 1 + self.cfg.retries;
        let mut last = None;
        for attempt in 1..=attempts {
            if attempt > 1 {
                std::thread::sleep(self.cfg.backoff(attempt - 1));
            }
            match self.attempt(&body, req) {
                Ok(img) => return Ok(img),
                Err(Attempt::Fatal(e)) => return Err(e),
                Err(Attempt::Retry(e)) => {
                    warn!("restore attempt {attempt}/{attempts} failed: {e}");
                    last = Some(e);
                }
            }
        }
        Err(match last.expect("at least one attempt") {
            RestoreError::Timeout { endpoint, .. } => RestoreError::Timeout { endpoint, attempts },
            other => other,
        })
    }
}
