//! Local stand-ins for a restoration service.

use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use panoshift::raster::test_chart;
use panoshift::ImageDims;

pub type Handler = dyn Fn(&[u8]) -> (u16, Vec<u8>) + Send + Sync;

pub struct Stub {
    pub url: String,
    pub bodies: Arc<Mutex<Vec<Vec<u8>>>>,
    pub peak_in_flight: Arc<Mutex<(usize, usize)>>,
}

/// Serves every request on its own thread with `handler`.
pub fn spawn(handler: Arc<Handler>) -> Stub {
    let server = tiny_http::Server::http("127.0.0.1:0").unwrap();
    let port = server.server_addr().to_ip().unwrap().port();
    let bodies = Arc::new(Mutex::new(Vec::new()));
    let in_flight = Arc::new(Mutex::new((0usize, 0usize)));
    let (b, f) = (Arc::clone(&bodies), Arc::clone(&in_flight));
    thread::spawn(move || {
        for mut req in server.incoming_requests() {
            let handler = Arc::clone(&handler);
            let (b, f) = (Arc::clone(&b), Arc::clone(&f));
            thread::spawn(move || {
                {
                    let mut g = f.lock().unwrap();
                    g.0 += 1;
                    g.1 = g.1.max(g.0);
                }
                let mut body = Vec::new();
                req.as_reader().read_to_end(&mut body).unwrap();
                let (status, resp) = if req.url() == "/restore" {
                    handler(&body)
                } else {
                    (404, b"not found".to_vec())
                };
                b.lock().unwrap().push(body);
                f.lock().unwrap().0 -= 1;
                let _ = req.respond(tiny_http::Response::from_data(resp).with_status_code(status));
            });
        }
    });
    Stub {
        url: format!("http://127.0.0.1:{port}"),
        bodies,
        peak_in_flight: in_flight,
    }
}

fn request_json(body: &[u8]) -> serde_json::Value {
    serde_json::from_slice(body).unwrap()
}

pub fn echo() -> Arc<Handler> {
    Arc::new(|body: &[u8]| {
        let v = request_json(body);
        let out = serde_json::json!({ "image": v["image"] });
        (200, serde_json::to_vec(&out).unwrap())
    })
}

pub fn slow_echo(delay: Duration) -> Arc<Handler> {
    let inner = echo();
    Arc::new(move |body: &[u8]| {
        thread::sleep(delay);
        inner(body)
    })
}

/// Answers with a valid PNG of the wrong size.
pub fn wrong_dims() -> Arc<Handler> {
    Arc::new(|_: &[u8]| {
        let png = test_chart(ImageDims::new(16, 8).unwrap())
            .encode_png()
            .unwrap();
        let out = serde_json::json!({ "image": STANDARD.encode(png) });
        (200, serde_json::to_vec(&out).unwrap())
    })
}

pub fn status(code: u16) -> Arc<Handler> {
    Arc::new(move |_: &[u8]| (code, b"{}".to_vec()))
}

pub fn garbage() -> Arc<Handler> {
    Arc::new(|_: &[u8]| (200, b"this is not json".to_vec()))
}

/// A URL nothing listens on.
pub fn dead_endpoint() -> String {
    let l = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let port = l.local_addr().unwrap().port();
    drop(l);
    format!("http://127.0.0.1:{port}")
}
