mod common;

use std::sync::Arc;
use std::time::{Duration, Instant};

use panoshift::raster::test_chart;
use panoshift::restorer::{
    restore, HttpRestorer, RestoreError, RestoreRequest, Restorer, RestorerConfig,
};
use panoshift::ImageDims;

fn request() -> RestoreRequest {
    let mut req = RestoreRequest::new(
        test_chart(ImageDims::new(64, 32).unwrap()),
        "a quiet desert",
    );
    req.seed = Some(42);
    req
}

fn fast_config(url: &str) -> RestorerConfig {
    RestorerConfig {
        backoff_ms: 10,
        timeout_secs: 5.0,
        ..RestorerConfig::http(url)
    }
}

#[test]
fn echo_service_returns_input_bytes() {
    let stub = common::spawn(common::echo());
    let req = request();
    let out = restore(&req, &fast_config(&stub.url)).unwrap();
    assert_eq!(out, req.image);

    let bodies = stub.bodies.lock().unwrap();
    let sent: serde_json::Value = serde_json::from_slice(&bodies[0]).unwrap();
    assert_eq!(sent["prompt"], "a quiet desert");
    assert_eq!(sent["strength"], 0.55);
    assert_eq!(sent["seed"], 42);
    assert!(sent["image"].is_string());
}

#[test]
fn null_seed_is_sent_as_null() {
    let stub = common::spawn(common::echo());
    let mut req = request();
    req.seed = None;
    restore(&req, &fast_config(&stub.url)).unwrap();
    let sent: serde_json::Value = serde_json::from_slice(&stub.bodies.lock().unwrap()[0]).unwrap();
    assert!(sent["seed"].is_null());
}

#[test]
fn repeated_calls_with_fixed_seed_are_identical() {
    let stub = common::spawn(common::echo());
    let r = HttpRestorer::new(fast_config(&stub.url)).unwrap();
    let req = request();
    let a = r.restore(&req).unwrap();
    let b = r.restore(&req).unwrap();
    assert_eq!(a.encode_png().unwrap(), b.encode_png().unwrap());
    let bodies = stub.bodies.lock().unwrap();
    assert_eq!(bodies[0], bodies[1]);
}

#[test]
fn wrong_dims_is_reported() {
    let stub = common::spawn(common::wrong_dims());
    let err = restore(&request(), &fast_config(&stub.url)).unwrap_err();
    assert!(matches!(err, RestoreError::DimsMismatch { .. }), "{err}");
}

#[test]
fn non_2xx_and_garbage_are_malformed() {
    for handler in [common::status(500), common::status(404), common::garbage()] {
        let stub = common::spawn(handler);
        let err = restore(&request(), &fast_config(&stub.url)).unwrap_err();
        assert!(matches!(err, RestoreError::MalformedResponse(_)), "{err}");
        // Not retried.
        assert_eq!(stub.bodies.lock().unwrap().len(), 1);
    }
}

#[test]
fn unreachable_endpoint_retries_then_fails() {
    let cfg = fast_config(&common::dead_endpoint());
    let start = Instant::now();
    let err = restore(&request(), &cfg).unwrap_err();
    assert!(
        matches!(err, RestoreError::NetworkUnreachable { .. }),
        "{err}"
    );
    // Two backoffs: 10 ms then 40 ms.
    assert!(start.elapsed() >= Duration::from_millis(50));
}

#[test]
fn timeouts_are_retried_with_identical_payloads() {
    let stub = common::spawn(common::slow_echo(Duration::from_millis(600)));
    let cfg = RestorerConfig {
        timeout_secs: 0.2,
        retries: 2,
        ..fast_config(&stub.url)
    };
    let err = restore(&request(), &cfg).unwrap_err();
    match err {
        RestoreError::Timeout { attempts, .. } => assert_eq!(attempts, 3),
        other => panic!("expected timeout, got {other}"),
    }
    std::thread::sleep(Duration::from_millis(700));
    let bodies = stub.bodies.lock().unwrap();
    assert_eq!(bodies.len(), 3);
    assert!(bodies.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn in_flight_requests_are_capped() {
    let stub = common::spawn(common::slow_echo(Duration::from_millis(150)));
    let r = Arc::new(
        HttpRestorer::new(RestorerConfig {
            max_in_flight: 2,
            ..fast_config(&stub.url)
        })
        .unwrap(),
    );
    let handles: Vec<_> = (0..6)
        .map(|_| {
            let r = Arc::clone(&r);
            std::thread::spawn(move || r.restore(&request()).unwrap())
        })
        .collect();
    for h in handles {
        h.join().unwrap();
    }
    let (_, peak) = *stub.peak_in_flight.lock().unwrap();
    assert!(peak <= 2, "peak {peak}");
    assert_eq!(stub.bodies.lock().unwrap().len(), 6);
}
