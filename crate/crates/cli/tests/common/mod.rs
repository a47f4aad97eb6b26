//! Helpers shared by the CLI test targets.
#![allow(dead_code)]

pub mod stub;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use panoshift::raster::test_chart;
use panoshift::ImageDims;

pub fn panoshift() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_panoshift"));
    cmd.env_remove("PANO_RESTORER_ENDPOINT")
        .env_remove("SOURCE_DATE_EPOCH")
        .env("RUST_LOG", "off");
    cmd
}

pub fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("spawning panoshift")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("terminated by signal")
}

/// Writes `initial.png` and a chain config of `moves` moves to `dir`.
pub fn chain_world(
    dir: &Path,
    dims: ImageDims,
    moves: usize,
    restorer: serde_json::Value,
) -> PathBuf {
    test_chart(dims).save_png(&dir.join("initial.png")).unwrap();
    let moves: Vec<_> = (2..moves + 2)
        .map(|i| serde_json::json!({ "id": i.to_string(), "step": 0.3, "direction": 0.0 }))
        .collect();
    let cfg = serde_json::json!({
        "initial": { "image": "initial.png", "prompt": "a desert at dusk" },
        "moves": moves,
        "restorer": restorer,
        "seed": 7,
    });
    let path = dir.join("world.config.json");
    std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path
}

/// Restorer settings that fail fast against dead endpoints.
pub fn http_restorer(endpoint: &str) -> serde_json::Value {
    serde_json::json!({ "kind": "http", "endpoint": endpoint, "backoff_ms": 10, "timeout_secs": 10.0 })
}

/// Every file under `root`, keyed by relative path.
pub fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in std::fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(
                    p.strip_prefix(root).unwrap().to_path_buf(),
                    std::fs::read(&p).unwrap(),
                );
            }
        }
    }
    out
}
