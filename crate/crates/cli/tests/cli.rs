mod common;

use common::{chain_world, code, http_restorer, panoshift, run, stub, tree};
use panoshift::raster::{test_chart, EquirectImage};
use panoshift::world::{validate_manifest, WorldGraph, MANIFEST_FILE};
use panoshift::ImageDims;

#[test]
fn zero_step_nearest_copies_the_input() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("in.png");
    let output = tmp.path().join("out.png");
    let img = test_chart(ImageDims::new(256, 128).unwrap());
    img.save_png(&input).unwrap();
    let out = run(panoshift()
        .args([
            "reproject",
            "--step",
            "0",
            "--direction",
            "45",
            "--interp",
            "nearest",
        ])
        .arg("--input")
        .arg(&input)
        .arg("--output")
        .arg(&output));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(EquirectImage::load(&output).unwrap(), img);
}

#[test]
fn step_outside_unit_interval_is_a_usage_error() {
    for step in ["1.0", "1.5", "-0.1", "nan"] {
        let out = run(panoshift().args([
            "reproject",
            "--input",
            "x.png",
            "--output",
            "y.png",
            "--direction",
            "0",
            "--step",
            step,
        ]));
        assert_eq!(code(&out), 2, "step {step}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(
            err.contains("0 <= step < 1") || err.contains("invalid"),
            "{err}"
        );
    }
}

#[test]
fn forward_pixel_is_a_fixed_point() {
    let tmp = tempfile::tempdir().unwrap();
    let dims = ImageDims::new(360, 180).unwrap();
    let mut img = EquirectImage::filled(dims, [0, 0, 0]);
    // Column 89 is centred on azimuth 89.5°.
    img.set(89, 90, [255, 255, 255]);
    let input = tmp.path().join("in.png");
    let output = tmp.path().join("out.png");
    img.save_png(&input).unwrap();
    let out = run(panoshift()
        .args([
            "reproject",
            "--step",
            "0.6",
            "--direction",
            "89.5",
            "--interp",
            "nearest",
        ])
        .arg("--input")
        .arg(&input)
        .arg("--output")
        .arg(&output));
    assert_eq!(code(&out), 0);
    assert_eq!(
        EquirectImage::load(&output).unwrap().get(89, 90),
        [255, 255, 255]
    );
}

#[test]
fn reproject_json_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("in.png");
    test_chart(ImageDims::new(64, 32).unwrap())
        .save_png(&input)
        .unwrap();
    let out = run(panoshift()
        .args([
            "--json",
            "reproject",
            "--step",
            "0.5",
            "--direction",
            "-90",
            "--method",
            "paper-separable",
        ])
        .arg("--input")
        .arg(&input)
        .arg("--output")
        .arg(tmp.path().join("o.png")));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["direction"], 270.0);
    assert_eq!(v["method"], "paper-separable");
}

#[test]
fn missing_input_is_a_runtime_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(panoshift()
        .args(["reproject", "--step", "0.2", "--direction", "0"])
        .arg("--input")
        .arg(tmp.path().join("absent.png"))
        .arg("--output")
        .arg(tmp.path().join("o.png")));
    assert_eq!(code(&out), 1);
}

#[test]
fn validate_math_checks_the_equator() {
    let tmp = tempfile::tempdir().unwrap();
    for step in ["0", "0.5"] {
        let report = tmp.path().join(format!("report-{step}.json"));
        let out = run(panoshift()
            .args([
                "validate-math",
                "--width",
                "256",
                "--step",
                step,
                "--report",
            ])
            .arg(&report));
        assert_eq!(code(&out), 0, "step {step}");
        let v: serde_json::Value =
            serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
        assert!(v["equator_max_error"].as_f64().unwrap() < 1e-9);
        assert_eq!(v["height"], 128);
    }
    let out = run(panoshift().args(["validate-math", "--width", "256", "--step", "1.2"]));
    assert_eq!(code(&out), 2);
    let out = run(panoshift().args(["validate-math", "--width", "255", "--step", "0.5"]));
    assert_eq!(code(&out), 2);
}

#[test]
fn build_world_identity_chain() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = chain_world(
        tmp.path(),
        ImageDims::new(128, 64).unwrap(),
        5,
        serde_json::json!({}),
    );
    let world = tmp.path().join("world");
    let bundle = tmp.path().join("bundle");
    let out = run(panoshift()
        .args(["--json", "build-world", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&world)
        .arg("--export")
        .arg(&bundle));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["scenes"], 6);
    assert_eq!(v["edges"], 5);
    assert!(validate_manifest(&world.join(MANIFEST_FILE))
        .unwrap()
        .is_empty());
    assert!(bundle.join("index.html").is_file());

    let out = run(panoshift()
        .arg("validate-manifest")
        .arg(bundle.join(MANIFEST_FILE)));
    assert_eq!(code(&out), 0);
}

#[test]
fn rebuilds_and_thread_counts_give_identical_trees() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = chain_world(
        tmp.path(),
        ImageDims::new(128, 64).unwrap(),
        3,
        serde_json::json!({}),
    );
    let mut trees = Vec::new();
    for (i, threads) in ["1", "8", "8"].iter().enumerate() {
        let out_dir = tmp.path().join(format!("w{i}"));
        let out = run(panoshift()
            .args(["--threads", threads, "build-world", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out_dir));
        assert_eq!(code(&out), 0);
        trees.push(tree(&out_dir));
    }
    assert_eq!(trees[0], trees[1]);
    assert_eq!(trees[1], trees[2]);
}

#[test]
fn unreachable_restorer_leaves_partial_world() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = chain_world(
        tmp.path(),
        ImageDims::new(64, 32).unwrap(),
        3,
        http_restorer(&stub::dead_endpoint()),
    );
    let world = tmp.path().join("world");
    let out = run(panoshift()
        .arg("build-world")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&world));
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    let graph = WorldGraph::read(&world.join(MANIFEST_FILE)).unwrap();
    assert!(graph.is_partial());
    assert_eq!(graph.scenes.len(), 1);
}

#[test]
fn echo_service_via_env_override() {
    let s = stub::spawn(stub::echo());
    let tmp = tempfile::tempdir().unwrap();
    // The config points nowhere; the environment wins.
    let cfg = chain_world(
        tmp.path(),
        ImageDims::new(64, 32).unwrap(),
        2,
        http_restorer(&stub::dead_endpoint()),
    );
    let world = tmp.path().join("world");
    let out = run(panoshift()
        .env("PANO_RESTORER_ENDPOINT", &s.url)
        .arg("build-world")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&world));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(s.bodies.lock().unwrap().len(), 2);
    let sent: serde_json::Value = serde_json::from_slice(&s.bodies.lock().unwrap()[0]).unwrap();
    assert_eq!(sent["seed"], 7);
    assert_eq!(sent["prompt"], "a desert at dusk");
}

#[test]
fn endpoint_flag_beats_environment() {
    let s = stub::spawn(stub::wrong_dims());
    let tmp = tempfile::tempdir().unwrap();
    let cfg = chain_world(
        tmp.path(),
        ImageDims::new(64, 32).unwrap(),
        2,
        serde_json::json!({}),
    );
    let world = tmp.path().join("world");
    let out = run(panoshift()
        .env("PANO_RESTORER_ENDPOINT", stub::dead_endpoint())
        .args([
            "build-world",
            "--restorer",
            "http",
            "--endpoint",
            &s.url,
            "--config",
        ])
        .arg(&cfg)
        .arg("--out")
        .arg(&world));
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("expected 64x32"));
    let graph = WorldGraph::read(&world.join(MANIFEST_FILE)).unwrap();
    assert!(graph.is_partial());
    assert!(validate_manifest(&world.join(MANIFEST_FILE))
        .unwrap()
        .is_empty());
}

#[test]
fn invalid_world_config_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = chain_world(
        tmp.path(),
        ImageDims::new(64, 32).unwrap(),
        1,
        serde_json::json!({}),
    );
    let mut v: serde_json::Value = serde_json::from_slice(&std::fs::read(&cfg).unwrap()).unwrap();
    v["moves"][0]["step"] = 1.0.into();
    std::fs::write(&cfg, v.to_string()).unwrap();
    let world = tmp.path().join("world");
    let out = run(panoshift()
        .arg("build-world")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&world));
    assert_eq!(code(&out), 2);
    assert!(!world.exists());

    let out = run(panoshift()
        .args(["build-world", "--restorer", "http", "--config"])
        .arg(tmp.path().join("absent.json"))
        .arg("--out")
        .arg(&world));
    assert_ne!(code(&out), 0);
}

#[test]
fn validate_manifest_flags_broken_worlds() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = chain_world(
        tmp.path(),
        ImageDims::new(64, 32).unwrap(),
        2,
        serde_json::json!({}),
    );
    let world = tmp.path().join("world");
    assert_eq!(
        code(&run(panoshift()
            .arg("build-world")
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(&world))),
        0
    );
    std::fs::remove_file(world.join("scenes/2.png")).unwrap();
    let out = run(panoshift()
        .args(["--json", "validate-manifest"])
        .arg(world.join(MANIFEST_FILE)));
    assert_eq!(code(&out), 1);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["valid"], false);
    assert_eq!(v["violations"].as_array().unwrap().len(), 1);
}
