//! `panoshift` command-line entry point.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 invalid arguments or config,
//! 3 world build stopped part-way (manifest marked partial).

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use log::info;
use panoshift::geom::{Displacement, ImageDims, StepReading};
use panoshift::raster::EquirectImage;
use panoshift::reproject::{compare_methods, reproject_image, Interpolation, RemapMethod};
use panoshift::restorer::RestorerKind;
use panoshift::world::{build_world, export_viewer, validate_manifest, WorldConfig, WorldError};
use serde_json::json;

const EQUATOR_TOLERANCE: f64 = 1e-9;

#[derive(Parser)]
#[command(
    name = "panoshift",
    version,
    about = "Translate the observer inside equirectangular panoramas"
)]
struct Cli {
    /// Worker threads for the remap kernels (default: logical cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print a machine-readable JSON summary on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render the panorama seen after moving the observer.
    Reproject(ReprojectArgs),
    /// Compare the separable closed form against exact ray geometry.
    ValidateMath(ValidateMathArgs),
    /// Build a world of chained scenes from a JSON config.
    BuildWorld(BuildWorldArgs),
    /// Check a world.json manifest and its images.
    ValidateManifest { manifest: PathBuf },
}

fn parse_step(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!(
            "step {v} out of range: must satisfy 0 <= step < 1 (the observer stays inside the sphere)"
        ))
    }
}

fn parse_direction(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err("direction must be a finite number of degrees".into())
    }
}

fn parse_width(s: &str) -> Result<u32, String> {
    let v: u32 = s.parse().map_err(|e| format!("{e}"))?;
    ImageDims::from_width(v)
        .map(|_| v)
        .map_err(|_| format!("width {v} must be even and at least 2"))
}

#[derive(Args)]
struct ReprojectArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_parser = parse_step, allow_negative_numbers = true)]
    step: f64,
    /// Degrees, measured from the +x axis seen from above.
    #[arg(long, value_parser = parse_direction, allow_negative_numbers = true)]
    direction: f64,
    /// Output PNG path.
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value = "oracle3d")]
    method: RemapMethod,
    #[arg(long, default_value = "bilinear")]
    interp: Interpolation,
}

#[derive(Args)]
struct ValidateMathArgs {
    #[arg(long, value_parser = parse_width)]
    width: u32,
    #[arg(long, value_parser = parse_step, allow_negative_numbers = true)]
    step: f64,
    #[arg(long, value_parser = parse_direction, allow_negative_numbers = true, default_value_t = 0.0)]
    direction: f64,
    /// How the vertical closed form reads its effective step.
    #[arg(long, default_value = "literal", value_parser = ["literal", "in-plane"])]
    reading: String,
    /// Write the full report as JSON here.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct BuildWorldArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Overrides the restorer kind from the config.
    #[arg(long)]
    restorer: Option<RestorerKind>,
    /// Overrides the restorer endpoint (also settable via PANO_RESTORER_ENDPOINT).
    #[arg(long)]
    endpoint: Option<String>,
    /// After building, write a static viewer bundle into this directory.
    #[arg(long)]
    export: Option<PathBuf>,
    /// Built viewer assets to copy into the bundle instead of the built-in page.
    #[arg(long, requires = "export")]
    viewer_dir: Option<PathBuf>,
}

/// Error carrying its exit code.
struct Failure {
    code: u8,
    err: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(err: anyhow::Error) -> Self {
        Failure { code: 1, err }
    }
}

fn usage(err: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 2,
        err: err.into(),
    }
}

fn emit(json: bool, summary: serde_json::Value, human: impl FnOnce()) {
    if json {
        println!("{summary}");
    } else {
        human();
    }
}

fn cmd_reproject(args: &ReprojectArgs, json: bool) -> Result<(), Failure> {
    let disp = Displacement::new(args.step, args.direction).map_err(usage)?;
    let img = EquirectImage::load(&args.input)
        .with_context(|| format!("loading {}", args.input.display()))?;
    let start = Instant::now();
    let out = reproject_image(&img, &disp, args.method, args.interp).context("reprojecting")?;
    let elapsed = start.elapsed();
    out.save_png(&args.output)
        .with_context(|| format!("writing {}", args.output.display()))?;
    emit(
        json,
        json!({
            "command": "reproject",
            "input": args.input,
            "output": args.output,
            "width": img.dims().width(),
            "height": img.dims().height(),
            "step": disp.step(),
            "direction": disp.direction(),
            "method": args.method.to_string(),
            "interp": args.interp.to_string(),
            "elapsed_ms": elapsed.as_secs_f64() * 1e3,
        }),
        || {
            println!(
                "wrote {} ({}; step {} direction {}°, {} {}) in {:.1} ms",
                args.output.display(),
                img.dims(),
                disp.step(),
                disp.direction(),
                args.method,
                args.interp,
                elapsed.as_secs_f64() * 1e3
            )
        },
    );
    Ok(())
}

fn cmd_validate_math(args: &ValidateMathArgs, json: bool) -> Result<(), Failure> {
    let dims = ImageDims::from_width(args.width).map_err(usage)?;
    let disp = Displacement::new(args.step, args.direction).map_err(usage)?;
    let reading = match args.reading.as_str() {
        "in-plane" => StepReading::InPlane,
        _ => StepReading::Literal,
    };
    let report = compare_methods(dims, &disp, reading).context("comparing methods")?;
    if let Some(path) = &args.report {
        let text = serde_json::to_string_pretty(&report).context("serializing report")?;
        std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    let pass = report.equator_max_error < EQUATOR_TOLERANCE;
    let mut summary = serde_json::to_value(&report).context("serializing report")?;
    summary["command"] = json!("validate-math");
    summary["equator_pass"] = json!(pass);
    emit(json, summary, || {
        println!(
            "{} step {} direction {}°",
            dims,
            disp.step(),
            disp.direction()
        );
        println!(
            "  full frame: max {:.6e} rad, mean {:.6e} rad, worst pixel {:?}",
            report.max_error, report.mean_error, report.worst_pixel
        );
        println!(
            "  equator:    max {:.3e} rad ({})",
            report.equator_max_error,
            if pass { "ok" } else { "FAIL" }
        );
    });
    if pass {
        Ok(())
    } else {
        Err(anyhow!(
            "equator error {:.3e} rad exceeds {EQUATOR_TOLERANCE:e}",
            report.equator_max_error
        )
        .into())
    }
}

fn cmd_build_world(args: &BuildWorldArgs, json: bool) -> Result<(), Failure> {
    let mut cfg = WorldConfig::load(&args.config).map_err(|e| match e {
        WorldError::InvalidConfig(_) => usage(e),
        other => Failure::from(anyhow::Error::from(other)),
    })?;
    cfg.restorer.apply_env_override();
    if let Some(kind) = args.restorer {
        cfg.restorer.kind = kind;
    }
    if let Some(ep) = &args.endpoint {
        cfg.restorer.endpoint = Some(ep.clone());
    }
    cfg.output_dir = Some(args.out.clone());
    cfg.plan().map_err(usage)?;
    let restorer = cfg.restorer.build().map_err(usage)?;

    let start = Instant::now();
    let graph = match build_world(&cfg, restorer.as_ref()) {
        Ok(g) => g,
        Err(WorldError::Partial {
            scene,
            source,
            graph,
        }) => {
            emit(
                json,
                json!({
                    "command": "build-world",
                    "status": "partial",
                    "failed_scene": scene,
                    "error": source.to_string(),
                    "scenes": graph.scenes.len(),
                    "edges": graph.edges.len(),
                    "out": args.out,
                }),
                || {},
            );
            return Err(Failure {
                code: 3,
                err: anyhow!(
                    "stopped at scene '{scene}': {source}; kept {} scene(s) in {}",
                    graph.scenes.len(),
                    args.out.display()
                ),
            });
        }
        Err(WorldError::InvalidConfig(msg)) => return Err(usage(anyhow!(msg))),
        Err(e) => return Err(anyhow::Error::from(e).into()),
    };
    info!(
        "built {} scenes in {:?}",
        graph.scenes.len(),
        start.elapsed()
    );

    let bundle = match &args.export {
        Some(dir) => {
            export_viewer(&graph, &args.out, dir, args.viewer_dir.as_deref())
                .context("exporting viewer bundle")?;
            Some(dir.clone())
        }
        None => None,
    };

    emit(
        json,
        json!({
            "command": "build-world",
            "status": "complete",
            "scenes": graph.scenes.len(),
            "edges": graph.edges.len(),
            "out": args.out,
            "export": bundle,
        }),
        || {
            println!(
                "built {} scene(s), {} edge(s) in {}",
                graph.scenes.len(),
                graph.edges.len(),
                args.out.display()
            );
            if let Some(dir) = &bundle {
                println!("viewer bundle in {}", dir.display());
            }
        },
    );
    Ok(())
}

fn cmd_validate_manifest(path: &Path, json: bool) -> Result<(), Failure> {
    let violations = validate_manifest(path).context("reading manifest")?;
    let messages: Vec<String> = violations.iter().map(ToString::to_string).collect();
    emit(
        json,
        json!({
            "command": "validate-manifest",
            "manifest": path,
            "valid": messages.is_empty(),
            "violations": messages,
        }),
        || {
            if messages.is_empty() {
                println!("{}: ok", path.display());
            }
            for m in &messages {
                println!("{}: {m}", path.display());
            }
        },
    );
    if violations.is_empty() {
        Ok(())
    } else {
        Err(anyhow!("{} violation(s)", violations.len()).into())
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(usage(anyhow!("--threads must be at least 1")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring thread pool")?;
    }
    match &cli.command {
        Command::Reproject(a) => cmd_reproject(a, cli.json),
        Command::ValidateMath(a) => cmd_validate_math(a, cli.json),
        Command::BuildWorld(a) => cmd_build_world(a, cli.json),
        Command::ValidateManifest { manifest } => cmd_validate_manifest(manifest, cli.json),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, err }) => {
            eprintln!("error: {err:#}");
            ExitCode::from(code)
        }
    }
}
