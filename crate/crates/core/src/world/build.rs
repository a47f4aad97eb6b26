use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::UNIX_EPOCH;

use chrono::{DateTime, SecondsFormat, Utc};
use log::info;

use super::config::WorldConfig;
use super::manifest::{BuildStatus, Edge, Metadata, SceneEntry, WorldGraph, SCENES_DIR};
use super::WorldError;
use crate::raster::EquirectImage;
use crate::reproject::RemapCache;
use crate::restorer::{RestoreRequest, Restorer};

fn rfc3339(secs: i64) -> Option<String> {
    DateTime::<Utc>::from_timestamp(secs, 0).map(|t| t.to_rfc3339_opts(SecondsFormat::Secs, true))
}

fn created_at(cfg: &WorldConfig) -> String {
    if let Some(t) = &cfg.created_at {
        return t.clone();
    }
    let from_env = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.trim().parse::<i64>().ok())
        .and_then(rfc3339);
    if let Some(t) = from_env {
        return t;
    }
    std::fs::metadata(&cfg.initial.image)
        .and_then(|m| m.modified())
        .ok()
        .and_then(|t| t.duration_since(UNIX_EPOCH).ok())
        .and_then(|d| rfc3339(d.as_secs() as i64))
        .unwrap_or_else(|| "1970-01-01T00:00:00Z".to_string())
}

fn save(img: &EquirectImage, root: &Path, rel: &str) -> Result<(), WorldError> {
    img.save_png(&root.join(rel)).map_err(WorldError::Raster)
}

fn scene_path(id: &str) -> String {
    format!("{SCENES_DIR}/{id}.png")
}

fn distorted_path(id: &str) -> String {
    format!("{SCENES_DIR}/{id}.distorted.png")
}

/// Runs move → distort → restore for every planned move and persists the
/// world under the configured output directory.
///
/// The manifest is rewritten after every scene. If the restorer fails, the
/// scenes built so far stay on disk, the manifest is marked partial and the
/// error carries the failing scene id.
pub fn build_world(cfg: &WorldConfig, restorer: &dyn Restorer) -> Result<WorldGraph, WorldError> {
    let plan = cfg.plan()?;
    let out: PathBuf = cfg
        .output_dir
        .clone()
        .ok_or_else(|| WorldError::InvalidConfig("no output directory given".into()))?;
    let initial = EquirectImage::load(&cfg.initial.image)?;

    let scenes_dir = out.join(SCENES_DIR);
    std::fs::create_dir_all(&scenes_dir).map_err(|source| WorldError::Io {
        path: scenes_dir.clone(),
        source,
    })?;

    let mut graph = WorldGraph {
        scenes: Vec::with_capacity(plan.len() + 1),
        edges: Vec::with_capacity(plan.len()),
        metadata: Metadata {
            created_at: created_at(cfg),
            tool_version: crate::TOOL_VERSION.to_string(),
            remap_method: cfg.method,
            interpolation: cfg.interpolation,
            status: BuildStatus::Partial,
            error: None,
        },
    };

    let initial_rel = scene_path(&cfg.initial.id);
    save(&initial, &out, &initial_rel)?;
    graph.scenes.push(SceneEntry {
        id: cfg.initial.id.clone(),
        image: initial_rel,
        distorted: None,
        prompt: cfg.initial.prompt.clone(),
    });
    graph.write(&out)?;

    let cache = RemapCache::new();
    let mut images: HashMap<String, EquirectImage> = HashMap::new();
    images.insert(cfg.initial.id.clone(), initial);

    for mv in &plan {
        let source = &images[&mv.from];
        let distorted = cache.reproject(source, &mv.displacement, cfg.method, cfg.interpolation)?;
        let request = RestoreRequest {
            image: distorted,
            prompt: cfg.initial.prompt.clone(),
            strength: cfg.strength,
            seed: cfg.seed,
        };
        let restored = match restorer.restore(&request) {
            Ok(img) => img,
            Err(source) => {
                graph.metadata.error = Some(format!("scene '{}': {source}", mv.id));
                graph.write(&out)?;
                return Err(WorldError::Partial {
                    scene: mv.id.clone(),
                    source,
                    graph: Box::new(graph),
                });
            }
        };

        let image_rel = scene_path(&mv.id);
        let distorted_rel = distorted_path(&mv.id);
        save(&request.image, &out, &distorted_rel)?;
        save(&restored, &out, &image_rel)?;
        graph.scenes.push(SceneEntry {
            id: mv.id.clone(),
            image: image_rel,
            distorted: Some(distorted_rel),
            prompt: cfg.initial.prompt.clone(),
        });
        graph.edges.push(Edge {
            from: mv.from.clone(),
            to: mv.id.clone(),
            displacement: mv.displacement,
        });
        graph.write(&out)?;
        info!("built scene '{}' from '{}'", mv.id, mv.from);
        images.insert(mv.id.clone(), restored);
    }

    graph.metadata.status = BuildStatus::Complete;
    graph.write(&out)?;
    Ok(graph)
}
