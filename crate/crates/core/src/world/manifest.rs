use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::WorldError;
use crate::geom::Displacement;
use crate::reproject::{Interpolation, RemapMethod};

pub const MANIFEST_FILE: &str = "world.json";
pub const SCENES_DIR: &str = "scenes";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneEntry {
    pub id: String,
    /// Path relative to the manifest's directory.
    pub image: String,
    /// Pre-restoration image, kept for inspection. Absent for the initial scene.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distorted: Option<String>,
    pub prompt: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: String,
    pub to: String,
    pub displacement: Displacement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BuildStatus {
    Complete,
    Partial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub created_at: String,
    pub tool_version: String,
    pub remap_method: RemapMethod,
    pub interpolation: Interpolation,
    pub status: BuildStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Scenes joined by displacement-labelled edges; serialized as `world.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldGraph {
    pub scenes: Vec<SceneEntry>,
    pub edges: Vec<Edge>,
    pub metadata: Metadata,
}

impl WorldGraph {
    pub fn scene(&self, id: &str) -> Option<&SceneEntry> {
        self.scenes.iter().find(|s| s.id == id)
    }

    pub fn is_partial(&self) -> bool {
        self.metadata.status == BuildStatus::Partial
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf, WorldError> {
        let path = dir.join(MANIFEST_FILE);
        std::fs::write(&path, self.to_json()).map_err(|source| WorldError::Io {
            path: path.clone(),
            source,
        })?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self, WorldError> {
        let text = std::fs::read_to_string(path).map_err(|source| WorldError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| WorldError::Manifest {
            path: path.to_path_buf(),
            detail: e.to_string(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoScenes,
    DuplicateScene {
        id: String,
    },
    MissingFile {
        scene: String,
        path: String,
    },
    UnreadableImage {
        scene: String,
        path: String,
        detail: String,
    },
    BadDims {
        scene: String,
        path: String,
        width: u32,
        height: u32,
        expected: Option<(u32, u32)>,
    },
    DanglingEdge {
        from: String,
        to: String,
        missing: String,
    },
    ZeroStep {
        from: String,
        to: String,
    },
    Unreachable {
        scene: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoScenes => write!(f, "manifest lists no scenes"),
            Violation::DuplicateScene { id } => write!(f, "scene id '{id}' appears more than once"),
            Violation::MissingFile { scene, path } => {
                write!(f, "scene '{scene}': file {path} is missing")
            }
            Violation::UnreadableImage {
                scene,
                path,
                detail,
            } => {
                write!(f, "scene '{scene}': cannot read {path}: {detail}")
            }
            Violation::BadDims {
                scene,
                path,
                width,
                height,
                expected,
            } => match expected {
                Some((ew, eh)) => write!(
                    f,
                    "scene '{scene}': {path} is {width}x{height}, other scenes are {ew}x{eh}"
                ),
                None => write!(f, "scene '{scene}': {path} is {width}x{height}, not 2:1"),
            },
            Violation::DanglingEdge { from, to, missing } => {
                write!(f, "edge {from} -> {to} refers to unknown scene '{missing}'")
            }
            Violation::ZeroStep { from, to } => write!(f, "edge {from} -> {to} has zero step"),
            Violation::Unreachable { scene } => {
                write!(f, "scene '{scene}' is not reachable from the initial scene")
            }
        }
    }
}

fn check_image(
    root: &Path,
    scene: &str,
    rel: &str,
    expected: &mut Option<(u32, u32)>,
    out: &mut Vec<Violation>,
) {
    let path = root.join(rel);
    if !path.is_file() {
        out.push(Violation::MissingFile {
            scene: scene.to_string(),
            path: rel.to_string(),
        });
        return;
    }
    let (width, height) = match image::image_dimensions(&path) {
        Ok(d) => d,
        Err(e) => {
            out.push(Violation::UnreadableImage {
                scene: scene.to_string(),
                path: rel.to_string(),
                detail: e.to_string(),
            });
            return;
        }
    };
    let bad = |expected| Violation::BadDims {
        scene: scene.to_string(),
        path: rel.to_string(),
        width,
        height,
        expected,
    };
    if width < 2 || width as u64 != 2 * height as u64 {
        out.push(bad(None));
    } else if let Some(exp) = *expected {
        if exp != (width, height) {
            out.push(bad(Some(exp)));
        }
    } else {
        *expected = Some((width, height));
    }
}

/// Checks a graph against the files under `root`.
pub fn graph_violations(graph: &WorldGraph, root: &Path) -> Vec<Violation> {
    let mut out = Vec::new();
    if graph.scenes.is_empty() {
        out.push(Violation::NoScenes);
        return out;
    }
    let mut ids = HashSet::new();
    for s in &graph.scenes {
        if !ids.insert(s.id.as_str()) {
            out.push(Violation::DuplicateScene { id: s.id.clone() });
        }
    }

    let mut expected = None;
    for s in &graph.scenes {
        check_image(root, &s.id, &s.image, &mut expected, &mut out);
        if let Some(d) = &s.distorted {
            check_image(root, &s.id, d, &mut expected, &mut out);
        }
    }

    let mut adjacency: HashMap<&str, Vec<&str>> = HashMap::new();
    for e in &graph.edges {
        let missing = [&e.from, &e.to]
            .into_iter()
            .find(|id| !ids.contains(id.as_str()));
        if let Some(missing) = missing {
            out.push(Violation::DanglingEdge {
                from: e.from.clone(),
                to: e.to.clone(),
                missing: missing.clone(),
            });
            continue;
        }
        if e.displacement.step() == 0.0 {
            out.push(Violation::ZeroStep {
                from: e.from.clone(),
                to: e.to.clone(),
            });
        }
        adjacency.entry(&e.from).or_default().push(&e.to);
    }

    let start = graph.scenes[0].id.as_str();
    let mut reached = HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(id) = queue.pop_front() {
        for &next in adjacency.get(id).into_iter().flatten() {
            if reached.insert(next) {
                queue.push_back(next);
            }
        }
    }
    let mut reported = HashSet::new();
    for s in &graph.scenes {
        if !reached.contains(s.id.as_str()) && reported.insert(s.id.as_str()) {
            out.push(Violation::Unreachable {
                scene: s.id.clone(),
            });
        }
    }
    out
}

/// Reads `world.json` at `path` and lists every invariant it breaks.
/// An empty list means the manifest and its images are consistent.
pub fn validate_manifest(path: &Path) -> Result<Vec<Violation>, WorldError> {
    let graph = WorldGraph::read(path)?;
    let root = path.parent().unwrap_or(Path::new("."));
    Ok(graph_violations(&graph, root))
}
