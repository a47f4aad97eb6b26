use std::path::{Path, PathBuf};

use super::manifest::WorldGraph;

const INDEX_HTML: &str = include_str!("../../assets/viewer/index.html");

#[derive(Debug)]
pub struct FileFailure {
    pub path: PathBuf,
    pub error: std::io::Error,
}

#[derive(Debug, thiserror::Error)]
#[error("export failed for {} file(s): {}", .0.len(), summarize(.0))]
pub struct ExportError(pub Vec<FileFailure>);

fn summarize(failures: &[FileFailure]) -> String {
    failures
        .iter()
        .map(|f| format!("{}: {}", f.path.display(), f.error))
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExportSummary {
    pub images: Vec<PathBuf>,
    pub manifest: PathBuf,
    pub assets: Vec<PathBuf>,
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(a), Ok(b)) => a == b,
        _ => false,
    }
}

fn copy_file(src: &Path, dst: &Path) -> std::io::Result<()> {
    if same_file(src, dst) {
        return Ok(());
    }
    if let Some(parent) = dst.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::copy(src, dst).map(|_| ())
}

fn copy_tree(src: &Path, dst: &Path, copied: &mut Vec<PathBuf>, failures: &mut Vec<FileFailure>) {
    let entries = match std::fs::read_dir(src) {
        Ok(e) => e,
        Err(error) => {
            failures.push(FileFailure {
                path: src.to_path_buf(),
                error,
            });
            return;
        }
    };
    let mut entries: Vec<_> = entries.filter_map(Result::ok).map(|e| e.path()).collect();
    entries.sort();
    for path in entries {
        let target = dst.join(path.file_name().expect("read_dir entries have names"));
        if path.is_dir() {
            copy_tree(&path, &target, copied, failures);
        } else {
            match copy_file(&path, &target) {
                Ok(()) => copied.push(target),
                Err(error) => failures.push(FileFailure { path, error }),
            }
        }
    }
}

/// Writes a self-contained static bundle: scene images, `world.json` and
/// viewer assets.
///
/// Image paths in `graph` are resolved against `src_root`. Without
/// `viewer_assets`, a built-in single-page viewer is written as
/// `index.html`; otherwise the given directory (a built viewer) is copied
/// in. Every file is attempted; failures are collected and returned together.
pub fn export_viewer(
    graph: &WorldGraph,
    src_root: &Path,
    out_dir: &Path,
    viewer_assets: Option<&Path>,
) -> Result<ExportSummary, ExportError> {
    let mut failures = Vec::new();
    if let Err(error) = std::fs::create_dir_all(out_dir) {
        return Err(ExportError(vec![FileFailure {
            path: out_dir.to_path_buf(),
            error,
        }]));
    }

    let mut images = Vec::new();
    for scene in &graph.scenes {
        for rel in std::iter::once(&scene.image).chain(scene.distorted.as_ref()) {
            let src = src_root.join(rel);
            let dst = out_dir.join(rel);
            match copy_file(&src, &dst) {
                Ok(()) => images.push(dst),
                Err(error) => failures.push(FileFailure { path: src, error }),
            }
        }
    }

    let manifest = out_dir.join(super::MANIFEST_FILE);
    if let Err(error) = std::fs::write(&manifest, graph.to_json()) {
        failures.push(FileFailure {
            path: manifest.clone(),
            error,
        });
    }

    let mut assets = Vec::new();
    match viewer_assets {
        Some(dir) => copy_tree(dir, out_dir, &mut assets, &mut failures),
        None => {
            let index = out_dir.join("index.html");
            match std::fs::write(&index, INDEX_HTML) {
                Ok(()) => assets.push(index),
                Err(error) => failures.push(FileFailure { path: index, error }),
            }
        }
    }

    if failures.is_empty() {
        Ok(ExportSummary {
            images,
            manifest,
            assets,
        })
    } else {
        Err(ExportError(failures))
    }
}
