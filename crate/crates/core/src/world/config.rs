use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::WorldError;
use crate::geom::Displacement;
use crate::reproject::{Interpolation, RemapMethod};
use crate::restorer::{RestorerConfig, DEFAULT_STRENGTH};

fn default_initial_id() -> String {
    "1".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialScene {
    #[serde(default = "default_initial_id")]
    pub id: String,
    /// PNG or JPEG panorama; relative paths resolve against the config file.
    pub image: PathBuf,
    pub prompt: String,
}

/// One move. Without `from` it continues from the previously created scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoveSpec {
    pub id: String,
    pub step: f64,
    pub direction: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from: Option<String>,
}

/// A `rows × cols` grid walked row-major in a serpentine: even rows move in
/// `direction`, odd rows in `direction + 180`, and row changes in
/// `direction + 90`. The initial scene is cell (0, 0); other cells are named
/// `r<row>c<col>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub rows: u32,
    pub cols: u32,
    pub step: f64,
    #[serde(default)]
    pub direction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldConfig {
    pub initial: InitialScene,
    #[serde(default)]
    pub moves: Vec<MoveSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub restorer: RestorerConfig,
    #[serde(default)]
    pub method: RemapMethod,
    #[serde(default)]
    pub interpolation: Interpolation,
    #[serde(default = "default_strength")]
    pub strength: f64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Manifest timestamp. Falls back to `$SOURCE_DATE_EPOCH`, then to the
    /// initial image's modification time, so rebuilds are reproducible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_at: Option<String>,
}

fn default_strength() -> f64 {
    DEFAULT_STRENGTH
}

/// A validated move with its parent resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannedMove {
    pub id: String,
    pub from: String,
    pub displacement: Displacement,
}

fn check_id(id: &str) -> Result<(), WorldError> {
    let ok = !id.is_empty()
        && !id.starts_with('.')
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
    if ok {
        Ok(())
    } else {
        Err(WorldError::InvalidConfig(format!(
            "scene id '{id}' must be non-empty, not start with '.', and use only [A-Za-z0-9._-]"
        )))
    }
}

impl WorldConfig {
    pub fn new(image: impl Into<PathBuf>, prompt: impl Into<String>) -> Self {
        Self {
            initial: InitialScene {
                id: default_initial_id(),
                image: image.into(),
                prompt: prompt.into(),
            },
            moves: Vec::new(),
            grid: None,
            restorer: RestorerConfig::default(),
            method: RemapMethod::default(),
            interpolation: Interpolation::default(),
            strength: DEFAULT_STRENGTH,
            seed: None,
            output_dir: None,
            created_at: None,
        }
    }

    /// Reads a JSON config; relative paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, WorldError> {
        let text = std::fs::read_to_string(path).map_err(|source| WorldError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg: WorldConfig = serde_json::from_str(&text)
            .map_err(|e| WorldError::InvalidConfig(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        if cfg.initial.image.is_relative() {
            cfg.initial.image = base.join(&cfg.initial.image);
        }
        if let Some(out) = cfg.output_dir.as_mut() {
            if out.is_relative() {
                *out = base.join(&*out);
            }
        }
        Ok(cfg)
    }

    /// Validates the config and expands it into an ordered move list.
    pub fn plan(&self) -> Result<Vec<PlannedMove>, WorldError> {
        if !(0.0..=1.0).contains(&self.strength) {
            return Err(WorldError::InvalidConfig(format!(
                "strength {} outside [0, 1]",
                self.strength
            )));
        }
        if self.initial.prompt.trim().is_empty() {
            return Err(WorldError::InvalidConfig("initial prompt is empty".into()));
        }
        self.restorer
            .validate()
            .map_err(|e| WorldError::InvalidConfig(e.to_string()))?;
        check_id(&self.initial.id)?;

        let specs = match (&self.grid, self.moves.is_empty()) {
            (Some(_), false) => {
                return Err(WorldError::InvalidConfig(
                    "give either moves or grid, not both".into(),
                ))
            }
            (Some(grid), true) => expand_grid(&self.initial.id, grid)?,
            (None, _) => self.moves.clone(),
        };

        let mut seen: HashSet<&str> = HashSet::from([self.initial.id.as_str()]);
        let mut prev = self.initial.id.clone();
        let mut planned = Vec::with_capacity(specs.len());
        for m in &specs {
            check_id(&m.id)?;
            if !seen.insert(m.id.as_str()) {
                return Err(WorldError::InvalidConfig(format!(
                    "duplicate scene id '{}'",
                    m.id
                )));
            }
            if !(m.step > 0.0 && m.step < 1.0) {
                return Err(WorldError::InvalidConfig(format!(
                    "move '{}' has step {}; need 0 < step < 1",
                    m.id, m.step
                )));
            }
            let displacement = Displacement::new(m.step, m.direction)
                .map_err(|e| WorldError::InvalidConfig(format!("move '{}': {e}", m.id)))?;
            let from = m.from.clone().unwrap_or_else(|| prev.clone());
            let known =
                from == self.initial.id || planned.iter().any(|p: &PlannedMove| p.id == from);
            if !known {
                return Err(WorldError::InvalidConfig(format!(
                    "move '{}' starts from unknown or later scene '{from}'",
                    m.id
                )));
            }
            prev = m.id.clone();
            planned.push(PlannedMove {
                id: m.id.clone(),
                from,
                displacement,
            });
        }
        Ok(planned)
    }
}

fn expand_grid(initial_id: &str, grid: &GridSpec) -> Result<Vec<MoveSpec>, WorldError> {
    if grid.rows == 0 || grid.cols == 0 {
        return Err(WorldError::InvalidConfig(
            "grid needs at least one row and one column".into(),
        ));
    }
    let cell_id = |r: u32, c: u32| {
        if r == 0 && c == 0 {
            initial_id.to_string()
        } else {
            format!("r{r}c{c}")
        }
    };
    let mut moves = Vec::new();
    for r in 0..grid.rows {
        let forward = r % 2 == 0;
        let cols: Vec<u32> = if forward {
            (0..grid.cols).collect()
        } else {
            (0..grid.cols).rev().collect()
        };
        for (i, &c) in cols.iter().enumerate() {
            let (from, direction) = match (r, i) {
                (0, 0) => continue,
                (_, 0) => (cell_id(r - 1, c), grid.direction + 90.0),
                _ => (
                    cell_id(r, cols[i - 1]),
                    if forward {
                        grid.direction
                    } else {
                        grid.direction + 180.0
                    },
                ),
            };
            moves.push(MoveSpec {
                id: cell_id(r, c),
                step: grid.step,
                direction,
                from: Some(from),
            });
        }
    }
    Ok(moves)
}
