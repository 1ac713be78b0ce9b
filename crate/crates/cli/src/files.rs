//! Path-based helpers shared by the subcommands.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use treekit_core::io::{self, CloudFormat};
use treekit_core::LabeledPointCloud;

/// Loads a cloud (format from the extension) and checks its invariants.
pub fn read_cloud(path: &Path) -> Result<LabeledPointCloud> {
    let cloud = io::load_cloud(path, CloudFormat::from_path(path))
        .with_context(|| format!("reading {}", path.display()))?;
    cloud
        .ensure_valid()
        .with_context(|| format!("validating {}", path.display()))?;
    Ok(cloud)
}

pub fn write_cloud(cloud: &LabeledPointCloud, path: &Path) -> Result<()> {
    io::save_cloud(cloud, path, CloudFormat::from_path(path))
        .with_context(|| format!("writing {}", path.display()))
}

/// Parses a JSON config file; `None` yields the type's default.
pub fn read_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))
}

/// `1000` for integral densities, `2.5` otherwise; used in file names.
pub fn density_label(density: f64) -> String {
    format!("{density}")
}
