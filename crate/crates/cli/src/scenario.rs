//! Scenario dataset composition.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use treekit_core::augment::{self, AugmentConfig};
use treekit_core::geometry::{plot_area, AreaMode};
use treekit_core::seed;
use treekit_core::sparsify::{series_seed, sparsify_indices, SCENARIO_DENSITIES};
use treekit_core::{Error, LabeledPointCloud};

use crate::files;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioName {
    Scenario1,
    Scenario2,
    Scenario3,
    Scenario4,
    Scenario5,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Platform {
    #[serde(rename = "ULS")]
    Uls,
    #[serde(rename = "MLS")]
    Mls,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Source {
    pub path: PathBuf,
    pub platform: Platform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: ScenarioName,
    pub sources: Vec<Source>,
    /// Only read for `custom`; presets fix their own list.
    #[serde(default)]
    pub densities: Vec<f64>,
    #[serde(default)]
    pub augment: Option<AugmentConfig>,
    #[serde(default)]
    pub seed: u64,
}

/// What a preset selects: which platforms and which sparsified densities.
#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    pub platforms: Vec<Platform>,
    pub densities: Vec<f64>,
}

impl ScenarioConfig {
    pub fn expand(&self) -> Expansion {
        use Platform::*;
        let (platforms, densities) = match self.name {
            ScenarioName::Scenario1 => (vec![Uls], vec![]),
            ScenarioName::Scenario2 => (vec![Mls], vec![]),
            ScenarioName::Scenario3 => (vec![Uls, Mls], vec![]),
            ScenarioName::Scenario4 => (vec![Uls, Mls], vec![1000.0]),
            ScenarioName::Scenario5 => (vec![Uls, Mls], SCENARIO_DENSITIES.to_vec()),
            ScenarioName::Custom => (vec![Uls, Mls], self.densities.clone()),
        };
        Expansion {
            platforms,
            densities,
        }
    }

    /// Sources kept by the preset, with their index in `sources`.
    pub fn selected_sources(&self) -> Vec<(usize, &Source)> {
        let platforms = self.expand().platforms;
        self.sources
            .iter()
            .enumerate()
            .filter(|(_, s)| platforms.contains(&s.platform))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub input: PathBuf,
    pub platform: Platform,
    /// Applied steps in order, e.g. `["sparsify(100)", "augment"]`.
    pub transforms: Vec<String>,
    pub output: PathBuf,
    pub seed: u64,
    pub n_points: usize,
    pub achieved_density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    /// Seconds since the Unix epoch; the only field that differs between
    /// reruns.
    pub timestamp: u64,
    pub scenario: ScenarioName,
    pub seed: u64,
    pub artifacts: Vec<Artifact>,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}

struct Job<'a> {
    source_index: usize,
    source: &'a Source,
    cloud: &'a LabeledPointCloud,
    area: f64,
    density: Option<(usize, f64)>,
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "cloud".into())
}

/// Writes the original and per-density sparsified clouds of every selected
/// source into `out_dir`, plus `manifest.json`.
///
/// Source `i` uses seed `derive(seed, i)`; its `j`-th density uses the
/// series seed of that. With an augment config every output is augmented
/// with the output's own seed mixed into the config seed.
pub fn prepare_scenario(config: &ScenarioConfig, out_dir: &Path) -> Result<RunManifest> {
    let expansion = config.expand();
    if expansion
        .densities
        .iter()
        .any(|d| !(d.is_finite() && *d > 0.0))
    {
        bail!(Error::InvalidParameter(
            "scenario densities must be positive".into()
        ));
    }
    if let Some(a) = &config.augment {
        a.validate().context("augment config")?;
    }
    let selected = config.selected_sources();
    if selected.is_empty() {
        bail!(Error::InvalidParameter(format!(
            "scenario {:?} selects no sources from the {} given",
            config.name,
            config.sources.len()
        )));
    }

    let clouds: Vec<LabeledPointCloud> = selected
        .par_iter()
        .map(|(_, s)| files::read_cloud(&s.path))
        .collect::<Result<_>>()?;
    let areas: Vec<f64> = clouds
        .iter()
        .zip(&selected)
        .map(|(c, (_, s))| {
            plot_area(c, AreaMode::ConvexHull)
                .with_context(|| format!("area of {}", s.path.display()))
        })
        .collect::<Result<_>>()?;

    let mut jobs = Vec::new();
    for ((&(source_index, source), cloud), &area) in selected.iter().zip(&clouds).zip(&areas) {
        for density in
            std::iter::once(None).chain(expansion.densities.iter().copied().enumerate().map(Some))
        {
            jobs.push(Job {
                source_index,
                source,
                cloud,
                area,
                density,
            });
        }
    }

    files::create_dir(out_dir)?;
    let artifacts: Vec<Artifact> = jobs
        .par_iter()
        .map(|job| produce(job, config, out_dir))
        .collect::<Result<_>>()?;

    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        scenario: config.name,
        seed: config.seed,
        artifacts,
    };
    files::write_text(&out_dir.join("manifest.json"), &(manifest.to_json() + "\n"))?;
    Ok(manifest)
}

fn produce(job: &Job, config: &ScenarioConfig, out_dir: &Path) -> Result<Artifact> {
    let source_seed = seed::derive(config.seed, job.source_index as u64);
    let stem = format!("{:02}_{}", job.source_index, file_stem(&job.source.path));
    let (mut cloud, mut transforms, seed, name) = match job.density {
        None => (
            job.cloud.clone(),
            Vec::new(),
            source_seed,
            format!("{stem}_original.ptc"),
        ),
        Some((j, d)) => {
            let s = series_seed(source_seed, j);
            let idx = sparsify_indices(job.cloud, d, s, AreaMode::ConvexHull)
                .with_context(|| format!("sparsify {} to {d}", job.source.path.display()))?;
            (
                job.cloud.select(&idx),
                vec![format!("sparsify({d})")],
                s,
                format!("{stem}_d{}.ptc", files::density_label(d)),
            )
        }
    };
    if let Some(aug) = &config.augment {
        let aug = AugmentConfig {
            seed: seed::derive(aug.seed, seed),
            ..aug.clone()
        };
        cloud = augment::augment(&cloud, &aug).context("augment")?;
        transforms.push("augment".into());
    }
    let output = out_dir.join(name);
    files::write_cloud(&cloud, &output)?;
    Ok(Artifact {
        input: job.source.path.clone(),
        platform: job.source.platform,
        transforms,
        output,
        seed,
        n_points: cloud.len(),
        achieved_density: cloud.len() as f64 / job.area,
    })
}
