//! Density-targeted random subsampling.
//!
//! The target count is `round(density * hull_area)` clamped to `[1, n]`, with
//! the hull area taken once from the source cloud. Points are drawn uniformly
//! without replacement (seeded partial Fisher-Yates, prefix kept) and
//! returned in their original relative order.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::cloud::LabeledPointCloud;
use crate::error::{Error, Result};
use crate::geometry::{plot_area, AreaMode};
use crate::seed;

/// Densities used for the fully augmented training mix, points per m².
pub const SCENARIO_DENSITIES: [f64; 7] = [1000.0, 500.0, 100.0, 75.0, 50.0, 25.0, 10.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparsifyConfig {
    pub target_densities: Vec<f64>,
    pub seed: u64,
    #[serde(default)]
    pub area_mode: AreaMode,
}

impl SparsifyConfig {
    pub fn new(target_densities: Vec<f64>, seed: u64) -> Self {
        Self {
            target_densities,
            seed,
            area_mode: AreaMode::ConvexHull,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.target_densities.is_empty() {
            return Err(Error::param("density list is empty"));
        }
        self.target_densities
            .iter()
            .try_for_each(|&d| check_density(d))
    }
}

fn check_density(density: f64) -> Result<()> {
    if density.is_finite() && density > 0.0 {
        Ok(())
    } else {
        Err(Error::param(format!(
            "target density must be positive, got {density}"
        )))
    }
}

/// Number of points kept for `density` over `area`, clamped to `[1, n]`.
pub fn target_count(density: f64, area: f64, n: usize) -> usize {
    let raw = (density * area).round();
    if raw >= n as f64 {
        n
    } else {
        (raw as usize).max(1).min(n)
    }
}

/// Sorted indices of `k` points drawn uniformly without replacement from `n`.
pub fn sample_indices(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let k = k.min(n);
    let mut rng = seed::rng(seed);
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        idx.swap(i, j);
    }
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

/// Indices kept when sparsifying `cloud` to `density`.
///
/// Returned indices are ascending; when the target count reaches the source
/// size every index is returned.
pub fn sparsify_indices(
    cloud: &LabeledPointCloud,
    density: f64,
    seed: u64,
    mode: AreaMode,
) -> Result<Vec<usize>> {
    check_density(density)?;
    let area = plot_area(cloud, mode)?;
    if area <= 0.0 {
        return Err(Error::DegenerateHull { area });
    }
    Ok(indices_for_area(cloud.len(), area, density, seed))
}

fn indices_for_area(n: usize, area: f64, density: f64, seed: u64) -> Vec<usize> {
    let k = target_count(density, area, n);
    if k >= n {
        (0..n).collect()
    } else {
        sample_indices(n, k, seed)
    }
}

pub fn sparsify(cloud: &LabeledPointCloud, density: f64, seed: u64) -> Result<LabeledPointCloud> {
    let idx = sparsify_indices(cloud, density, seed, AreaMode::ConvexHull)?;
    if idx.len() == cloud.len() {
        return Ok(cloud.clone());
    }
    Ok(cloud.select(&idx))
}

/// Seed for the `index`-th entry of a series: `seed ^ index`.
pub fn series_seed(seed: u64, index: usize) -> u64 {
    seed ^ index as u64
}

/// One sparsified cloud per configured density, in config order.
///
/// Entry `i` is exactly `sparsify(cloud, densities[i], seed ^ i)`.
pub fn sparsify_series(
    cloud: &LabeledPointCloud,
    config: &SparsifyConfig,
) -> Result<Vec<(f64, LabeledPointCloud)>> {
    config.validate()?;
    let area = plot_area(cloud, config.area_mode)?;
    if area <= 0.0 {
        return Err(Error::DegenerateHull { area });
    }
    Ok(config
        .target_densities
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            let idx = indices_for_area(cloud.len(), area, d, series_seed(config.seed, i));
            let out = if idx.len() == cloud.len() {
                cloud.clone()
            } else {
                cloud.select(&idx)
            };
            (d, out)
        })
        .collect())
}
