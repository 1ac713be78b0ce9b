//! Synthetic forests with exact labels, and oracle predictions derived from
//! those labels.
//!
//! A tree is a vertical stem segment under an ellipsoidal crown. Ground
//! points are spread uniformly over the plot near z = 0. The oracle gives
//! every tree point its true class, the offset to its instance centroid and a
//! fixed per-instance embedding code, each optionally perturbed.

use std::collections::BTreeMap;

use rand::Rng as _;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cloud::{LabeledPointCloud, PointRecord};
use crate::error::{Error, Result};
use crate::grouping::{Embedding, PointPrediction, PointPredictions, EMBEDDING_DIM};
use crate::seed;

/// Rejection-sampling budget for tree placement, over all trees.
pub const PLACEMENT_ATTEMPTS: usize = 10_000;

/// Radius of the sphere the per-instance embedding codes live on.
pub const EMBEDDING_RADIUS: f64 = 10.0;

const STEM_RADIUS: f64 = 0.15;
const STEM_FRACTION: f64 = 0.2;
/// Crown depth as a fraction of tree height.
const CROWN_DEPTH: f64 = 0.6;
const GROUND_Z_JITTER: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    /// Side of the square plot, meters.
    pub plot_size: f64,
    pub n_trees: usize,
    /// Minimum XY distance between tree centers, meters.
    pub min_spacing: f64,
    pub height_range: [f64; 2],
    pub crown_radius_range: [f64; 2],
    pub points_per_tree: usize,
    pub ground_points: usize,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            plot_size: 40.0,
            n_trees: 10,
            min_spacing: 8.0,
            height_range: [8.0, 25.0],
            crown_radius_range: [1.5, 3.0],
            points_per_tree: 400,
            ground_points: 3000,
            seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<()> {
        let ordered =
            |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && 0.0 < r[0] && r[0] <= r[1];
        if !(self.plot_size.is_finite() && self.plot_size > 0.0) {
            return Err(Error::param("plot_size must be positive"));
        }
        if !(self.min_spacing.is_finite() && self.min_spacing > 0.0) {
            return Err(Error::param("min_spacing must be positive"));
        }
        if !ordered(self.height_range) || !ordered(self.crown_radius_range) {
            return Err(Error::param(
                "height_range and crown_radius_range need 0 < min <= max",
            ));
        }
        if self.n_trees == 0 || self.points_per_tree == 0 || self.ground_points == 0 {
            return Err(Error::param(
                "n_trees, points_per_tree and ground_points must be positive",
            ));
        }
        Ok(())
    }
}

/// Tree centers at least `min_spacing` apart, by rejection sampling.
pub fn place_trees(config: &ForestConfig, rng: &mut seed::Rng) -> Result<Vec<[f64; 2]>> {
    let s2 = config.min_spacing * config.min_spacing;
    let mut centers: Vec<[f64; 2]> = Vec::with_capacity(config.n_trees);
    let mut attempts = 0;
    while centers.len() < config.n_trees {
        if attempts == PLACEMENT_ATTEMPTS {
            return Err(Error::PlacementInfeasible {
                requested: config.n_trees,
                placed: centers.len(),
                min_spacing: config.min_spacing,
                attempts,
            });
        }
        attempts += 1;
        let c = [
            rng.random_range(0.0..config.plot_size),
            rng.random_range(0.0..config.plot_size),
        ];
        if centers
            .iter()
            .all(|o| (o[0] - c[0]).powi(2) + (o[1] - c[1]).powi(2) >= s2)
        {
            centers.push(c);
        }
    }
    Ok(centers)
}

fn uniform_in_unit_ball(rng: &mut seed::Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..=1.0));
        if v.iter().map(|c| c * c).sum::<f64>() <= 1.0 {
            return v;
        }
    }
}

fn range(rng: &mut seed::Rng, [lo, hi]: [f64; 2]) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

/// Synthetic forest: trees carry ids `1..=n_trees`, followed by ground points.
pub fn generate_forest(config: &ForestConfig) -> Result<LabeledPointCloud> {
    config.validate()?;
    let mut rng = seed::rng(config.seed);
    let centers = place_trees(config, &mut rng)?;

    let mut points =
        Vec::with_capacity(config.n_trees * config.points_per_tree + config.ground_points);
    for (k, c) in centers.iter().enumerate() {
        let id = k as u32 + 1;
        let height = range(&mut rng, config.height_range);
        let radius = range(&mut rng, config.crown_radius_range);
        let half_depth = 0.5 * CROWN_DEPTH * height;
        let crown_z = height - half_depth;

        let n_stem = ((config.points_per_tree as f64 * STEM_FRACTION).round() as usize)
            .min(config.points_per_tree.saturating_sub(1));
        for _ in 0..n_stem {
            let a = rng.random_range(0.0..std::f64::consts::TAU);
            let z = rng.random_range(0.0..=crown_z);
            points.push(PointRecord::tree(
                c[0] + STEM_RADIUS * a.cos(),
                c[1] + STEM_RADIUS * a.sin(),
                z,
                id,
            ));
        }
        for _ in n_stem..config.points_per_tree {
            let u = uniform_in_unit_ball(&mut rng);
            points.push(PointRecord::tree(
                c[0] + radius * u[0],
                c[1] + radius * u[1],
                crown_z + half_depth * u[2],
                id,
            ));
        }
    }
    for _ in 0..config.ground_points {
        points.push(PointRecord::ground(
            rng.random_range(0.0..=config.plot_size),
            rng.random_range(0.0..=config.plot_size),
            rng.random_range(-GROUND_Z_JITTER..=GROUND_Z_JITTER),
        ));
    }
    Ok(LabeledPointCloud::new(points)
        .with_source_tag(format!("synthetic forest seed={}", config.seed)))
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleNoise {
    /// Std of Gaussian noise on each offset component, meters.
    pub offset_sigma: f64,
    /// Std of Gaussian noise on each embedding component.
    pub embedding_sigma: f64,
    /// Probability of flipping a point's tree/non-tree probability.
    pub semantic_flip_prob: f64,
}

impl OracleNoise {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !ok(self.offset_sigma) || !ok(self.embedding_sigma) {
            return Err(Error::param("oracle noise sigmas must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.semantic_flip_prob) {
            return Err(Error::param("semantic_flip_prob must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Fixed code for an instance: a hash of the id mapped onto the 5-D sphere of
/// radius [`EMBEDDING_RADIUS`].
pub fn embedding_code(instance: u32) -> Embedding {
    let mut rng = seed::rng(seed::derive(0x5EED_C0DE_0000_0000, instance as u64));
    loop {
        let v: Embedding = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.map(|x| EMBEDDING_RADIUS * x / norm);
        }
    }
}

fn instance_centroids(cloud: &LabeledPointCloud) -> BTreeMap<u32, [f64; 3]> {
    cloud
        .instances()
        .into_iter()
        .map(|(id, idx)| {
            let n = idx.len() as f64;
            let mut s = [0.0; 3];
            for &i in &idx {
                let p = &cloud.points[i];
                s[0] += p.x;
                s[1] += p.y;
                s[2] += p.z;
            }
            (id, [s[0] / n, s[1] / n, s[2] / n])
        })
        .collect()
}

/// Predictions a perfect network would make, optionally degraded by `noise`.
pub fn oracle_predictions(
    cloud: &LabeledPointCloud,
    noise: &OracleNoise,
    seed: u64,
) -> Result<PointPredictions> {
    noise.validate()?;
    let centroids = instance_centroids(cloud);
    let codes: BTreeMap<u32, Embedding> = centroids
        .keys()
        .map(|&id| (id, embedding_code(id)))
        .collect();
    let offset_noise =
        Normal::new(0.0, noise.offset_sigma).map_err(|e| Error::param(e.to_string()))?;
    let embed_noise =
        Normal::new(0.0, noise.embedding_sigma).map_err(|e| Error::param(e.to_string()))?;
    let mut rng = seed::rng(seed);

    let mut preds = Vec::with_capacity(cloud.len());
    for p in &cloud.points {
        let flip = noise.semantic_flip_prob > 0.0 && rng.random::<f64>() < noise.semantic_flip_prob;
        let truth = if p.semantic.is_tree() { 1.0 } else { 0.0 };
        let semantic_prob = if flip { 1.0 - truth } else { truth };
        let mut pred = PointPrediction {
            semantic_prob,
            ..Default::default()
        };
        if p.instance > 0 {
            let c = centroids[&p.instance];
            let xyz = p.xyz();
            for k in 0..3 {
                pred.offset[k] = c[k] - xyz[k];
                if noise.offset_sigma > 0.0 {
                    pred.offset[k] += offset_noise.sample(&mut rng);
                }
            }
            pred.embedding = codes[&p.instance];
            if noise.embedding_sigma > 0.0 {
                for k in 0..EMBEDDING_DIM {
                    pred.embedding[k] += embed_noise.sample(&mut rng);
                }
            }
        }
        preds.push(pred);
    }
    Ok(PointPredictions::new(preds))
}
