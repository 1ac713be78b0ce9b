//! Seeded geometric augmentations.
//!
//! Each random transform has a deterministic counterpart taking explicit
//! parameters (`rotate_z_by`, `scale_by`, `reflect_axes`), used both by the
//! random versions and by tests that force a draw. Rotation, scaling and
//! reflection act about the cloud centroid. Labels and point order are never
//! touched.

use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::cloud::LabeledPointCloud;
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AugmentConfig {
    /// Gaussian jitter standard deviation, meters.
    pub noise_sigma: f64,
    /// Rotation about Z is drawn from `[-max, +max]` degrees.
    pub rotation_max_degrees: f64,
    /// Per-axis scale factors are drawn from `[low, high]`.
    pub scale_range: [f64; 2],
    /// Reflection probability for X and Y. Z is never reflected.
    pub symmetry_axes: [f64; 2],
    pub seed: u64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            noise_sigma: 0.01,
            rotation_max_degrees: 180.0,
            scale_range: [0.9, 1.1],
            symmetry_axes: [0.5, 0.5],
            seed: 0,
        }
    }
}

impl AugmentConfig {
    /// A config whose every stage is a no-op.
    pub fn identity() -> Self {
        Self {
            noise_sigma: 0.0,
            rotation_max_degrees: 0.0,
            scale_range: [1.0, 1.0],
            symmetry_axes: [0.0, 0.0],
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_sigma(self.noise_sigma)?;
        check_rotation(self.rotation_max_degrees)?;
        check_scale_range(self.scale_range)?;
        check_probabilities(self.symmetry_axes)
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma.is_finite() && sigma >= 0.0 {
        Ok(())
    } else {
        Err(Error::param(format!(
            "noise sigma must be >= 0, got {sigma}"
        )))
    }
}

fn check_rotation(max_degrees: f64) -> Result<()> {
    if (0.0..=180.0).contains(&max_degrees) {
        Ok(())
    } else {
        Err(Error::param(format!(
            "rotation bound must lie in [0, 180] degrees, got {max_degrees}"
        )))
    }
}

fn check_scale_range([low, high]: [f64; 2]) -> Result<()> {
    if low.is_finite() && high.is_finite() && low > 0.0 && low <= high {
        Ok(())
    } else {
        Err(Error::param(format!(
            "scale range needs 0 < low <= high, got [{low}, {high}]"
        )))
    }
}

fn check_probabilities(p: [f64; 2]) -> Result<()> {
    if p.iter().all(|v| (0.0..=1.0).contains(v)) {
        Ok(())
    } else {
        Err(Error::param(format!(
            "reflection probabilities must lie in [0, 1], got {p:?}"
        )))
    }
}

// ---------------------------------------------------------------------------
// Deterministic transforms
// ---------------------------------------------------------------------------

/// Rotates about the Z axis through the XY centroid by `degrees`.
pub fn rotate_z_by(cloud: &LabeledPointCloud, degrees: f64) -> LabeledPointCloud {
    let Some([cx, cy]) = cloud.centroid_xy() else {
        return cloud.clone();
    };
    if degrees == 0.0 {
        return cloud.clone();
    }
    let (sin, cos) = degrees.to_radians().sin_cos();
    let mut out = cloud.clone();
    for p in &mut out.points {
        let (dx, dy) = (p.x - cx, p.y - cy);
        p.x = cx + cos * dx - sin * dy;
        p.y = cy + sin * dx + cos * dy;
    }
    out
}

/// Scales each axis about the 3-D centroid.
pub fn scale_by(cloud: &LabeledPointCloud, factors: [f64; 3]) -> LabeledPointCloud {
    let Some(c) = cloud.centroid() else {
        return cloud.clone();
    };
    let mut out = cloud.clone();
    for p in &mut out.points {
        if factors[0] != 1.0 {
            p.x = c[0] + (p.x - c[0]) * factors[0];
        }
        if factors[1] != 1.0 {
            p.y = c[1] + (p.y - c[1]) * factors[1];
        }
        if factors[2] != 1.0 {
            p.z = c[2] + (p.z - c[2]) * factors[2];
        }
    }
    out
}

/// Mirrors X and/or Y about the centroid.
pub fn reflect_axes(cloud: &LabeledPointCloud, axes: [bool; 2]) -> LabeledPointCloud {
    let Some([cx, cy]) = cloud.centroid_xy() else {
        return cloud.clone();
    };
    let mut out = cloud.clone();
    for p in &mut out.points {
        if axes[0] {
            p.x = 2.0 * cx - p.x;
        }
        if axes[1] {
            p.y = 2.0 * cy - p.y;
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Random transforms
// ---------------------------------------------------------------------------

pub fn jitter(cloud: &LabeledPointCloud, sigma: f64, seed: u64) -> Result<LabeledPointCloud> {
    check_sigma(sigma)?;
    if sigma == 0.0 {
        return Ok(cloud.clone());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::param(e.to_string()))?;
    let mut rng = seed::rng(seed);
    let mut out = cloud.clone();
    for p in &mut out.points {
        p.x += normal.sample(&mut rng);
        p.y += normal.sample(&mut rng);
        p.z += normal.sample(&mut rng);
    }
    Ok(out)
}

/// The angle, in degrees, that [`rotate_z`] draws for `seed`.
pub fn draw_rotation(max_degrees: f64, seed: u64) -> Result<f64> {
    check_rotation(max_degrees)?;
    if max_degrees == 0.0 {
        return Ok(0.0);
    }
    Ok(seed::rng(seed).random_range(-max_degrees..=max_degrees))
}

pub fn rotate_z(
    cloud: &LabeledPointCloud,
    max_degrees: f64,
    seed: u64,
) -> Result<LabeledPointCloud> {
    Ok(rotate_z_by(cloud, draw_rotation(max_degrees, seed)?))
}

/// The per-axis factors [`scale_aniso`] draws for `seed`.
pub fn draw_scales(range: [f64; 2], seed: u64) -> Result<[f64; 3]> {
    check_scale_range(range)?;
    let [low, high] = range;
    if low == high {
        return Ok([low; 3]);
    }
    let mut rng = seed::rng(seed);
    Ok([
        rng.random_range(low..=high),
        rng.random_range(low..=high),
        rng.random_range(low..=high),
    ])
}

pub fn scale_aniso(
    cloud: &LabeledPointCloud,
    range: [f64; 2],
    seed: u64,
) -> Result<LabeledPointCloud> {
    Ok(scale_by(cloud, draw_scales(range, seed)?))
}

/// Which axes [`reflect`] mirrors for `seed`.
pub fn draw_reflection(probabilities: [f64; 2], seed: u64) -> Result<[bool; 2]> {
    check_probabilities(probabilities)?;
    let mut rng = seed::rng(seed);
    let mut flip = [false; 2];
    for (f, &p) in flip.iter_mut().zip(&probabilities) {
        *f = rng.random::<f64>() < p;
    }
    Ok(flip)
}

pub fn reflect(
    cloud: &LabeledPointCloud,
    probabilities: [f64; 2],
    seed: u64,
) -> Result<LabeledPointCloud> {
    let axes = draw_reflection(probabilities, seed)?;
    if axes == [false, false] {
        return Ok(cloud.clone());
    }
    Ok(reflect_axes(cloud, axes))
}

/// Seed handed to each stage of [`augment`]: reflect 0, scale 1, rotate 2, jitter 3.
pub fn stage_seed(seed: u64, stage: u64) -> u64 {
    seed::derive(seed, stage)
}

/// reflect, then scale, then rotate, then jitter, each with its own derived seed.
pub fn augment(cloud: &LabeledPointCloud, config: &AugmentConfig) -> Result<LabeledPointCloud> {
    config.validate()?;
    let s = config.seed;
    let out = reflect(cloud, config.symmetry_axes, stage_seed(s, 0))?;
    let out = scale_aniso(&out, config.scale_range, stage_seed(s, 1))?;
    let out = rotate_z(&out, config.rotation_max_degrees, stage_seed(s, 2))?;
    jitter(&out, config.noise_sigma, stage_seed(s, 3))
}
