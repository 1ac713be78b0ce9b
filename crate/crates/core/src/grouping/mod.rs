//! Instance grouping over per-point predictions.
//!
//! Any provider (a trained network, the synthetic oracle, a heuristic) hands
//! in a [`PointPredictions`] aligned with the cloud. [`segment`] then runs:
//!
//! 1. semantic gating (`semantic_prob > threshold`),
//! 2. region growing on offset-shifted coordinates of the gated points,
//! 3. mean shift on the 5-D embeddings of the same points,
//! 4. scoring of the pooled candidates through a [`CandidateScorer`],
//! 5. greedy NMS producing one instance id per point.

mod mean_shift;
mod nms;
mod region_grow;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use mean_shift::{mean_shift, mean_shift_modes, MeanShift, MeanShiftOutput};
pub use nms::{nms, nms_select, sorted_iou};
pub use region_grow::region_grow;

use crate::cloud::{LabeledPointCloud, Semantic};
use crate::error::{Error, Result};

pub const EMBEDDING_DIM: usize = 5;

pub type Embedding = [f64; EMBEDDING_DIM];

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PointPrediction {
    /// Probability that the point belongs to a tree.
    pub semantic_prob: f64,
    /// Displacement towards the tree center, meters.
    pub offset: [f64; 3],
    pub embedding: Embedding,
}

impl PointPrediction {
    pub(crate) fn violation(&self) -> Option<String> {
        if !(0.0..=1.0).contains(&self.semantic_prob) {
            return Some(format!(
                "semantic probability {} outside [0, 1]",
                self.semantic_prob
            ));
        }
        if !self
            .offset
            .iter()
            .chain(&self.embedding)
            .all(|v| v.is_finite())
        {
            return Some("non-finite offset or embedding component".into());
        }
        None
    }
}

/// Per-point predictions, aligned with cloud order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PointPredictions(pub Vec<PointPrediction>);

impl PointPredictions {
    pub fn new(preds: Vec<PointPrediction>) -> Self {
        Self(preds)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, PointPrediction> {
        self.0.iter()
    }

    pub fn get(&self, i: usize) -> &PointPrediction {
        &self.0[i]
    }

    pub fn select(&self, indices: &[usize]) -> PointPredictions {
        PointPredictions(indices.iter().map(|&i| self.0[i]).collect())
    }

    pub fn validate(&self) -> Result<()> {
        for (i, p) in self.0.iter().enumerate() {
            if let Some(message) = p.violation() {
                return Err(Error::Invalid {
                    line: i + 1,
                    message: format!("prediction {i}: {message}"),
                });
            }
        }
        Ok(())
    }

    pub fn ensure_aligned(&self, cloud: &LabeledPointCloud) -> Result<()> {
        if self.len() != cloud.len() {
            return Err(Error::Misaligned {
                what: "predictions",
                expected: cloud.len(),
                actual: self.len(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateSource {
    OffsetRg,
    EmbeddingMs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterCandidate {
    /// Ascending, duplicate-free point indices.
    pub members: Vec<usize>,
    pub score: f64,
    pub source: CandidateSource,
}

impl ClusterCandidate {
    pub fn new(mut members: Vec<usize>, source: CandidateSource) -> Self {
        members.sort_unstable();
        members.dedup();
        Self {
            members,
            score: 0.0,
            source,
        }
    }

    pub fn with_score(mut self, score: f64) -> Self {
        self.score = score;
        self
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Re-indexes members through `map` (local index to global index).
    fn remap(mut self, map: &[usize]) -> Self {
        for m in &mut self.members {
            *m = map[*m];
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GroupingConfig {
    pub semantic_threshold: f64,
    pub rg_radius: f64,
    pub rg_min_points: usize,
    pub ms_bandwidth: f64,
    pub ms_max_iter: usize,
    pub ms_tol: f64,
    /// Every `ms_seed_stride`-th gated point seeds a mean-shift climb.
    pub ms_seed_stride: usize,
    /// Kernel support radius in bandwidths; points beyond it get zero
    /// weight. `0` means the untruncated Gaussian.
    pub ms_kernel_cutoff: f64,
    pub nms_iou: f64,
}

impl Default for GroupingConfig {
    fn default() -> Self {
        Self {
            semantic_threshold: 0.5,
            rg_radius: 0.5,
            rg_min_points: 10,
            ms_bandwidth: 0.6,
            ms_max_iter: 100,
            ms_tol: 1e-4,
            ms_seed_stride: 1,
            ms_kernel_cutoff: 4.0,
            nms_iou: 0.3,
        }
    }
}

impl GroupingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.semantic_threshold) {
            return Err(Error::param(format!(
                "semantic_threshold must lie in [0, 1), got {}",
                self.semantic_threshold
            )));
        }
        let positive = [
            ("rg_radius", self.rg_radius),
            ("ms_bandwidth", self.ms_bandwidth),
            ("ms_tol", self.ms_tol),
            ("nms_iou", self.nms_iou),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(format!("{name} must be positive, got {v}")));
            }
        }
        if self.rg_min_points == 0 || self.ms_max_iter == 0 || self.ms_seed_stride == 0 {
            return Err(Error::param(
                "rg_min_points, ms_max_iter and ms_seed_stride must be at least 1",
            ));
        }
        if !(self.ms_kernel_cutoff.is_finite() && self.ms_kernel_cutoff >= 0.0) {
            return Err(Error::param("ms_kernel_cutoff must be >= 0"));
        }
        Ok(())
    }
}

/// Predicted instance id per point (0 = unassigned), aligned with cloud order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InstanceSegmentation {
    pub ids: Vec<u32>,
}

impl InstanceSegmentation {
    pub fn new(ids: Vec<u32>) -> Self {
        Self { ids }
    }

    pub fn unassigned(n: usize) -> Self {
        Self { ids: vec![0; n] }
    }

    /// Ground-truth segmentation carried by a labeled cloud.
    pub fn from_cloud(cloud: &LabeledPointCloud) -> Self {
        Self {
            ids: cloud.points.iter().map(|p| p.instance).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Point indices per nonzero id.
    pub fn instances(&self) -> BTreeMap<u32, Vec<usize>> {
        let mut out: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (i, &id) in self.ids.iter().enumerate() {
            if id > 0 {
                out.entry(id).or_default().push(i);
            }
        }
        out
    }

    pub fn instance_count(&self) -> usize {
        self.instances().len()
    }

    pub fn select(&self, indices: &[usize]) -> InstanceSegmentation {
        Self {
            ids: indices.iter().map(|&i| self.ids[i]).collect(),
        }
    }

    /// True when both segmentations induce the same partition of points,
    /// i.e. they differ only by a relabeling of nonzero ids.
    pub fn same_partition(&self, other: &InstanceSegmentation) -> bool {
        if self.ids.len() != other.ids.len() {
            return false;
        }
        let mut fwd: BTreeMap<u32, u32> = BTreeMap::new();
        let mut bwd: BTreeMap<u32, u32> = BTreeMap::new();
        for (&a, &b) in self.ids.iter().zip(&other.ids) {
            if (a == 0) != (b == 0) {
                return false;
            }
            if a == 0 {
                continue;
            }
            if *fwd.entry(a).or_insert(b) != b || *bwd.entry(b).or_insert(a) != a {
                return false;
            }
        }
        true
    }
}

// ---------------------------------------------------------------------------
// Stages
// ---------------------------------------------------------------------------

/// Indices whose tree probability is strictly above `threshold`.
pub fn semantic_mask(preds: &PointPredictions, threshold: f64) -> Vec<usize> {
    preds
        .iter()
        .enumerate()
        .filter(|(_, p)| p.semantic_prob > threshold)
        .map(|(i, _)| i)
        .collect()
}

/// `coordinate + offset` for each masked point, in mask order.
pub fn shift_points(
    cloud: &LabeledPointCloud,
    preds: &PointPredictions,
    mask: &[usize],
) -> Vec<[f64; 3]> {
    mask.iter()
        .map(|&i| {
            let p = &cloud.points[i];
            let o = preds.get(i).offset;
            [p.x + o[0], p.y + o[1], p.z + o[2]]
        })
        .collect()
}

/// Scores candidates; a learned scorer can replace the default heuristic.
pub trait CandidateScorer: Sync {
    fn score(&self, candidate: &ClusterCandidate, preds: &PointPredictions) -> f64;
}

/// Mean tree probability over the candidate's members.
#[derive(Debug, Clone, Copy, Default)]
pub struct MeanProbabilityScorer;

impl CandidateScorer for MeanProbabilityScorer {
    fn score(&self, candidate: &ClusterCandidate, preds: &PointPredictions) -> f64 {
        if candidate.members.is_empty() {
            return 0.0;
        }
        let sum: f64 = candidate
            .members
            .iter()
            .map(|&i| preds.get(i).semantic_prob)
            .sum();
        sum / candidate.members.len() as f64
    }
}

/// Assigns scores in place. Scores are clamped to `[0, 1]`.
pub fn score_candidates(
    candidates: &mut [ClusterCandidate],
    preds: &PointPredictions,
    scorer: &dyn CandidateScorer,
) {
    for c in candidates {
        c.score = scorer.score(c, preds).clamp(0.0, 1.0);
    }
}

pub fn segment(
    cloud: &LabeledPointCloud,
    preds: &PointPredictions,
    config: &GroupingConfig,
) -> Result<InstanceSegmentation> {
    segment_with(cloud, preds, config, &MeanProbabilityScorer)
}

pub fn segment_with(
    cloud: &LabeledPointCloud,
    preds: &PointPredictions,
    config: &GroupingConfig,
    scorer: &dyn CandidateScorer,
) -> Result<InstanceSegmentation> {
    config.validate()?;
    preds.ensure_aligned(cloud)?;
    preds.validate()?;

    let mask = semantic_mask(preds, config.semantic_threshold);
    if mask.is_empty() {
        return Ok(InstanceSegmentation::unassigned(cloud.len()));
    }
    let shifted = shift_points(cloud, preds, &mask);
    let embeddings: Vec<Embedding> = mask.iter().map(|&i| preds.get(i).embedding).collect();

    let (rg, ms) = rayon::join(
        || region_grow(&shifted, config.rg_radius, config.rg_min_points),
        || mean_shift(&embeddings, config),
    );
    let mut candidates: Vec<ClusterCandidate> =
        rg?.into_iter().chain(ms?).map(|c| c.remap(&mask)).collect();
    score_candidates(&mut candidates, preds, scorer);
    Ok(nms(&candidates, config.nms_iou, cloud.len()))
}

/// The PTC-ready result of a segmentation: coordinates from `cloud`, the
/// semantic column from the gated predictions and the instance column from
/// `seg`.
pub fn prediction_cloud(
    cloud: &LabeledPointCloud,
    preds: &PointPredictions,
    seg: &InstanceSegmentation,
    threshold: f64,
) -> Result<LabeledPointCloud> {
    preds.ensure_aligned(cloud)?;
    if seg.len() != cloud.len() {
        return Err(Error::Misaligned {
            what: "segmentation",
            expected: cloud.len(),
            actual: seg.len(),
        });
    }
    let mut out = cloud.clone();
    for ((p, pred), &id) in out.points.iter_mut().zip(preds.iter()).zip(&seg.ids) {
        p.semantic = if id > 0 || pred.semantic_prob > threshold {
            Semantic::Tree
        } else {
            Semantic::NonTree
        };
        p.instance = id;
    }
    Ok(out)
}
