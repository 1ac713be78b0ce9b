//! Tree-level evaluation of an instance segmentation against ground truth.
//!
//! A predicted instance detects a ground-truth tree when their point-level
//! IoU is strictly greater than 0.5. Because two sets cannot both exceed 0.5
//! IoU with a third, this matching is one-to-one without any assignment step.
//! From the matches:
//!
//! - detection = TP / GT, omission = FN / GT, commission = FP / PT
//! - precision = TP / (TP + FP), recall = TP / (TP + FN), F1 on those
//! - RMSE of tree height (max z - min z) over matched pairs
//! - a point-level F1 averaged over matched pairs
//! - detection rate per ground-truth height bin
//!
//! Degenerate conventions: with no predictions, precision, commission and F1
//! are 0; height RMSE and the matched-pair F1 are absent without matches.

mod ce;
mod matching;

use serde::{Deserialize, Serialize};

pub use ce::{compute_ce, CeInput};
pub use matching::{instance_heights, instance_iou, match_instances, MatchRecord, MATCH_IOU};

use crate::error::{Error, Result};
use crate::grouping::InstanceSegmentation;

pub const DEFAULT_BIN_HEIGHT: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub gt: usize,
    pub pt: usize,
}

/// Counts plus the rate and F1 fields derived from them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeMetrics {
    pub counts: Counts,
    pub detection_rate: f64,
    pub omission_rate: f64,
    pub commission_rate: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1_tree: f64,
}

impl TreeMetrics {
    /// Rates from raw counts. `tp <= gt`, `tp <= pt` and `gt > 0` are required.
    pub fn from_counts(tp: usize, gt: usize, pt: usize) -> Result<Self> {
        if gt == 0 {
            return Err(Error::Undefined(
                "tree metrics are undefined without ground-truth trees",
            ));
        }
        if tp > gt || tp > pt {
            return Err(Error::param(format!(
                "inconsistent counts: tp {tp}, gt {gt}, pt {pt}"
            )));
        }
        let fn_ = gt - tp;
        let fp = pt - tp;
        let detection_rate = tp as f64 / gt as f64;
        let omission_rate = fn_ as f64 / gt as f64;
        let recall = tp as f64 / (tp + fn_) as f64;
        // commission is the complement of precision whenever PT > 0
        let (precision, commission_rate) = if pt == 0 {
            (0.0, 0.0)
        } else {
            let precision = tp as f64 / (tp + fp) as f64;
            (precision, 1.0 - precision)
        };
        let f1_tree = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Ok(Self {
            counts: Counts {
                tp,
                fp,
                fn_,
                gt,
                pt,
            },
            detection_rate,
            omission_rate,
            commission_rate,
            precision,
            recall,
            f1_tree,
        })
    }
}

pub fn tree_metrics(
    matches: &[MatchRecord],
    gt: &InstanceSegmentation,
    pred: &InstanceSegmentation,
) -> Result<TreeMetrics> {
    TreeMetrics::from_counts(matches.len(), gt.instance_count(), pred.instance_count())
}

/// Root mean squared height difference over matched pairs.
pub fn rmse_height(matches: &[MatchRecord]) -> Result<f64> {
    if matches.is_empty() {
        return Err(Error::NoMatches("height RMSE"));
    }
    let sum: f64 = matches
        .iter()
        .map(|m| (m.gt_height - m.pred_height).powi(2))
        .sum();
    Ok((sum / matches.len() as f64).sqrt())
}

/// Mean over matched pairs of the point-level F1 between the two instances.
pub fn local_f1(matches: &[MatchRecord]) -> Result<f64> {
    if matches.is_empty() {
        return Err(Error::NoMatches("matched-tree F1"));
    }
    let sum: f64 = matches.iter().map(MatchRecord::point_f1).sum();
    Ok(sum / matches.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeightBin {
    pub bin_low: f64,
    pub bin_high: f64,
    pub n_gt: usize,
    pub n_tp: usize,
    pub detection_rate: f64,
}

/// Detection rate per ground-truth height bin `[k*h, (k+1)*h)`.
///
/// `z` supplies point heights aligned with `gt`. Bins without ground-truth
/// trees are omitted.
pub fn height_bin_report(
    gt: &InstanceSegmentation,
    z: &[f64],
    matches: &[MatchRecord],
    bin_height: f64,
) -> Result<Vec<HeightBin>> {
    if !(bin_height.is_finite() && bin_height > 0.0) {
        return Err(Error::param(format!(
            "bin height must be positive, got {bin_height}"
        )));
    }
    let heights = instance_heights(gt, z)?;
    let matched: std::collections::HashSet<u32> = matches.iter().map(|m| m.gt_id).collect();
    let mut bins: std::collections::BTreeMap<i64, (usize, usize)> = Default::default();
    for (id, h) in heights {
        let k = (h / bin_height).floor() as i64;
        let slot = bins.entry(k).or_default();
        slot.0 += 1;
        if matched.contains(&id) {
            slot.1 += 1;
        }
    }
    Ok(bins
        .into_iter()
        .map(|(k, (n_gt, n_tp))| HeightBin {
            bin_low: k as f64 * bin_height,
            bin_high: (k + 1) as f64 * bin_height,
            n_gt,
            n_tp,
            detection_rate: n_tp as f64 / n_gt as f64,
        })
        .collect())
}

/// Everything reported for one (ground truth, prediction) pair.
///
/// Serializes to the report JSON layout: `counts{tp,fp,fn,gt,pt}`, the rate
/// fields, `f1_local` and `rmse_h_m` (null without matches) and `per_bin`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub counts: Counts,
    pub detection_rate: f64,
    pub omission_rate: f64,
    pub commission_rate: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1_tree: f64,
    pub f1_local: Option<f64>,
    pub rmse_h_m: Option<f64>,
    pub per_bin: Vec<HeightBin>,
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Matches `pred` against `gt` and computes the full report.
pub fn evaluate(
    gt: &InstanceSegmentation,
    pred: &InstanceSegmentation,
    z: &[f64],
    bin_height: f64,
) -> Result<MetricsReport> {
    let matches = match_instances(gt, pred, z)?;
    let t = tree_metrics(&matches, gt, pred)?;
    Ok(MetricsReport {
        counts: t.counts,
        detection_rate: t.detection_rate,
        omission_rate: t.omission_rate,
        commission_rate: t.commission_rate,
        precision: t.precision,
        recall: t.recall,
        f1_tree: t.f1_tree,
        f1_local: local_f1(&matches).ok(),
        rmse_h_m: rmse_height(&matches).ok(),
        per_bin: height_bin_report(gt, z, &matches, bin_height)?,
    })
}
