use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grouping::InstanceSegmentation;

/// A pair counts as a detection only above this IoU (strict).
pub const MATCH_IOU: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub gt_id: u32,
    pub pred_id: u32,
    pub iou: f64,
    /// Shared points.
    pub intersection: usize,
    pub gt_size: usize,
    pub pred_size: usize,
    /// max z - min z over the ground-truth instance.
    pub gt_height: f64,
    pub pred_height: f64,
}

impl MatchRecord {
    /// Point-level F1 of the pair: precision over the predicted set, recall
    /// over the ground-truth set.
    pub fn point_f1(&self) -> f64 {
        let precision = self.intersection as f64 / self.pred_size as f64;
        let recall = self.intersection as f64 / self.gt_size as f64;
        if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        }
    }
}

pub fn instance_iou(a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> Result<f64> {
    if a.is_empty() && b.is_empty() {
        return Err(Error::Undefined("IoU of two empty sets is undefined"));
    }
    let inter = a.intersection(b).count();
    Ok(inter as f64 / (a.len() + b.len() - inter) as f64)
}

/// Height (z extent) of every nonzero instance.
pub fn instance_heights(seg: &InstanceSegmentation, z: &[f64]) -> Result<BTreeMap<u32, f64>> {
    if z.len() != seg.len() {
        return Err(Error::Misaligned {
            what: "point heights",
            expected: seg.len(),
            actual: z.len(),
        });
    }
    let mut range: BTreeMap<u32, (f64, f64)> = BTreeMap::new();
    for (&id, &h) in seg.ids.iter().zip(z) {
        if id == 0 {
            continue;
        }
        let r = range.entry(id).or_insert((h, h));
        r.0 = r.0.min(h);
        r.1 = r.1.max(h);
    }
    Ok(range
        .into_iter()
        .map(|(id, (lo, hi))| (id, hi - lo))
        .collect())
}

/// All (gt, pred) instance pairs with IoU > 0.5, ordered by gt id.
///
/// Built from one pass over the points into a contingency table, so the cost
/// is linear in the number of points. Id 0 is ignored on both sides. `z`
/// gives point heights for the height fields.
pub fn match_instances(
    gt: &InstanceSegmentation,
    pred: &InstanceSegmentation,
    z: &[f64],
) -> Result<Vec<MatchRecord>> {
    if pred.len() != gt.len() {
        return Err(Error::Misaligned {
            what: "predicted instances",
            expected: gt.len(),
            actual: pred.len(),
        });
    }
    let gt_heights = instance_heights(gt, z)?;
    let pred_heights = instance_heights(pred, z)?;

    let mut gt_size: HashMap<u32, usize> = HashMap::new();
    let mut pred_size: HashMap<u32, usize> = HashMap::new();
    let mut table: HashMap<(u32, u32), usize> = HashMap::new();
    for (&g, &p) in gt.ids.iter().zip(&pred.ids) {
        if g > 0 {
            *gt_size.entry(g).or_default() += 1;
        }
        if p > 0 {
            *pred_size.entry(p).or_default() += 1;
        }
        if g > 0 && p > 0 {
            *table.entry((g, p)).or_default() += 1;
        }
    }

    let mut matches: Vec<MatchRecord> = table
        .into_iter()
        .filter_map(|((g, p), inter)| {
            let (sg, sp) = (gt_size[&g], pred_size[&p]);
            let iou = inter as f64 / (sg + sp - inter) as f64;
            (iou > MATCH_IOU).then(|| MatchRecord {
                gt_id: g,
                pred_id: p,
                iou,
                intersection: inter,
                gt_size: sg,
                pred_size: sp,
                gt_height: gt_heights[&g],
                pred_height: pred_heights[&p],
            })
        })
        .collect();
    matches.sort_by_key(|m| (m.gt_id, m.pred_id));
    Ok(matches)
}
