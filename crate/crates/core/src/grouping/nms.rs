//! Greedy non-maximum suppression over point-set candidates.

use std::cmp::Ordering;
use std::collections::HashMap;

use super::{ClusterCandidate, InstanceSegmentation};

/// IoU of two ascending, duplicate-free index lists. Two empty lists give 0.
pub fn sorted_iou(a: &[usize], b: &[usize]) -> f64 {
    let (mut i, mut j, mut inter) = (0, 0, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                inter += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Total order: score descending, then size descending, then lowest first
/// member, then source.
fn priority(a: &ClusterCandidate, b: &ClusterCandidate) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(b.members.len().cmp(&a.members.len()))
        .then(a.members.first().cmp(&b.members.first()))
        .then(a.source.cmp(&b.source))
        .then(a.members.cmp(&b.members))
}

/// Greedy selection: indices into `candidates` of the accepted ones, in
/// acceptance order.
///
/// A candidate is accepted iff its IoU with every accepted candidate is at
/// most `iou_threshold`. Empty candidates are never accepted. Members must be
/// below `n_points`.
pub fn nms_select(
    candidates: &[ClusterCandidate],
    iou_threshold: f64,
    n_points: usize,
) -> Vec<usize> {
    let mut order: Vec<usize> = (0..candidates.len())
        .filter(|&i| !candidates[i].is_empty())
        .collect();
    order.sort_by(|&a, &b| priority(&candidates[a], &candidates[b]));

    // accepted candidates containing each point, for overlap tallies
    let mut covering: Vec<Vec<u32>> = vec![Vec::new(); n_points];
    let mut accepted: Vec<usize> = Vec::new();
    for i in order {
        let cand = &candidates[i];
        let mut overlap: HashMap<u32, usize> = HashMap::new();
        for &m in &cand.members {
            for &k in &covering[m] {
                *overlap.entry(k).or_default() += 1;
            }
        }
        let suppressed = overlap.iter().any(|(&k, &inter)| {
            let union = candidates[accepted[k as usize]].len() + cand.len() - inter;
            inter as f64 / union as f64 > iou_threshold
        });
        if suppressed {
            continue;
        }
        let k = accepted.len() as u32;
        for &m in &cand.members {
            covering[m].push(k);
        }
        accepted.push(i);
    }
    accepted
}

/// Greedy NMS producing a segmentation of `n_points` points.
///
/// Each point goes to the first accepted candidate (in acceptance order, so
/// the highest-priority one) containing it. Ids are `1..=k` in acceptance
/// order, skipping accepted candidates left without points.
pub fn nms(
    candidates: &[ClusterCandidate],
    iou_threshold: f64,
    n_points: usize,
) -> InstanceSegmentation {
    let mut ids = vec![0u32; n_points];
    let mut next = 0u32;
    for i in nms_select(candidates, iou_threshold, n_points) {
        let mut claimed = false;
        for &m in &candidates[i].members {
            if ids[m] == 0 {
                if !claimed {
                    next += 1;
                    claimed = true;
                }
                ids[m] = next;
            }
        }
    }
    InstanceSegmentation::new(ids)
}
