//! Independent reference implementations used as test oracles.
//!
//! Nothing here calls into the code paths it checks: matching is a plain
//! all-pairs scan over explicit point sets, components come from BFS over the
//! full O(n^2) adjacency.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use treekit_core::synthgen::ForestConfig;
use treekit_core::{LabeledPointCloud, PointRecord, Semantic};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn sets(ids: &[u32]) -> BTreeMap<u32, BTreeSet<usize>> {
    let mut out: BTreeMap<u32, BTreeSet<usize>> = BTreeMap::new();
    for (i, &id) in ids.iter().enumerate() {
        if id > 0 {
            out.entry(id).or_default().insert(i);
        }
    }
    out
}

/// (gt_id, pred_id, intersection, union) for every pair with IoU > 0.5.
pub fn brute_force_matches(gt: &[u32], pred: &[u32]) -> Vec<(u32, u32, usize, usize)> {
    let g = sets(gt);
    let p = sets(pred);
    let mut out = Vec::new();
    for (&gi, gs) in &g {
        for (&pi, ps) in &p {
            let inter = gs.intersection(ps).count();
            let union = gs.union(ps).count();
            if inter as f64 / union as f64 > 0.5 {
                out.push((gi, pi, inter, union));
            }
        }
    }
    out
}

/// Components (ascending member lists, ordered by smallest member) of the
/// graph joining points within `radius`, keeping those with >= `min_points`.
pub fn brute_force_components(pts: &[[f64; 3]], radius: f64, min_points: usize) -> Vec<Vec<usize>> {
    let n = pts.len();
    let r2 = radius * radius;
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut comp = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            for j in 0..n {
                if seen[j] {
                    continue;
                }
                let d2: f64 = (0..3).map(|k| (pts[i][k] - pts[j][k]).powi(2)).sum();
                if d2 <= r2 {
                    seen[j] = true;
                    comp.push(j);
                    queue.push_back(j);
                }
            }
        }
        comp.sort_unstable();
        if comp.len() >= min_points {
            out.push(comp);
        }
    }
    out
}

/// Random instance map over `n` points with up to `trees` ids, plus a
/// prediction derived from it by relabeling, splitting, merging and noise.
pub fn random_instance_maps(rng: &mut ChaCha8Rng, n: usize, trees: u32) -> (Vec<u32>, Vec<u32>) {
    let gt: Vec<u32> = (0..n)
        .map(|_| {
            if rng.random_bool(0.2) {
                0
            } else {
                rng.random_range(1..=trees)
            }
        })
        .collect();
    let relabel: Vec<u32> = (0..=trees)
        .map(|_| rng.random_range(1..=trees + 10))
        .collect();
    let noise = rng.random_range(0.0..0.6);
    let pred = gt
        .iter()
        .map(|&g| {
            if rng.random_bool(noise) {
                rng.random_range(0..=trees + 10)
            } else if g == 0 {
                0
            } else {
                relabel[g as usize]
            }
        })
        .collect();
    (gt, pred)
}

/// Random labeled cloud: clustered tree points and scattered ground.
pub fn random_cloud(rng: &mut ChaCha8Rng, n: usize) -> LabeledPointCloud {
    let w = rng.random_range(5.0..50.0);
    let h = rng.random_range(5.0..50.0);
    let points = (0..n)
        .map(|_| {
            let x = rng.random_range(0.0..w);
            let y = rng.random_range(0.0..h);
            if rng.random_bool(0.4) {
                PointRecord::tree(x, y, rng.random_range(0.0..30.0), rng.random_range(1..8))
            } else {
                PointRecord::new(x, y, rng.random_range(-0.5..0.5), Semantic::NonTree, 0)
            }
        })
        .collect();
    LabeledPointCloud::new(points)
}

pub fn pairwise_distances_preserved(
    a: &LabeledPointCloud,
    b: &LabeledPointCloud,
    rel: f64,
) -> bool {
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            let d = |c: &LabeledPointCloud| {
                let (p, q) = (c.points[i].xyz(), c.points[j].xyz());
                ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt()
            };
            let (da, db) = (d(a), d(b));
            if (da - db).abs() > rel * da.max(1e-300) {
                return false;
            }
        }
    }
    true
}

/// z extent per instance id.
pub fn instance_heights(cloud: &LabeledPointCloud) -> BTreeMap<u32, f64> {
    let mut r: BTreeMap<u32, (f64, f64)> = BTreeMap::new();
    for p in &cloud.points {
        if p.instance > 0 {
            let e = r.entry(p.instance).or_insert((p.z, p.z));
            e.0 = e.0.min(p.z);
            e.1 = e.1.max(p.z);
        }
    }
    r.into_iter().map(|(k, (lo, hi))| (k, hi - lo)).collect()
}

/// Forest whose spacing clears 2 * max crown radius + 2 * region-growing radius (0.5 m).
pub fn separated_forest(n_trees: usize, seed: u64) -> ForestConfig {
    ForestConfig {
        plot_size: 60.0,
        n_trees,
        min_spacing: 8.0,
        height_range: [6.0, 28.0],
        crown_radius_range: [1.5, 3.0],
        points_per_tree: 300,
        ground_points: 4000,
        seed,
    }
}
