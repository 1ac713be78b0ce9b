//! Acceptance criteria. Each test prints one PASS/FAIL line and asserts it.
//!
//! Run with `cargo test -p treekit-core --test acceptance -- --test-threads 1`
//! for an ordered report.

mod common;

use std::io::Write;
use std::time::Instant;

use rand::Rng;
use treekit_core::augment::{self, AugmentConfig};
use treekit_core::evaluate::{self, compute_ce, match_instances, CeInput, TreeMetrics};
use treekit_core::geometry::hull_area_xy;
use treekit_core::grouping::{self, GroupingConfig};
use treekit_core::io::format_ptc;
use treekit_core::sparsify::{sparsify, sparsify_indices};
use treekit_core::synthgen::{self, ForestConfig, OracleNoise};
use treekit_core::{geometry::AreaMode, InstanceSegmentation, LabeledPointCloud};

/// Written to the raw stderr handle so the line shows up even when the
/// harness captures output.
fn report(line: &str) {
    let _ = writeln!(std::io::stderr(), "{line}");
}

fn verdict(id: u32, name: &str, ok: bool, detail: &str) {
    report(&format!(
        "[{}] criterion {id}: {name} ({detail})",
        if ok { "PASS" } else { "FAIL" }
    ));
    assert!(ok, "criterion {id} failed: {detail}");
}

// ---------------------------------------------------------------------------
// 1. Computational efficiency table
// ---------------------------------------------------------------------------

/// (MB, cores, minutes, printed CE)
const CE_TABLE: [(f64, f64, f64, f64); 8] = [
    (11264.0, 64.0, 403.12, 0.44),
    (5120.0, 64.0, 309.51, 0.26),
    (1638.0, 64.0, 49.13, 0.52),
    (480.0, 64.0, 57.88, 0.13),
    (1331.0, 64.0, 48.92, 0.42),
    (300.0, 200.0, 101.0, 0.015),
    (8212.5, 200.0, 1245.0, 0.033),
    (13487.5, 200.0, 1370.0, 0.05),
];

#[test]
fn criterion_1_ce_table() {
    let mut failures = Vec::new();
    for (mb, cores, minutes, expected) in CE_TABLE {
        let tol = if cores == 200.0 { 0.0005 } else { 0.005 };
        let ce = compute_ce(CeInput::new(mb, cores, minutes)).unwrap();
        let ok = (ce - expected).abs() <= tol;
        report(&format!(
            "    CE({mb} MB, {cores} cores, {minutes} min) = {ce:.5}, printed {expected} ± {tol}: {}",
            if ok { "ok" } else { "OUT OF TOLERANCE" }
        ));
        if !ok {
            failures.push(format!("{mb} MB row: {ce:.5} vs {expected}±{tol}"));
        }
    }
    verdict(
        1,
        "CE reproduces every computational-efficiency row",
        failures.is_empty(),
        &if failures.is_empty() {
            "8/8 rows".to_string()
        } else {
            failures.join("; ")
        },
    );
}

// ---------------------------------------------------------------------------
// 2. Matching vs brute force
// ---------------------------------------------------------------------------

#[test]
fn criterion_2_matching_oracle() {
    let t = Instant::now();
    let mut rng = common::rng(2);
    let mut mismatches = 0;
    let mut duplicates = 0;
    let mut total_matches = 0;
    for _ in 0..200 {
        let n = rng.random_range(1..=5000);
        let trees = rng.random_range(1..=50);
        let (gt, pred) = common::random_instance_maps(&mut rng, n, trees);
        let z: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..30.0)).collect();
        let fast = match_instances(
            &InstanceSegmentation::new(gt.clone()),
            &InstanceSegmentation::new(pred.clone()),
            &z,
        )
        .unwrap();
        let slow = common::brute_force_matches(&gt, &pred);
        let fast_key: Vec<(u32, u32, f64)> =
            fast.iter().map(|m| (m.gt_id, m.pred_id, m.iou)).collect();
        let slow_key: Vec<(u32, u32, f64)> = slow
            .iter()
            .map(|&(g, p, i, u)| (g, p, i as f64 / u as f64))
            .collect();
        if fast_key != slow_key {
            mismatches += 1;
        }
        let mut g: Vec<u32> = fast.iter().map(|m| m.gt_id).collect();
        let mut p: Vec<u32> = fast.iter().map(|m| m.pred_id).collect();
        g.sort_unstable();
        p.sort_unstable();
        let before = g.len() + p.len();
        g.dedup();
        p.dedup();
        duplicates += before - g.len() - p.len();
        total_matches += fast.len();
    }
    let elapsed = t.elapsed();
    verdict(
        2,
        "matching equals brute-force IoU scan, ids matched at most once",
        mismatches == 0 && duplicates == 0 && total_matches > 0 && elapsed.as_secs_f64() < 10.0,
        &format!("200 maps, {total_matches} matches, {mismatches} mismatches, {duplicates} duplicate ids, {elapsed:.2?}"),
    );
}

// ---------------------------------------------------------------------------
// 3. Metric identities and the merged-tree boundary
// ---------------------------------------------------------------------------

#[test]
fn criterion_3_metric_identities() {
    let mut rng = common::rng(3);
    let mut broken = 0;
    for _ in 0..1000 {
        let gt = rng.random_range(1..=200);
        let tp = rng.random_range(0..=gt);
        let pt = rng.random_range(tp.max(1)..=tp + 200);
        let m = TreeMetrics::from_counts(tp, gt, pt).unwrap();
        if m.recall.to_bits() != m.detection_rate.to_bits()
            || m.commission_rate.to_bits() != (1.0 - m.precision).to_bits()
        {
            broken += 1;
        }
    }
    let gt = InstanceSegmentation::new([vec![1; 10], vec![2; 10]].concat());
    let merged = InstanceSegmentation::new(vec![1; 20]);
    let boundary = match_instances(&gt, &merged, &[0.0; 20]).unwrap();
    verdict(
        3,
        "recall == detection, commission == 1 - precision, IoU 0.5 is a non-match",
        broken == 0 && boundary.is_empty(),
        &format!(
            "1000 count draws, {broken} identity failures, merged-tree matches {}",
            boundary.len()
        ),
    );
}

// ---------------------------------------------------------------------------
// 4. End-to-end zero-noise oracle
// ---------------------------------------------------------------------------

#[test]
fn criterion_4_end_to_end_oracle() {
    let t = Instant::now();
    let grouping = GroupingConfig::default();
    let cfg0 = common::separated_forest(25, 0);
    assert!(cfg0.min_spacing > 2.0 * cfg0.crown_radius_range[1] + 2.0 * grouping.rg_radius);
    let mut failures = Vec::new();
    for seed in 0..10u64 {
        let cloud = synthgen::generate_forest(&common::separated_forest(25, seed)).unwrap();
        let preds = synthgen::oracle_predictions(&cloud, &OracleNoise::none(), seed).unwrap();
        let seg = grouping::segment(&cloud, &preds, &grouping).unwrap();
        let r = evaluate::evaluate(
            &InstanceSegmentation::from_cloud(&cloud),
            &seg,
            &cloud.z(),
            5.0,
        )
        .unwrap();
        let ok = r.counts.gt == 25
            && r.detection_rate == 1.0
            && r.omission_rate == 0.0
            && r.commission_rate == 0.0
            && r.f1_tree == 1.0
            && r.rmse_h_m == Some(0.0);
        if !ok {
            failures.push(format!("seed {seed}: {r:?}"));
        }
    }
    let elapsed = t.elapsed();
    verdict(
        4,
        "25-tree zero-noise forest is recovered exactly",
        failures.is_empty() && elapsed.as_secs_f64() < 60.0,
        &format!(
            "10 seeds, {} failures, {elapsed:.2?} {}",
            failures.len(),
            failures.join(" | ")
        ),
    );
}

// ---------------------------------------------------------------------------
// 5. Sparsifier contract
// ---------------------------------------------------------------------------

#[test]
fn criterion_5_sparsifier_contract() {
    let t = Instant::now();
    let mut rng = common::rng(5);
    let mut problems = Vec::new();
    for trial in 0..100 {
        let n = rng.random_range(50..2000);
        let cloud = common::random_cloud(&mut rng, n);
        let area = hull_area_xy(&cloud).unwrap();
        let source = n as f64 / area;
        let target = source * rng.random_range(0.05..0.95);
        if target * area < 1.0 {
            continue;
        }
        let seed = rng.random::<u64>();
        let out = sparsify(&cloud, target, seed).unwrap();
        let achieved = out.len() as f64 / area;
        if (achieved - target).abs() > 1.0 / area {
            problems.push(format!("trial {trial}: density {achieved} vs {target}"));
        }
        let idx = sparsify_indices(&cloud, target, seed, AreaMode::ConvexHull).unwrap();
        let subset = idx.windows(2).all(|w| w[0] < w[1])
            && idx.len() == out.len()
            && idx
                .iter()
                .zip(&out.points)
                .all(|(&i, p)| cloud.points[i].bit_eq(p));
        if !subset {
            problems.push(format!("trial {trial}: subset property"));
        }
        let labels = |c: &LabeledPointCloud| {
            let mut v: Vec<(u8, u32)> = c
                .points
                .iter()
                .map(|p| (p.semantic.code(), p.instance))
                .collect();
            v.sort_unstable();
            v
        };
        let (mut src, dst) = (labels(&cloud), labels(&out));
        for l in dst {
            match src.binary_search(&l) {
                Ok(pos) => {
                    src.remove(pos);
                }
                Err(_) => {
                    problems.push(format!("trial {trial}: label {l:?} not in source"));
                    break;
                }
            }
        }
        let again = sparsify(&cloud, target, seed).unwrap();
        if format_ptc(&again) != format_ptc(&out) {
            problems.push(format!("trial {trial}: not byte-identical"));
        }
    }
    let elapsed = t.elapsed();
    verdict(
        5,
        "density within 1/area, subset, labels preserved, seed-reproducible",
        problems.is_empty() && elapsed.as_secs_f64() < 10.0,
        &format!("100 clouds, {elapsed:.2?} {}", problems.join("; ")),
    );
}

// ---------------------------------------------------------------------------
// 6. Augmentation invariants
// ---------------------------------------------------------------------------

#[test]
fn criterion_6_augmentation_invariants() {
    let t = Instant::now();
    let mut rng = common::rng(6);
    let mut problems = Vec::new();
    for trial in 0..20u64 {
        let cloud = common::random_cloud(&mut rng, 150);
        let rotated = augment::rotate_z(&cloud, 180.0, trial).unwrap();
        if !common::pairwise_distances_preserved(&cloud, &rotated, 1e-9) {
            problems.push(format!("rotation {trial} not isometric"));
        }
        let axes = [trial % 2 == 0, trial % 3 == 0];
        let reflected = augment::reflect_axes(&cloud, axes);
        if !common::pairwise_distances_preserved(&cloud, &reflected, 1e-9) {
            problems.push(format!("reflection {trial} not isometric"));
        }
        let random_reflect = augment::reflect(&cloud, [0.5, 0.5], trial).unwrap();
        if !common::pairwise_distances_preserved(&cloud, &random_reflect, 1e-9) {
            problems.push(format!("random reflection {trial} not isometric"));
        }

        let s = augment::draw_scales([0.9, 1.1], trial).unwrap();
        let scaled = augment::scale_aniso(&cloud, [0.9, 1.1], trial).unwrap();
        let (h0, h1) = (
            common::instance_heights(&cloud),
            common::instance_heights(&scaled),
        );
        for (id, h) in &h0 {
            if (h1[id] - s[2] * h).abs() > 1e-12 * h.max(1.0) {
                problems.push(format!("instance {id} height {} vs {}", h1[id], s[2] * h));
            }
        }
    }

    let cloud = common::random_cloud(&mut rng, 500);
    let identity = augment::augment(&cloud, &AugmentConfig::identity())
        .unwrap()
        .bit_eq(&cloud)
        && augment::jitter(&cloud, 0.0, 1).unwrap().bit_eq(&cloud)
        && augment::rotate_z(&cloud, 0.0, 1).unwrap().bit_eq(&cloud)
        && augment::scale_aniso(&cloud, [1.0, 1.0], 1)
            .unwrap()
            .bit_eq(&cloud)
        && augment::reflect(&cloud, [0.0, 0.0], 1)
            .unwrap()
            .bit_eq(&cloud);
    if !identity {
        problems.push("identity config changed the cloud".into());
    }

    let big = LabeledPointCloud::new(
        (0..100_000)
            .map(|i| treekit_core::PointRecord::ground((i % 317) as f64, (i / 317) as f64, 0.0))
            .collect(),
    );
    let jittered = augment::jitter(&big, 0.01, 66).unwrap();
    for axis in 0..3 {
        let d: Vec<f64> = big
            .points
            .iter()
            .zip(&jittered.points)
            .map(|(a, b)| b.xyz()[axis] - a.xyz()[axis])
            .collect();
        let mean = d.iter().sum::<f64>() / d.len() as f64;
        let std = (d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (d.len() - 1) as f64).sqrt();
        report(&format!("    jitter axis {axis}: std {std:.6}"));
        if !(0.0098..=0.0102).contains(&std) {
            problems.push(format!("jitter axis {axis} std {std}"));
        }
    }
    let elapsed = t.elapsed();
    verdict(
        6,
        "isometries, z-height scaling, identity no-ops, jitter std",
        problems.is_empty() && elapsed.as_secs_f64() < 10.0,
        &format!("{elapsed:.2?} {}", problems.join("; ")),
    );
}

// ---------------------------------------------------------------------------
// 7. Degradation with density
// ---------------------------------------------------------------------------

/// Noisy oracle fixed for the sweep. Embedding noise equals the default
/// bandwidth; without it the embedding clustering is density-independent.
const SWEEP_NOISE: OracleNoise = OracleNoise {
    offset_sigma: 0.5,
    embedding_sigma: 0.6,
    semantic_flip_prob: 0.05,
};

fn sweep_forest(seed: u64) -> ForestConfig {
    ForestConfig {
        plot_size: 30.0,
        n_trees: 9,
        min_spacing: 8.0,
        height_range: [6.0, 28.0],
        crown_radius_range: [1.5, 3.0],
        points_per_tree: 300,
        ground_points: 132_000,
        seed,
    }
}

#[test]
fn criterion_7_density_degradation() {
    let t = Instant::now();
    let grouping = GroupingConfig::default();
    let levels: [Option<f64>; 3] = [None, Some(100.0), Some(10.0)];
    let mut detection = [0.0; 3];
    let mut omission = [0.0; 3];
    let mut full_density = f64::INFINITY;
    for seed in 0..10u64 {
        let cloud = synthgen::generate_forest(&sweep_forest(seed)).unwrap();
        full_density = full_density.min(
            treekit_core::geometry::point_density(&cloud)
                .unwrap()
                .density_pts_m2,
        );
        for (k, level) in levels.iter().enumerate() {
            let c = match level {
                None => cloud.clone(),
                Some(d) => sparsify(&cloud, *d, seed).unwrap(),
            };
            let preds = synthgen::oracle_predictions(&c, &SWEEP_NOISE, 1000 + seed).unwrap();
            let seg = grouping::segment(&c, &preds, &grouping).unwrap();
            let r = evaluate::evaluate(&InstanceSegmentation::from_cloud(&c), &seg, &c.z(), 5.0)
                .unwrap();
            detection[k] += r.detection_rate / 10.0;
            omission[k] += r.omission_rate / 10.0;
        }
    }
    let non_increasing = detection[0] >= detection[1] && detection[1] >= detection[2];
    let rise_100 = omission[1] - omission[0];
    let rise_10 = omission[2] - omission[1];
    let largest_at_10 = rise_10 > rise_100;
    let elapsed = t.elapsed();
    verdict(
        7,
        "mean detection non-increasing over {full, 100, 10} pts/m², largest omission rise at 10",
        full_density > 100.0 && non_increasing && largest_at_10 && elapsed.as_secs_f64() < 300.0,
        &format!(
            "full >= {full_density:.0} pts/m²; detection {detection:.3?}; omission {omission:.3?}; {elapsed:.2?}"
        ),
    );
}

// ---------------------------------------------------------------------------
// 8. Clustering oracles
// ---------------------------------------------------------------------------

#[test]
fn criterion_8_clustering_oracles() {
    let t = Instant::now();
    let mut rng = common::rng(8);
    let mut rg_mismatch = 0;
    for _ in 0..50 {
        let n = rng.random_range(1..=2000);
        let clusters = rng.random_range(1..20);
        let centers: Vec<[f64; 3]> = (0..clusters)
            .map(|_| std::array::from_fn(|_| rng.random_range(-20.0..20.0)))
            .collect();
        let spread = rng.random_range(0.2..3.0);
        let pts: Vec<[f64; 3]> = (0..n)
            .map(|_| {
                let c = centers[rng.random_range(0..clusters)];
                std::array::from_fn(|k| c[k] + rng.random_range(-spread..spread))
            })
            .collect();
        let radius = rng.random_range(0.1..1.5);
        let min_points = rng.random_range(1..6);
        let fast: Vec<Vec<usize>> = grouping::region_grow(&pts, radius, min_points)
            .unwrap()
            .into_iter()
            .map(|c| c.members)
            .collect();
        if fast != common::brute_force_components(&pts, radius, min_points) {
            rg_mismatch += 1;
        }
    }

    let mut ms_failures = Vec::new();
    let config = GroupingConfig {
        ms_bandwidth: 1.0,
        ..Default::default()
    };
    let normal = rand_distr::Normal::new(0.0, 0.1).unwrap();
    for k in [1usize, 2, 5] {
        let mut data = Vec::new();
        let mut truth = Vec::new();
        for blob in 0..k {
            for _ in 0..50 {
                let mut e: [f64; 5] = std::array::from_fn(|_| rng.sample(normal));
                e[blob] += 10.0;
                data.push(e);
                truth.push(blob);
            }
        }
        let cands = grouping::mean_shift(&data, &config).unwrap();
        let mut got: Vec<Vec<usize>> = cands.into_iter().map(|c| c.members).collect();
        got.sort();
        let mut want: Vec<Vec<usize>> = (0..k)
            .map(|b| (0..data.len()).filter(|&i| truth[i] == b).collect())
            .collect();
        want.sort();
        if got != want {
            ms_failures.push(format!("k={k}: {} clusters", got.len()));
        }
    }
    let elapsed = t.elapsed();
    verdict(
        8,
        "region growing equals brute-force components; mean shift recovers k blobs",
        rg_mismatch == 0 && ms_failures.is_empty() && elapsed.as_secs_f64() < 30.0,
        &format!(
            "50 point sets, {rg_mismatch} mismatches; {} ; {elapsed:.2?}",
            ms_failures.join(", ")
        ),
    );
}
