//! Per-density evaluation sweep.

use anyhow::{bail, Result};
use rayon::prelude::*;
use serde::Serialize;
use treekit_core::evaluate::MetricsReport;
use treekit_core::geometry::{plot_area, AreaMode};
use treekit_core::grouping::GroupingConfig;
use treekit_core::seed;
use treekit_core::sparsify::{series_seed, sparsify_indices};
use treekit_core::synthgen::{oracle_predictions, OracleNoise};
use treekit_core::{Error, LabeledPointCloud, PointPredictions};

use crate::pipeline::segment_and_evaluate;

/// Where each sparsified cloud gets its predictions from.
pub enum PredictionSource {
    /// Predictions aligned with the full cloud; rows take the kept subset.
    File(PointPredictions),
    /// Synthetic oracle run on each sparsified cloud.
    Oracle(OracleNoise),
}

/// One CSV row. Metric columns are empty for failed rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub density: f64,
    pub status: &'static str,
    pub seed: u64,
    pub n_points: Option<usize>,
    pub achieved_density: Option<f64>,
    pub tp: Option<usize>,
    pub fp: Option<usize>,
    #[serde(rename = "fn")]
    pub fn_: Option<usize>,
    pub gt: Option<usize>,
    pub pt: Option<usize>,
    pub detection_rate: Option<f64>,
    pub omission_rate: Option<f64>,
    pub commission_rate: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1_tree: Option<f64>,
    pub f1_local: Option<f64>,
    pub rmse_h_m: Option<f64>,
    pub error: Option<String>,
}

impl SweepRow {
    fn failed(density: f64, seed: u64, err: &anyhow::Error) -> Self {
        SweepRow {
            density,
            status: "failed",
            seed,
            n_points: None,
            achieved_density: None,
            tp: None,
            fp: None,
            fn_: None,
            gt: None,
            pt: None,
            detection_rate: None,
            omission_rate: None,
            commission_rate: None,
            precision: None,
            recall: None,
            f1_tree: None,
            f1_local: None,
            rmse_h_m: None,
            error: Some(format!("{err:#}")),
        }
    }

    fn ok(density: f64, seed: u64, n_points: usize, area: f64, r: &MetricsReport) -> Self {
        SweepRow {
            density,
            status: "ok",
            seed,
            n_points: Some(n_points),
            achieved_density: Some(n_points as f64 / area),
            tp: Some(r.counts.tp),
            fp: Some(r.counts.fp),
            fn_: Some(r.counts.fn_),
            gt: Some(r.counts.gt),
            pt: Some(r.counts.pt),
            detection_rate: Some(r.detection_rate),
            omission_rate: Some(r.omission_rate),
            commission_rate: Some(r.commission_rate),
            precision: Some(r.precision),
            recall: Some(r.recall),
            f1_tree: Some(r.f1_tree),
            f1_local: r.f1_local,
            rmse_h_m: r.rmse_h_m,
            error: None,
        }
    }
}

/// Sparsifies `cloud` to each density, segments and evaluates against its
/// own labels. Row `i` uses seed `seed ^ i`; failures are recorded in the row
/// and the sweep continues.
pub fn sweep_densities(
    cloud: &LabeledPointCloud,
    source: &PredictionSource,
    densities: &[f64],
    config: &GroupingConfig,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    if densities.is_empty() {
        bail!(Error::InvalidParameter("density list is empty".into()));
    }
    if let PredictionSource::File(p) = source {
        p.ensure_aligned(cloud)?;
    }
    config.validate()?;
    let area = plot_area(cloud, AreaMode::ConvexHull)?;
    Ok(densities
        .par_iter()
        .enumerate()
        .map(|(i, &d)| {
            let row_seed = series_seed(seed, i);
            run_row(cloud, source, d, row_seed, config)
                .map(|(n, r)| SweepRow::ok(d, row_seed, n, area, &r))
                .unwrap_or_else(|e| SweepRow::failed(d, row_seed, &e))
        })
        .collect())
}

fn run_row(
    cloud: &LabeledPointCloud,
    source: &PredictionSource,
    density: f64,
    row_seed: u64,
    config: &GroupingConfig,
) -> Result<(usize, MetricsReport)> {
    let idx = sparsify_indices(cloud, density, row_seed, AreaMode::ConvexHull)?;
    let sparse = cloud.select(&idx);
    let preds = match source {
        PredictionSource::File(p) => p.select(&idx),
        PredictionSource::Oracle(noise) => {
            oracle_predictions(&sparse, noise, seed::derive(row_seed, 1))?
        }
    };
    let (_, report) = segment_and_evaluate(&sparse, &preds, &sparse, config)?;
    Ok((sparse.len(), report))
}

pub fn write_csv<W: std::io::Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
