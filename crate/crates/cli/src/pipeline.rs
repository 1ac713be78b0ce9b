use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use treekit_core::evaluate::{self, MetricsReport, DEFAULT_BIN_HEIGHT};
use treekit_core::grouping::{self, GroupingConfig};
use treekit_core::io;
use treekit_core::{InstanceSegmentation, LabeledPointCloud, PointPredictions};

use crate::files;

pub struct PipelineOutput {
    pub report: MetricsReport,
    pub instances_path: PathBuf,
    pub report_path: PathBuf,
}

/// Segments `cloud` from `preds` and scores the result against `gt`.
pub fn segment_and_evaluate(
    cloud: &LabeledPointCloud,
    preds: &PointPredictions,
    gt: &LabeledPointCloud,
    config: &GroupingConfig,
) -> Result<(LabeledPointCloud, MetricsReport)> {
    let seg = grouping::segment(cloud, preds, config).context("segment")?;
    let result = grouping::prediction_cloud(cloud, preds, &seg, config.semantic_threshold)
        .context("segment")?;
    let gt_seg = InstanceSegmentation::from_cloud(gt);
    let report =
        evaluate::evaluate(&gt_seg, &seg, &gt.z(), DEFAULT_BIN_HEIGHT).context("evaluate")?;
    Ok((result, report))
}

/// Reads the inputs, runs segmentation and evaluation, and writes
/// `instances.ptc` and `report.json` into `out_dir`.
pub fn run_pipeline(
    cloud_path: &Path,
    preds_path: &Path,
    config: &GroupingConfig,
    gt_path: &Path,
    out_dir: &Path,
) -> Result<PipelineOutput> {
    let cloud = files::read_cloud(cloud_path).context("load cloud")?;
    let preds = io::load_predictions(preds_path)
        .with_context(|| format!("load predictions {}", preds_path.display()))?;
    let gt = files::read_cloud(gt_path).context("load ground truth")?;
    let (result, report) = segment_and_evaluate(&cloud, &preds, &gt, config)?;

    files::create_dir(out_dir)?;
    let instances_path = out_dir.join("instances.ptc");
    let report_path = out_dir.join("report.json");
    files::write_cloud(&result, &instances_path)?;
    files::write_text(&report_path, &(report.to_json() + "\n"))?;
    Ok(PipelineOutput {
        report,
        instances_path,
        report_path,
    })
}
