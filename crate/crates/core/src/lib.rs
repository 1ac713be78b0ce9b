//! Non-learned core of a sensor-agnostic tree instance segmentation toolkit.
//!
//! The crate is organised along the processing chain:
//!
//! - [`cloud`] and [`io`]: labeled point clouds, validation and the PTC/CSV/PRD text formats.
//! - [`geometry`]: XY convex hull area and point density.
//! - [`sparsify`] and [`augment`]: density-targeted subsampling and seeded geometric transforms.
//! - [`grouping`]: semantic gating, offset region growing, embedding mean shift, scoring and NMS
//!   over per-point predictions from any provider.
//! - [`evaluate`]: IoU matching, tree-level metrics, height bins and computational efficiency.
//! - [`synthgen`]: synthetic forests with exact ground truth and oracle predictions.

pub mod augment;
pub mod cloud;
pub mod error;
pub mod evaluate;
pub mod geometry;
pub mod grouping;
pub mod io;
pub mod seed;
pub mod sparsify;
pub mod synthgen;

pub use cloud::{LabeledPointCloud, PointRecord, Semantic, Violation};
pub use error::{Error, Result};
pub use geometry::DensityStats;
pub use grouping::{InstanceSegmentation, PointPrediction, PointPredictions};
