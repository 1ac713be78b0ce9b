//! Point records and labeled clouds.
//!
//! Point order is the identity used by every index-set operation downstream
//! (sparsification indices, prediction alignment, IoU over point sets), so
//! nothing in this crate reorders points.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary semantic class. Source labels (stem, branch, ground, ...) are
/// flattened to this before entering the toolkit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum Semantic {
    NonTree = 0,
    Tree = 1,
}

impl Semantic {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Semantic::NonTree),
            1 => Some(Semantic::Tree),
            _ => None,
        }
    }

    pub fn is_tree(self) -> bool {
        self == Semantic::Tree
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub semantic: Semantic,
    /// Tree identifier; 0 means unassigned. Ids need not be contiguous.
    pub instance: u32,
}

impl PointRecord {
    pub fn new(x: f64, y: f64, z: f64, semantic: Semantic, instance: u32) -> Self {
        Self {
            x,
            y,
            z,
            semantic,
            instance,
        }
    }

    pub fn ground(x: f64, y: f64, z: f64) -> Self {
        Self::new(x, y, z, Semantic::NonTree, 0)
    }

    pub fn tree(x: f64, y: f64, z: f64, instance: u32) -> Self {
        Self::new(x, y, z, Semantic::Tree, instance)
    }

    pub fn xyz(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Same record, compared through the bit patterns of the coordinates.
    pub fn bit_eq(&self, other: &PointRecord) -> bool {
        self.x.to_bits() == other.x.to_bits()
            && self.y.to_bits() == other.y.to_bits()
            && self.z.to_bits() == other.z.to_bits()
            && self.semantic == other.semantic
            && self.instance == other.instance
    }

    fn violation(&self) -> Option<ViolationKind> {
        if !(self.x.is_finite() && self.y.is_finite() && self.z.is_finite()) {
            Some(ViolationKind::NonFiniteCoordinate)
        } else if self.instance > 0 && !self.semantic.is_tree() {
            Some(ViolationKind::InstanceOnNonTree)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    NonFiniteCoordinate,
    InstanceOnNonTree,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViolationKind::NonFiniteCoordinate => f.write_str("non-finite coordinate"),
            ViolationKind::InstanceOnNonTree => f.write_str("instance id set on a non-tree point"),
        }
    }
}

/// One broken invariant, located by point index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub index: usize,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "point {}: {}", self.index, self.kind)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LabeledPointCloud {
    pub points: Vec<PointRecord>,
    /// Free-text provenance (platform, dataset).
    pub source_tag: String,
    pub crs_note: String,
}

impl LabeledPointCloud {
    pub fn new(points: Vec<PointRecord>) -> Self {
        Self {
            points,
            ..Default::default()
        }
    }

    pub fn with_source_tag(mut self, tag: impl Into<String>) -> Self {
        self.source_tag = tag.into();
        self
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn z(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.z).collect()
    }

    /// Copy of the cloud restricted to `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> LabeledPointCloud {
        LabeledPointCloud {
            points: indices.iter().map(|&i| self.points[i]).collect(),
            source_tag: self.source_tag.clone(),
            crs_note: self.crs_note.clone(),
        }
    }

    /// Point indices per nonzero instance id, ascending in both.
    pub fn instances(&self) -> BTreeMap<u32, Vec<usize>> {
        let mut out: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (i, p) in self.points.iter().enumerate() {
            if p.instance > 0 {
                out.entry(p.instance).or_default().push(i);
            }
        }
        out
    }

    pub fn instance_count(&self) -> usize {
        self.instances().len()
    }

    /// XY centroid; `None` for an empty cloud.
    pub fn centroid_xy(&self) -> Option<[f64; 2]> {
        self.centroid().map(|c| [c[0], c[1]])
    }

    pub fn centroid(&self) -> Option<[f64; 3]> {
        if self.points.is_empty() {
            return None;
        }
        let n = self.points.len() as f64;
        let mut sum = [0.0; 3];
        for p in &self.points {
            sum[0] += p.x;
            sum[1] += p.y;
            sum[2] += p.z;
        }
        Some([sum[0] / n, sum[1] / n, sum[2] / n])
    }

    pub fn bit_eq(&self, other: &LabeledPointCloud) -> bool {
        self.points.len() == other.points.len()
            && self
                .points
                .iter()
                .zip(&other.points)
                .all(|(a, b)| a.bit_eq(b))
    }

    /// Every broken invariant; empty iff the cloud is valid.
    pub fn validate(&self) -> Vec<Violation> {
        self.points
            .iter()
            .enumerate()
            .filter_map(|(index, p)| p.violation().map(|kind| Violation { index, kind }))
            .collect()
    }

    /// Fails on the first violation.
    pub fn ensure_valid(&self) -> Result<()> {
        match self.validate().into_iter().next() {
            None => Ok(()),
            Some(v) => Err(Error::Invalid {
                line: v.index + 1,
                message: format!("point {}: {}", v.index, v.kind),
            }),
        }
    }
}

/// Free-function form of [`LabeledPointCloud::validate`].
pub fn validate(cloud: &LabeledPointCloud) -> Vec<Violation> {
    cloud.validate()
}

pub(crate) fn check_record(record: &PointRecord) -> Option<String> {
    record.violation().map(|k| k.to_string())
}
