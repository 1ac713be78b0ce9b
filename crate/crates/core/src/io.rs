//! Text formats.
//!
//! PTC v1:
//!
//! ```text
//! #PTC 1
//! #fields x y z semantic instance
//! 1.5 2.25 10 1 7
//! ```
//!
//! Further lines starting with `#` are comments. `#source <tag>` and
//! `#crs <note>` comments carry the cloud's provenance fields. xyz_csv is the
//! headerless `x,y,z,semantic,instance` equivalent.
//!
//! PRD v1 holds per-point predictions aligned with a PTC file:
//! `#PRD 1` followed by `p ox oy oz e1 e2 e3 e4 e5` per point.
//!
//! Reals are written with Rust's shortest round-trip formatting, so a
//! save/load cycle reproduces every coordinate bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cloud::{check_record, LabeledPointCloud, PointRecord, Semantic};
use crate::error::{Error, Result};
use crate::grouping::{PointPrediction, PointPredictions};

pub const PTC_MAGIC: &str = "#PTC 1";
pub const PTC_FIELDS: &str = "#fields x y z semantic instance";
pub const PRD_MAGIC: &str = "#PRD 1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CloudFormat {
    #[default]
    Ptc,
    XyzCsv,
}

impl CloudFormat {
    /// `.csv` maps to xyz_csv, anything else to PTC.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => CloudFormat::XyzCsv,
            _ => CloudFormat::Ptc,
        }
    }
}

impl FromStr for CloudFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ptc" => Ok(CloudFormat::Ptc),
            "xyz_csv" | "csv" => Ok(CloudFormat::XyzCsv),
            other => Err(Error::param(format!("unknown cloud format '{other}'"))),
        }
    }
}

pub fn load_cloud(path: impl AsRef<Path>, format: CloudFormat) -> Result<LabeledPointCloud> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    match format {
        CloudFormat::Ptc => parse_ptc(&text),
        CloudFormat::XyzCsv => parse_xyz_csv(&text),
    }
}

pub fn save_cloud(
    cloud: &LabeledPointCloud,
    path: impl AsRef<Path>,
    format: CloudFormat,
) -> Result<()> {
    let path = path.as_ref();
    let text = match format {
        CloudFormat::Ptc => format_ptc(cloud),
        CloudFormat::XyzCsv => format_xyz_csv(cloud),
    };
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn parse_ptc(text: &str) -> Result<LabeledPointCloud> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, l)) if l.trim_end() == PTC_MAGIC => {}
        Some((n, l)) => {
            return Err(Error::Parse {
                line: n,
                message: format!("expected '{PTC_MAGIC}', found '{l}'"),
            })
        }
        None => {
            return Err(Error::Parse {
                line: 1,
                message: "missing PTC header".into(),
            })
        }
    }
    match lines.next() {
        Some((_, l)) if l.split_whitespace().eq(PTC_FIELDS.split_whitespace()) => {}
        Some((n, l)) => {
            return Err(Error::Parse {
                line: n,
                message: format!("expected '{PTC_FIELDS}', found '{l}'"),
            })
        }
        None => {
            return Err(Error::Parse {
                line: 2,
                message: "missing fields header".into(),
            })
        }
    }

    let mut cloud = LabeledPointCloud::default();
    for (n, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(tag) = comment.strip_prefix("source ") {
                cloud.source_tag = tag.to_string();
            } else if let Some(note) = comment.strip_prefix("crs ") {
                cloud.crs_note = note.to_string();
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        cloud.points.push(parse_record(&fields, n)?);
    }
    Ok(cloud)
}

pub fn format_ptc(cloud: &LabeledPointCloud) -> String {
    let mut out = String::with_capacity(32 * (cloud.len() + 2));
    out.push_str(PTC_MAGIC);
    out.push('\n');
    out.push_str(PTC_FIELDS);
    out.push('\n');
    if !cloud.source_tag.is_empty() {
        let _ = writeln!(out, "#source {}", single_line(&cloud.source_tag));
    }
    if !cloud.crs_note.is_empty() {
        let _ = writeln!(out, "#crs {}", single_line(&cloud.crs_note));
    }
    for p in &cloud.points {
        let _ = writeln!(
            out,
            "{} {} {} {} {}",
            p.x,
            p.y,
            p.z,
            p.semantic.code(),
            p.instance
        );
    }
    out
}

pub fn parse_xyz_csv(text: &str) -> Result<LabeledPointCloud> {
    let mut cloud = LabeledPointCloud::default();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        cloud.points.push(parse_record(&fields, i + 1)?);
    }
    Ok(cloud)
}

pub fn format_xyz_csv(cloud: &LabeledPointCloud) -> String {
    let mut out = String::with_capacity(32 * cloud.len());
    for p in &cloud.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            p.x,
            p.y,
            p.z,
            p.semantic.code(),
            p.instance
        );
    }
    out
}

fn single_line(s: &str) -> String {
    s.replace(['\n', '\r'], " ")
}

fn parse_field<T: FromStr>(field: &str, name: &str, line: usize) -> Result<T> {
    field.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid {name} '{field}'"),
    })
}

fn parse_record(fields: &[&str], line: usize) -> Result<PointRecord> {
    if fields.len() != 5 {
        return Err(Error::Parse {
            line,
            message: format!("expected 5 fields, found {}", fields.len()),
        });
    }
    let x = parse_field(fields[0], "x", line)?;
    let y = parse_field(fields[1], "y", line)?;
    let z = parse_field(fields[2], "z", line)?;
    let code: u8 = parse_field(fields[3], "semantic", line)?;
    let semantic = Semantic::from_code(code).ok_or_else(|| Error::Parse {
        line,
        message: format!("semantic must be 0 or 1, found {code}"),
    })?;
    let instance = parse_field(fields[4], "instance", line)?;
    let record = PointRecord::new(x, y, z, semantic, instance);
    if let Some(message) = check_record(&record) {
        return Err(Error::Invalid { line, message });
    }
    Ok(record)
}

// ---------------------------------------------------------------------------
// PRD v1
// ---------------------------------------------------------------------------

pub fn load_predictions(path: impl AsRef<Path>) -> Result<PointPredictions> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_prd(&text)
}

pub fn save_predictions(preds: &PointPredictions, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_prd(preds)).map_err(|e| Error::io(path, e))
}

pub fn parse_prd(text: &str) -> Result<PointPredictions> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, l)) if l.trim_end() == PRD_MAGIC => {}
        other => {
            return Err(Error::Parse {
                line: 1,
                message: format!(
                    "expected '{PRD_MAGIC}', found '{}'",
                    other.map(|(_, l)| l).unwrap_or("")
                ),
            })
        }
    }
    let mut preds = Vec::new();
    for (n, line) in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 9 {
            return Err(Error::Parse {
                line: n,
                message: format!("expected 9 fields, found {}", fields.len()),
            });
        }
        let mut v = [0.0f64; 9];
        for (slot, f) in v.iter_mut().zip(&fields) {
            *slot = parse_field(f, "prediction value", n)?;
        }
        let pred = PointPrediction {
            semantic_prob: v[0],
            offset: [v[1], v[2], v[3]],
            embedding: [v[4], v[5], v[6], v[7], v[8]],
        };
        if let Some(message) = pred.violation() {
            return Err(Error::Invalid { line: n, message });
        }
        preds.push(pred);
    }
    Ok(PointPredictions::new(preds))
}

pub fn format_prd(preds: &PointPredictions) -> String {
    let mut out = String::with_capacity(96 * (preds.len() + 1));
    out.push_str(PRD_MAGIC);
    out.push('\n');
    for p in preds.iter() {
        let _ = write!(out, "{}", p.semantic_prob);
        for v in p.offset.iter().chain(&p.embedding) {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    out
}
