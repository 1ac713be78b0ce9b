//! Plot area and point density.
//!
//! The reference area for points per square meter is the area of the convex
//! hull of the XY projection (monotone chain + shoelace). The axis-aligned
//! bounding box is available as an alternative through [`AreaMode`].

use serde::{Deserialize, Serialize};

use crate::cloud::LabeledPointCloud;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AreaMode {
    #[default]
    ConvexHull,
    BoundingBox,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityStats {
    pub n_points: usize,
    pub hull_area_m2: f64,
    pub density_pts_m2: f64,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Convex hull in counter-clockwise order, collinear points dropped.
pub fn convex_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Shoelace area of a simple polygon (absolute value).
pub fn polygon_area(polygon: &[[f64; 2]]) -> f64 {
    if polygon.len() < 3 {
        return 0.0;
    }
    let mut twice = 0.0;
    for (i, a) in polygon.iter().enumerate() {
        let b = polygon[(i + 1) % polygon.len()];
        twice += a[0] * b[1] - b[0] * a[1];
    }
    (twice * 0.5).abs()
}

fn xy(cloud: &LabeledPointCloud) -> Vec<[f64; 2]> {
    cloud.points.iter().map(|p| [p.x, p.y]).collect()
}

/// Area of the XY convex hull; 0 for fewer than three non-collinear points.
pub fn hull_area_xy(cloud: &LabeledPointCloud) -> Result<f64> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    Ok(polygon_area(&convex_hull(&xy(cloud))))
}

pub fn bbox_area_xy(cloud: &LabeledPointCloud) -> Result<f64> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &cloud.points {
        lo = [lo[0].min(p.x), lo[1].min(p.y)];
        hi = [hi[0].max(p.x), hi[1].max(p.y)];
    }
    Ok((hi[0] - lo[0]) * (hi[1] - lo[1]))
}

pub fn plot_area(cloud: &LabeledPointCloud, mode: AreaMode) -> Result<f64> {
    match mode {
        AreaMode::ConvexHull => hull_area_xy(cloud),
        AreaMode::BoundingBox => bbox_area_xy(cloud),
    }
}

pub fn point_density(cloud: &LabeledPointCloud) -> Result<DensityStats> {
    point_density_with(cloud, AreaMode::ConvexHull)
}

pub fn point_density_with(cloud: &LabeledPointCloud, mode: AreaMode) -> Result<DensityStats> {
    let area = plot_area(cloud, mode)?;
    if area <= 0.0 {
        return Err(Error::DegenerateHull { area });
    }
    Ok(DensityStats {
        n_points: cloud.len(),
        hull_area_m2: area,
        density_pts_m2: cloud.len() as f64 / area,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::PointRecord;

    fn cloud_xy(pts: &[(f64, f64)]) -> LabeledPointCloud {
        LabeledPointCloud::new(
            pts.iter()
                .map(|&(x, y)| PointRecord::ground(x, y, 0.0))
                .collect(),
        )
    }

    #[test]
    fn unit_square() {
        let c = cloud_xy(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        assert_eq!(hull_area_xy(&c).unwrap(), 1.0);
        assert_eq!(point_density(&c).unwrap().density_pts_m2, 4.0);
    }

    #[test]
    fn right_triangle() {
        // shoelace by hand: |0*0 - 4*0 + 4*3 - 0*0 + 0*0 - 0*3| / 2 = 6
        let c = cloud_xy(&[(0.0, 0.0), (4.0, 0.0), (0.0, 3.0), (1.0, 1.0)]);
        assert_eq!(hull_area_xy(&c).unwrap(), 6.0);
    }

    #[test]
    fn degenerate_hulls() {
        assert_eq!(
            hull_area_xy(&cloud_xy(&[(0.0, 0.0), (3.0, 1.0)])).unwrap(),
            0.0
        );
        let line = cloud_xy(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0), (5.0, 5.0)]);
        assert_eq!(hull_area_xy(&line).unwrap(), 0.0);
        assert!(matches!(
            point_density(&line),
            Err(Error::DegenerateHull { .. })
        ));
        assert!(matches!(
            hull_area_xy(&LabeledPointCloud::default()),
            Err(Error::EmptyCloud)
        ));
    }

    #[test]
    fn square_with_interior_points() {
        let mut pts = vec![(0.0, 0.0), (10.0, 0.0), (10.0, 10.0), (0.0, 10.0)];
        for i in 0..96 {
            pts.push((0.5 + (i % 12) as f64 * 0.8, 0.5 + (i / 12) as f64 * 1.1));
        }
        let stats = point_density(&cloud_xy(&pts)).unwrap();
        assert_eq!(stats.n_points, 100);
        assert_eq!(stats.hull_area_m2, 100.0);
        assert_eq!(stats.density_pts_m2, 1.0);
    }

    #[test]
    fn bounding_box_mode() {
        let c = cloud_xy(&[(0.0, 0.0), (4.0, 0.0), (0.0, 3.0)]);
        assert_eq!(plot_area(&c, AreaMode::BoundingBox).unwrap(), 12.0);
        assert_eq!(
            point_density_with(&c, AreaMode::BoundingBox)
                .unwrap()
                .density_pts_m2,
            0.25
        );
    }

    #[test]
    fn hull_drops_interior_and_collinear_points() {
        let hull = convex_hull(&[
            [0.0, 0.0],
            [1.0, 0.0],
            [2.0, 0.0],
            [2.0, 2.0],
            [1.0, 1.0],
            [0.0, 2.0],
        ]);
        assert_eq!(hull.len(), 4);
    }
}
