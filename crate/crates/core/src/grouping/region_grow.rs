//! Fixed-radius connected components over a uniform hash grid.
//!
//! Cell size equals the radius, so every neighbor of a point lies in its own
//! cell or one of the 26 adjacent ones. Components are labeled through a
//! union-find, which makes the result independent of visiting order.

use std::collections::HashMap;

use super::{CandidateSource, ClusterCandidate};
use crate::error::{Error, Result};

struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

type Cell = [i64; 3];

fn cell_of(p: &[f64; 3], size: f64) -> Cell {
    [
        (p[0] / size).floor() as i64,
        (p[1] / size).floor() as i64,
        (p[2] / size).floor() as i64,
    ]
}

/// Components of the graph joining points at Euclidean distance `<= radius`.
///
/// Members index into `coords`. Components smaller than `min_points` are
/// dropped; the rest are ordered by their smallest member.
pub fn region_grow(
    coords: &[[f64; 3]],
    radius: f64,
    min_points: usize,
) -> Result<Vec<ClusterCandidate>> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::param(format!(
            "region growing radius must be positive, got {radius}"
        )));
    }
    let n = coords.len();
    let mut grid: HashMap<Cell, Vec<usize>> = HashMap::new();
    for (i, p) in coords.iter().enumerate() {
        grid.entry(cell_of(p, radius)).or_default().push(i);
    }

    let r2 = radius * radius;
    let mut sets = DisjointSet::new(n);
    for (i, p) in coords.iter().enumerate() {
        let c = cell_of(p, radius);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let Some(bucket) = grid.get(&[c[0] + dx, c[1] + dy, c[2] + dz]) else {
                        continue;
                    };
                    for &j in bucket {
                        if j <= i {
                            continue;
                        }
                        let q = &coords[j];
                        let d2 =
                            (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2);
                        if d2 <= r2 {
                            sets.union(i, j);
                        }
                    }
                }
            }
        }
    }

    // Visiting indices in ascending order keeps members sorted and orders
    // components by their smallest member.
    let mut slot_of_root: HashMap<usize, usize> = HashMap::new();
    let mut components: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let root = sets.find(i);
        let slot = *slot_of_root.entry(root).or_insert_with(|| {
            components.push(Vec::new());
            components.len() - 1
        });
        components[slot].push(i);
    }
    Ok(components
        .into_iter()
        .filter(|m| m.len() >= min_points)
        .map(|members| ClusterCandidate {
            members,
            score: 0.0,
            source: CandidateSource::OffsetRg,
        })
        .collect())
}
