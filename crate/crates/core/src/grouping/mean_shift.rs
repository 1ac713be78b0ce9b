//! Gaussian-kernel mean shift in the 5-D embedding space.
//!
//! Seeds (every `ms_seed_stride`-th point) climb to a mode; modes closer than
//! half a bandwidth to an earlier mode are merged into it; finally every point
//! joins its nearest mode. Seeds with bit-identical embeddings share one climb.
//!
//! With a positive `ms_kernel_cutoff` the kernel is truncated at
//! `cutoff * bandwidth` and neighbors come from a hash grid of that cell size;
//! with a cutoff of 0 every point contributes to every step.

use std::collections::HashMap;

use rayon::prelude::*;

use super::{CandidateSource, ClusterCandidate, Embedding, GroupingConfig, EMBEDDING_DIM};
use crate::error::{Error, Result};

type Cell = [i64; EMBEDDING_DIM];

fn dist2(a: &Embedding, b: &Embedding) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub struct MeanShift<'a> {
    data: &'a [Embedding],
    bandwidth: f64,
    /// Truncation radius; `None` for the full kernel.
    support: Option<f64>,
    grid: HashMap<Cell, Vec<usize>>,
    max_iter: usize,
    tol: f64,
}

impl<'a> MeanShift<'a> {
    pub fn new(data: &'a [Embedding], config: &GroupingConfig) -> Result<Self> {
        let bandwidth = config.ms_bandwidth;
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(Error::param(format!(
                "mean-shift bandwidth must be positive, got {bandwidth}"
            )));
        }
        let support =
            (config.ms_kernel_cutoff > 0.0).then_some(config.ms_kernel_cutoff * bandwidth);
        let mut grid: HashMap<Cell, Vec<usize>> = HashMap::new();
        if let Some(size) = support {
            for (i, e) in data.iter().enumerate() {
                grid.entry(cell_of(e, size)).or_default().push(i);
            }
        }
        Ok(Self {
            data,
            bandwidth,
            support,
            grid,
            max_iter: config.ms_max_iter,
            tol: config.ms_tol,
        })
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// Kernel-weighted mean around `x`; `None` when no point has weight.
    pub fn step(&self, x: &Embedding) -> Option<Embedding> {
        let inv = 1.0 / (2.0 * self.bandwidth * self.bandwidth);
        let mut acc = [0.0; EMBEDDING_DIM];
        let mut total = 0.0;
        let mut add = |e: &Embedding, d2: f64| {
            let w = (-d2 * inv).exp();
            total += w;
            for (a, v) in acc.iter_mut().zip(e) {
                *a += w * v;
            }
        };
        match self.support {
            None => {
                for e in self.data {
                    add(e, dist2(x, e));
                }
            }
            Some(r) => {
                let r2 = r * r;
                let c = cell_of(x, r);
                for offset in neighbor_offsets() {
                    let key: Cell = std::array::from_fn(|k| c[k] + offset[k]);
                    let Some(bucket) = self.grid.get(&key) else {
                        continue;
                    };
                    for &j in bucket {
                        let e = &self.data[j];
                        let d2 = dist2(x, e);
                        if d2 <= r2 {
                            add(e, d2);
                        }
                    }
                }
            }
        }
        if total <= 0.0 {
            return None;
        }
        Some(acc.map(|a| a / total))
    }

    /// Iterates [`step`](Self::step) until the shift drops below the
    /// tolerance or the iteration cap is reached.
    pub fn climb(&self, start: &Embedding) -> Embedding {
        let mut x = *start;
        for _ in 0..self.max_iter {
            let Some(next) = self.step(&x) else {
                break;
            };
            let shift = dist2(&x, &next).sqrt();
            x = next;
            if shift < self.tol {
                break;
            }
        }
        x
    }
}

fn cell_of(e: &Embedding, size: f64) -> Cell {
    e.map(|v| (v / size).floor() as i64)
}

fn neighbor_offsets() -> impl Iterator<Item = Cell> {
    (0..3usize.pow(EMBEDDING_DIM as u32)).map(|mut code| {
        let mut off = [0i64; EMBEDDING_DIM];
        for o in &mut off {
            *o = (code % 3) as i64 - 1;
            code /= 3;
        }
        off
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanShiftOutput {
    /// Merged modes, in order of first discovery.
    pub modes: Vec<Embedding>,
    /// One candidate per mode that attracted at least one point.
    pub candidates: Vec<ClusterCandidate>,
}

pub fn mean_shift_modes(
    embeddings: &[Embedding],
    config: &GroupingConfig,
) -> Result<MeanShiftOutput> {
    let stride = config.ms_seed_stride.max(1);
    let ms = MeanShift::new(embeddings, config)?;

    // Unique seed embeddings in first-occurrence order.
    let mut unique: Vec<Embedding> = Vec::new();
    let mut seen: HashMap<[u64; EMBEDDING_DIM], ()> = HashMap::new();
    for e in embeddings.iter().step_by(stride) {
        if seen.insert(e.map(f64::to_bits), ()).is_none() {
            unique.push(*e);
        }
    }
    let climbed: Vec<Embedding> = unique.par_iter().map(|s| ms.climb(s)).collect();

    let merge_r2 = (0.5 * ms.bandwidth()).powi(2);
    let mut modes: Vec<Embedding> = Vec::new();
    for m in climbed {
        if !modes.iter().any(|k| dist2(k, &m) <= merge_r2) {
            modes.push(m);
        }
    }

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); modes.len()];
    let owners: Vec<usize> = embeddings
        .par_iter()
        .map(|e| {
            let mut best = (f64::INFINITY, 0usize);
            for (k, m) in modes.iter().enumerate() {
                let d = dist2(e, m);
                if d < best.0 {
                    best = (d, k);
                }
            }
            best.1
        })
        .collect();
    for (i, k) in owners.into_iter().enumerate() {
        members[k].push(i);
    }
    let candidates = members
        .into_iter()
        .filter(|m| !m.is_empty())
        .map(|members| ClusterCandidate {
            members,
            score: 0.0,
            source: CandidateSource::EmbeddingMs,
        })
        .collect();
    Ok(MeanShiftOutput { modes, candidates })
}

/// Candidates from [`mean_shift_modes`]; members index into `embeddings`.
pub fn mean_shift(
    embeddings: &[Embedding],
    config: &GroupingConfig,
) -> Result<Vec<ClusterCandidate>> {
    Ok(mean_shift_modes(embeddings, config)?.candidates)
}
