//! Evaluation grids, the average and maximum pointwise errors of a fit,
//! superlevel-set shape recovery, and symmetric-difference scoring.
//!
//! Grid sweeps run on rayon. Every reduction is split into fixed-size chunks
//! whose compensated partial sums are combined in index order, so results do
//! not depend on the number of threads (`MOMENTFIT_THREADS` caps it).

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::BoxDomain;
use crate::error::{Error, Result};
use crate::linalg::compensated_sum;

/// Default fraction of each axis excluded on both sides for the interior errors.
pub const DEFAULT_INTERIOR_MARGIN: f64 = 0.05;

/// Points per reduction chunk; fixed so that sums are thread-count independent.
const CHUNK: usize = 4096;

/// Uniform grid covering a box inclusively; point `k` has axis indices
/// `k = i_1 + N i_2 + N² i_3 + …` (first coordinate fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationGrid {
    #[serde(rename = "box")]
    pub bbox: BoxDomain,
    pub nodes_per_axis: usize,
}

impl EvaluationGrid {
    pub fn new(bbox: BoxDomain, nodes_per_axis: usize) -> Result<Self> {
        if nodes_per_axis < 2 {
            return Err(Error::InvalidInput(
                "an evaluation grid needs at least 2 nodes per axis".into(),
            ));
        }
        Ok(Self { bbox, nodes_per_axis })
    }

    /// 10⁴ points for n = 1, 400 × 400 for n = 2, 50 per axis beyond.
    pub fn default_for(bbox: &BoxDomain) -> Self {
        let nodes = match bbox.dim() {
            1 => 10_000,
            2 => 400,
            _ => 50,
        };
        Self {
            bbox: bbox.clone(),
            nodes_per_axis: nodes,
        }
    }

    pub fn dim(&self) -> usize {
        self.bbox.dim()
    }

    pub fn len(&self) -> usize {
        self.nodes_per_axis.pow(self.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Riemann weight of every point: the box volume shared evenly.
    pub fn cell_weight(&self) -> f64 {
        self.bbox.volume() / self.len() as f64
    }

    /// Coordinate of node `i` on `axis`.
    pub fn coordinate(&self, axis: usize, i: usize) -> f64 {
        let (a, b) = self.bbox.bounds()[axis];
        if i + 1 == self.nodes_per_axis {
            b
        } else {
            a + (b - a) * i as f64 / (self.nodes_per_axis - 1) as f64
        }
    }

    /// Axis indices of point `k`.
    pub fn indices(&self, mut k: usize) -> Vec<usize> {
        (0..self.dim())
            .map(|_| {
                let i = k % self.nodes_per_axis;
                k /= self.nodes_per_axis;
                i
            })
            .collect()
    }

    pub fn point(&self, k: usize) -> Vec<f64> {
        self.indices(k)
            .into_iter()
            .enumerate()
            .map(|(axis, i)| self.coordinate(axis, i))
            .collect()
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(|k| self.point(k))
    }

    fn is_interior(&self, x: &[f64], margin: f64) -> bool {
        x.iter().zip(self.bbox.bounds()).all(|(&xi, &(a, b))| {
            let m = margin * (b - a);
            xi >= a + m && xi <= b - m
        })
    }
}

/// Runs `f` on a pool of `MOMENTFIT_THREADS` threads when that variable is
/// set, on rayon's global pool otherwise.
pub fn with_thread_pool<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    let requested = std::env::var("MOMENTFIT_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0);
    match requested.and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

/// The paper's error metrics of a fit on a grid.
///
/// `avg_error` is the integral `∫ |u − u_d| dλ` (Riemann sum with the cell
/// weights); `mean_error` divides it by the volume, which is the quantity
/// the published tables report on boxes of volume other than 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub avg_error: f64,
    pub mean_error: f64,
    pub max_error: f64,
    pub interior_avg_error: f64,
    pub interior_mean_error: f64,
    pub interior_max_error: f64,
    /// Fraction of each axis excluded on both sides for the interior errors.
    pub interior_margin: f64,
    pub grid: EvaluationGrid,
    pub points: usize,
    pub interior_points: usize,
}

#[derive(Default, Clone, Copy)]
struct Partial {
    sum: f64,
    max: f64,
    interior_sum: f64,
    interior_max: f64,
    interior_count: usize,
}

/// `ε̄, ε̂` and their interior variants of `estimate` against `truth`.
pub fn error_metrics(
    truth: impl Fn(&[f64]) -> f64 + Sync,
    estimate: impl Fn(&[f64]) -> f64 + Sync,
    grid: &EvaluationGrid,
    interior_margin: f64,
) -> ErrorReport {
    let total = grid.len();
    let chunks: Vec<Partial> = with_thread_pool(|| {
        (0..total.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let range = c * CHUNK..((c + 1) * CHUNK).min(total);
                let mut all = Vec::with_capacity(range.len());
                let mut inner = Vec::new();
                for k in range {
                    let x = grid.point(k);
                    let e = (truth(&x) - estimate(&x)).abs();
                    all.push(e);
                    if grid.is_interior(&x, interior_margin) {
                        inner.push(e);
                    }
                }
                Partial {
                    sum: compensated_sum(all.iter().copied()),
                    max: all.iter().copied().fold(0.0, f64::max),
                    interior_sum: compensated_sum(inner.iter().copied()),
                    interior_max: inner.iter().copied().fold(0.0, f64::max),
                    interior_count: inner.len(),
                }
            })
            .collect()
    });
    let sum = compensated_sum(chunks.iter().map(|p| p.sum));
    let interior_sum = compensated_sum(chunks.iter().map(|p| p.interior_sum));
    let interior_points: usize = chunks.iter().map(|p| p.interior_count).sum();
    let w = grid.cell_weight();
    ErrorReport {
        avg_error: w * sum,
        mean_error: sum / total as f64,
        max_error: chunks.iter().map(|p| p.max).fold(0.0, f64::max),
        interior_avg_error: w * interior_sum,
        interior_mean_error: if interior_points > 0 {
            interior_sum / interior_points as f64
        } else {
            0.0
        },
        interior_max_error: chunks.iter().map(|p| p.interior_max).fold(0.0, f64::max),
        interior_margin,
        grid: grid.clone(),
        points: total,
        interior_points,
    }
}

/// Boolean raster of a set on an evaluation grid, in grid point order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mask {
    pub grid: EvaluationGrid,
    pub cells: Vec<bool>,
}

impl Mask {
    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&b| b).count()
    }

    /// Cell-weighted area (volume) of the set.
    pub fn area(&self) -> f64 {
        self.count() as f64 * self.grid.cell_weight()
    }

    /// 8-bit binary PGM (P5): set points white, first coordinate along rows,
    /// top row at the largest second coordinate. One-dimensional masks give a
    /// single row.
    pub fn to_pgm(&self) -> Result<Vec<u8>> {
        let n = self.grid.nodes_per_axis;
        let rows = match self.grid.dim() {
            1 => 1,
            2 => n,
            d => return Err(Error::Unsupported(format!("PGM rasters of {d}-dimensional masks"))),
        };
        let mut out = format!("P5\n{n} {rows}\n255\n").into_bytes();
        for r in (0..rows).rev() {
            out.extend(
                self.cells[r * n..(r + 1) * n]
                    .iter()
                    .map(|&b| if b { 255u8 } else { 0 }),
            );
        }
        Ok(out)
    }
}

/// `{x : estimate(x) ≥ threshold}` on the grid.
pub fn superlevel_set(estimate: impl Fn(&[f64]) -> f64 + Sync, grid: &EvaluationGrid, threshold: f64) -> Mask {
    let cells = with_thread_pool(|| {
        (0..grid.len())
            .into_par_iter()
            .map(|k| estimate(&grid.point(k)) >= threshold)
            .collect()
    });
    Mask {
        grid: grid.clone(),
        cells,
    }
}

/// Cell-weighted area of `(A \ B) ∪ (B \ A)`.
pub fn symmetric_difference(a: &Mask, b: &Mask) -> Result<f64> {
    if a.grid != b.grid || a.cells.len() != b.cells.len() {
        return Err(Error::GridMismatch);
    }
    let differing = a.cells.iter().zip(&b.cells).filter(|(x, y)| x != y).count();
    Ok(differing as f64 * a.grid.cell_weight())
}

/// One CSV row per grid point: coordinates `x1…xn`, `u_true`, `u_est`.
pub fn write_csv(
    out: impl Write,
    grid: &EvaluationGrid,
    truth: impl Fn(&[f64]) -> f64,
    estimate: impl Fn(&[f64]) -> f64,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=grid.dim()).map(|i| format!("x{i}")).collect();
    header.push("u_true".into());
    header.push("u_est".into());
    w.write_record(&header).map_err(csv_error)?;
    for x in grid.points() {
        let mut row: Vec<String> = x.iter().map(|v| v.to_string()).collect();
        row.push(truth(&x).to_string());
        row.push(estimate(&x).to_string());
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}
