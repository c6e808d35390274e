//! Grid scan for the nodal set of the total field and line segments within it.

use super::ScatterSolution;
use crate::field::{cnorm, Point};
use crate::error::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanGrid {
    pub min: Point,
    pub max: Point,
    pub nx: usize,
    pub ny: usize,
}

impl ScanGrid {
    pub fn new(min: Point, max: Point, nx: usize, ny: usize) -> Result<Self> {
        if nx < 2 || ny < 2 || !(max[0] > min[0] && max[1] > min[1]) {
            return Err(Error::InvalidInput("scan grid needs nx, ny >= 2 and a nonempty box".into()));
        }
        Ok(ScanGrid { min, max, nx, ny })
    }

    pub fn cell(&self) -> f64 {
        ((self.max[0] - self.min[0]) / (self.nx - 1) as f64).max((self.max[1] - self.min[1]) / (self.ny - 1) as f64)
    }

    pub fn point(&self, i: usize, j: usize) -> Point {
        let (s, t) = (i as f64 / (self.nx - 1) as f64, j as f64 / (self.ny - 1) as f64);
        [self.min[0] * (1.0 - s) + self.max[0] * s, self.min[1] * (1.0 - t) + self.max[1] * t]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Segment {
    pub start: Point,
    pub end: Point,
    pub points: usize,
    /// Both endpoints lie within the geometric tolerance of the boundary.
    pub touches_boundary_twice: bool,
}

impl Segment {
    pub fn length(&self) -> f64 {
        (self.end[0] - self.start[0]).hypot(self.end[1] - self.start[1])
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NodalScanReport {
    pub grid: ScanGrid,
    pub tol: f64,
    pub tol_geom: f64,
    pub scanned: usize,
    pub points: Vec<(Point, f64)>,
    pub segments: Vec<Segment>,
}

impl NodalScanReport {
    /// Segments joining two boundary points, which a nodal set of a solution cannot contain.
    pub fn violations(&self) -> Vec<&Segment> {
        self.segments.iter().filter(|s| s.touches_boundary_twice).collect()
    }
}

/// Points excluded from the scan: inside the obstacle or within this many cells of it.
pub const COLLAR_CELLS: f64 = 1.5;
/// Default geometric tolerance in cells.
pub const TOL_GEOM_CELLS: f64 = 3.0;
const INLIER_CELLS: f64 = 0.5;
const GAP_CELLS: f64 = 2.0;
const MIN_POINTS: usize = 4;
const MAX_HYPOTHESIS_POINTS: usize = 400;

/// Scans `|u(x)| < tol` on the grid and groups collinear runs into segments.
pub fn nodal_scan(sol: &ScatterSolution, grid: &ScanGrid, tol: f64, tol_geom: Option<f64>) -> NodalScanReport {
    let cell = grid.cell();
    let tol_geom = tol_geom.unwrap_or(TOL_GEOM_CELLS * cell);
    let obstacle = &sol.obstacle;
    let samples: Vec<(Point, f64)> = (0..grid.nx * grid.ny)
        .into_par_iter()
        .filter_map(|k| {
            let x = grid.point(k % grid.nx, k / grid.nx);
            if obstacle.contains(x) || obstacle.boundary_distance(x) < COLLAR_CELLS * cell {
                return None;
            }
            Some((x, cnorm(&sol.total(x))))
        })
        .collect();
    let scanned = samples.len();
    let points: Vec<(Point, f64)> = samples.into_iter().filter(|(_, v)| *v < tol).collect();
    let pts: Vec<Point> = points.iter().map(|p| p.0).collect();
    let segments = detect_segments(&pts, cell)
        .into_iter()
        .map(|(start, end, n)| Segment {
            start,
            end,
            points: n,
            touches_boundary_twice: obstacle.boundary_distance(start) <= tol_geom && obstacle.boundary_distance(end) <= tol_geom,
        })
        .collect();
    NodalScanReport { grid: *grid, tol, tol_geom, scanned, points, segments }
}

/// Runs of at least `MIN_POINTS` collinear points along a line through `p`, `q`.
fn runs_on_line(pts: &[Point], alive: &[bool], p: Point, q: Point, cell: f64) -> Vec<Vec<(f64, usize)>> {
    let d = [q[0] - p[0], q[1] - p[1]];
    let l = d[0].hypot(d[1]);
    let t = [d[0] / l, d[1] / l];
    let mut on: Vec<(f64, usize)> = pts
        .iter()
        .enumerate()
        .filter(|(k, _)| alive[*k])
        .filter_map(|(k, x)| {
            let v = [x[0] - p[0], x[1] - p[1]];
            let off = (v[0] * t[1] - v[1] * t[0]).abs();
            (off <= INLIER_CELLS * cell).then_some((v[0] * t[0] + v[1] * t[1], k))
        })
        .collect();
    on.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut runs = Vec::new();
    let mut cur: Vec<(f64, usize)> = Vec::new();
    for e in on {
        if let Some(last) = cur.last() {
            if e.0 - last.0 > GAP_CELLS * cell {
                runs.push(std::mem::take(&mut cur));
            }
        }
        cur.push(e);
    }
    runs.push(cur);
    runs.retain(|r| r.len() >= MIN_POINTS);
    runs
}

/// Greedy deterministic line grouping: repeatedly take the longest run over all
/// point-pair hypotheses and remove its points.
fn detect_segments(pts: &[Point], cell: f64) -> Vec<(Point, Point, usize)> {
    let mut alive = vec![true; pts.len()];
    let mut out = Vec::new();
    loop {
        let live: Vec<usize> = (0..pts.len()).filter(|k| alive[*k]).collect();
        if live.len() < MIN_POINTS {
            break;
        }
        let stride = live.len().div_ceil(MAX_HYPOTHESIS_POINTS);
        let hyp: Vec<usize> = live.iter().copied().step_by(stride).collect();
        let best = hyp
            .par_iter()
            .enumerate()
            .flat_map_iter(|(a, &i)| hyp[a + 1..].iter().map(move |&j| (i, j)))
            .filter(|(i, j)| pts[*i] != pts[*j])
            .map(|(i, j)| {
                let runs = runs_on_line(pts, &alive, pts[i], pts[j], cell);
                let best = runs.into_iter().max_by_key(|r| r.len()).unwrap_or_default();
                (best.len(), i, j, best)
            })
            .reduce(
                || (0, usize::MAX, usize::MAX, Vec::new()),
                |a, b| if (b.0, std::cmp::Reverse((b.1, b.2))) > (a.0, std::cmp::Reverse((a.1, a.2))) { b } else { a },
            );
        if best.0 < MIN_POINTS {
            break;
        }
        let run = best.3;
        for (_, k) in &run {
            alive[*k] = false;
        }
        out.push((pts[run[0].1], pts[run[run.len() - 1].1], run.len()));
    }
    out
}
