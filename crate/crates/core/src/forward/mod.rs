//! Forward scattering by rigid obstacles.

mod disk;
mod mfs;
mod nodal;

pub use disk::{
    default_truncation, disk_mode_matrices, disk_series_solve, disk_transfer, normalized_cond, scaled_cond, DiskSeries, ModeMatrices,
    MODE_COND_LIMIT,
};
pub use mfs::{mfs_solve, MfsOperator, MfsParams, MfsSolution};
pub use nodal::{nodal_scan, NodalScanReport, ScanGrid, Segment};

use crate::elastic::{dot, direction_grid, ElasticMedium, FarFieldPattern, PatternSource, PlaneWave};
use crate::error::{Error, Result};
use crate::field::{cadd, CVec2, Point, VectorField};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiskObstacle {
    pub center: Point,
    pub radius: f64,
}

impl DiskObstacle {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() || !center.iter().all(|v| v.is_finite()) {
            return Err(Error::Geometry(format!("disk radius must be positive and finite, got {radius}")));
        }
        Ok(DiskObstacle { center, radius })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolygonObstacle {
    pub vertices: Vec<Point>,
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    ((d1 > 0.0) != (d2 > 0.0)) && ((d3 > 0.0) != (d4 > 0.0)) && d1 != 0.0 && d2 != 0.0 && d3 != 0.0 && d4 != 0.0
}

/// Distance from `x` to the segment `[a, b]`.
pub fn segment_distance(x: Point, a: Point, b: Point) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let l2 = dot(ab, ab);
    let t = if l2 > 0.0 { (dot([x[0] - a[0], x[1] - a[1]], ab) / l2).clamp(0.0, 1.0) } else { 0.0 };
    (x[0] - a[0] - t * ab[0]).hypot(x[1] - a[1] - t * ab[1])
}

impl PolygonObstacle {
    /// Counterclockwise simple polygon with at least three vertices.
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::Geometry("polygon needs at least three vertices".into()));
        }
        if !vertices.iter().flatten().all(|v| v.is_finite()) {
            return Err(Error::Geometry("polygon vertices must be finite".into()));
        }
        let p = PolygonObstacle { vertices };
        if p.signed_area() <= 0.0 {
            return Err(Error::Geometry("polygon vertices must be counterclockwise with positive area".into()));
        }
        for i in 0..n {
            let a = p.vertices[i];
            let b = p.vertices[(i + 1) % n];
            if (a[0] - b[0]).hypot(a[1] - b[1]) == 0.0 {
                return Err(Error::Geometry(format!("repeated vertex at index {i}")));
            }
            for j in i + 1..n {
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                if segments_intersect(a, b, p.vertices[j], p.vertices[(j + 1) % n]) {
                    return Err(Error::Geometry(format!("edges {i} and {j} intersect")));
                }
            }
        }
        Ok(p)
    }

    pub fn regular(n: usize, center: Point, circumradius: f64, rotation: f64) -> Result<Self> {
        Self::new(
            (0..n)
                .map(|k| {
                    let t = rotation + 2.0 * PI * k as f64 / n as f64;
                    [center[0] + circumradius * t.cos(), center[1] + circumradius * t.sin()]
                })
                .collect(),
        )
    }

    pub fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % n];
                a[0] * b[1] - a[1] * b[0]
            })
            .sum::<f64>()
            * 0.5
    }

    pub fn centroid(&self) -> Point {
        let n = self.vertices.len();
        let mut c = [0.0, 0.0];
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let w = a[0] * b[1] - a[1] * b[0];
            c[0] += (a[0] + b[0]) * w;
            c[1] += (a[1] + b[1]) * w;
        }
        let s = 6.0 * self.signed_area();
        [c[0] / s, c[1] / s]
    }

    pub fn perimeter(&self) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % n];
                (b[0] - a[0]).hypot(b[1] - a[1])
            })
            .sum()
    }

    pub fn contains(&self, x: Point) -> bool {
        let n = self.vertices.len();
        let mut inside = false;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            if (a[1] > x[1]) != (b[1] > x[1]) {
                let t = (x[1] - a[1]) / (b[1] - a[1]);
                if x[0] < a[0] + t * (b[0] - a[0]) {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn boundary_distance(&self, x: Point) -> f64 {
        let n = self.vertices.len();
        (0..n).map(|i| segment_distance(x, self.vertices[i], self.vertices[(i + 1) % n])).fold(f64::INFINITY, f64::min)
    }

    /// Point at arclength fraction `s` in `[0, 1)` from vertex 0.
    pub fn point_at(&self, s: f64) -> Point {
        let n = self.vertices.len();
        let mut target = s.rem_euclid(1.0) * self.perimeter();
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let l = (b[0] - a[0]).hypot(b[1] - a[1]);
            if target <= l || i == n - 1 {
                let t = (target / l).min(1.0);
                return [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
            }
            target -= l;
        }
        unreachable!()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Obstacle {
    Disk(DiskObstacle),
    Polygon(PolygonObstacle),
}

impl Obstacle {
    pub fn contains(&self, x: Point) -> bool {
        match self {
            Obstacle::Disk(d) => (x[0] - d.center[0]).hypot(x[1] - d.center[1]) < d.radius,
            Obstacle::Polygon(p) => p.contains(x),
        }
    }

    pub fn boundary_distance(&self, x: Point) -> f64 {
        match self {
            Obstacle::Disk(d) => ((x[0] - d.center[0]).hypot(x[1] - d.center[1]) - d.radius).abs(),
            Obstacle::Polygon(p) => p.boundary_distance(x),
        }
    }

    /// Center used for source retraction.
    pub fn centroid(&self) -> Point {
        match self {
            Obstacle::Disk(d) => d.center,
            Obstacle::Polygon(p) => p.centroid(),
        }
    }

    /// Point on the boundary at arclength fraction `s`.
    pub fn boundary_point(&self, s: f64) -> Point {
        match self {
            Obstacle::Disk(d) => {
                let t = 2.0 * PI * s;
                [d.center[0] + d.radius * t.cos(), d.center[1] + d.radius * t.sin()]
            }
            Obstacle::Polygon(p) => p.point_at(s),
        }
    }

    /// Largest distance from the origin to the obstacle.
    pub fn extent_from_origin(&self) -> f64 {
        match self {
            Obstacle::Disk(d) => d.center[0].hypot(d.center[1]) + d.radius,
            Obstacle::Polygon(p) => p.vertices.iter().map(|v| v[0].hypot(v[1])).fold(0.0, f64::max),
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            Obstacle::Disk(d) => PI * d.radius * d.radius,
            Obstacle::Polygon(p) => p.signed_area(),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Representation {
    DiskSeries(DiskSeries),
    Mfs(MfsSolution),
}

/// A solved forward problem; the total field vanishes on the boundary up to
/// `boundary_residual`.
#[derive(Clone, Debug)]
pub struct ScatterSolution {
    pub obstacle: Obstacle,
    pub incident: PlaneWave,
    pub medium: ElasticMedium,
    pub representation: Representation,
    pub boundary_residual: f64,
    pub warnings: Vec<String>,
}

impl ScatterSolution {
    pub fn scattered(&self, x: Point) -> CVec2 {
        match &self.representation {
            Representation::DiskSeries(s) => s.scattered(x),
            Representation::Mfs(s) => s.scattered(x, &self.medium),
        }
    }

    pub fn total(&self, x: Point) -> CVec2 {
        cadd(&self.scattered(x), &self.incident.field(&self.medium).value(x))
    }

    pub fn scattered_field(&self) -> ScatteredField<'_> {
        ScatteredField(self)
    }

    pub fn total_field(&self) -> TotalField<'_> {
        TotalField(self)
    }
}

pub struct ScatteredField<'a>(pub &'a ScatterSolution);
pub struct TotalField<'a>(pub &'a ScatterSolution);

impl VectorField for ScatteredField<'_> {
    fn value(&self, x: Point) -> CVec2 {
        self.0.scattered(x)
    }
    fn analytic_derivs(&self) -> bool {
        false
    }
}

impl VectorField for TotalField<'_> {
    fn value(&self, x: Point) -> CVec2 {
        self.0.total(x)
    }
    fn analytic_derivs(&self) -> bool {
        false
    }
}

/// Far-field pattern of a solution on the given directions.
pub fn farfield_of_solution(sol: &ScatterSolution, directions: &[Point]) -> FarFieldPattern {
    let m = directions.len();
    let mut out = FarFieldPattern {
        directions: directions.to_vec(),
        weights: vec![2.0 * PI / m as f64; m],
        up: Vec::with_capacity(m),
        us: Vec::with_capacity(m),
        source: match sol.incident.pure_channel() {
            Some(channel) if sol.incident.c_p + sol.incident.c_s == Complex64::new(1.0, 0.0) => {
                PatternSource::Channel { channel, d: sol.incident.d }
            }
            _ => PatternSource::Other,
        },
    };
    for &xh in directions {
        let (a, b) = match &sol.representation {
            Representation::DiskSeries(s) => s.farfield_at(xh),
            Representation::Mfs(s) => s.farfield_at(xh, &sol.medium),
        };
        out.up.push(a);
        out.us.push(b);
    }
    out
}

/// Far field on the uniform `m`-direction grid.
pub fn farfield_uniform(sol: &ScatterSolution, m: usize) -> FarFieldPattern {
    farfield_of_solution(sol, &direction_grid(m))
}

/// Far field of the same obstacle shifted by `z`, from the far field of a
/// unit-amplitude pure-channel incident wave.
pub fn translate_farfield(ffp: &FarFieldPattern, z: Point, med: &ElasticMedium) -> Result<FarFieldPattern> {
    let (channel, d) = match ffp.source {
        PatternSource::Channel { channel, d } => (channel, d),
        PatternSource::Other => {
            return Err(Error::InvalidInput(
                "translation needs a pattern from a single pure incident channel; decompose mixed waves first".into(),
            ))
        }
    };
    let ka = med.wavenumber(channel);
    let inc = ka * dot(d, z);
    let mut out = ffp.clone();
    for (m, xh) in ffp.directions.iter().enumerate() {
        let xz = dot(*xh, z);
        out.up[m] *= Complex64::from_polar(1.0, inc - med.k_p * xz);
        out.us[m] *= Complex64::from_polar(1.0, inc - med.k_s * xz);
    }
    Ok(out)
}

/// Translates each pure-channel part and superposes them with the given amplitudes.
pub fn translate_mixed(parts: &[(Complex64, FarFieldPattern)], z: Point, med: &ElasticMedium) -> Result<FarFieldPattern> {
    let first = parts.first().ok_or_else(|| Error::InvalidInput("no channel patterns given".into()))?;
    let mut acc = FarFieldPattern { source: PatternSource::Other, ..translate_farfield(&first.1, z, med)? };
    for k in 0..acc.len() {
        acc.up[k] *= first.0;
        acc.us[k] *= first.0;
    }
    for (amp, p) in &parts[1..] {
        acc = acc.axpy(*amp, &translate_farfield(p, z, med)?);
    }
    Ok(acc)
}
