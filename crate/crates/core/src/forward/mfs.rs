//! Method of fundamental solutions with Kupradze point sources.

use super::{Obstacle, PolygonObstacle, Representation, ScatterSolution};
use crate::elastic::{ElasticMedium, PlaneWave};
use crate::error::{Error, Result};
use crate::field::{cadd, cnorm, CVec2, Point, VectorField, ZERO};
use crate::green::{navier_phiomega, point_source_farfield_at};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MfsParams {
    pub n_sources: usize,
    pub n_collocation: usize,
    pub retraction_factor: f64,
    /// Relative singular-value cutoff.
    pub svd_cutoff: f64,
    /// Boundary residual above which a warning is attached to the solution.
    #[serde(default = "default_warn")]
    pub warn_residual: f64,
    /// Source groups per polygon vertex, exponentially clustered toward the corner;
    /// each group is a fan of three sources.
    #[serde(default)]
    pub corner_sources: usize,
}

/// Clustering rate of corner sources and corner collocation.
pub const CORNER_GRADING: f64 = 4.0;
/// Angular offsets of each corner source group, as fractions of the half interior angle.
const CORNER_FAN: [f64; 3] = [-0.6, 0.0, 0.6];

fn default_warn() -> f64 {
    1e-4
}

impl MfsParams {
    pub fn for_obstacle(obstacle: &Obstacle) -> Self {
        let retraction_factor = match obstacle {
            Obstacle::Disk(_) => 0.8,
            Obstacle::Polygon(_) => 0.7,
        };
        let (n_sources, corner_sources) = match obstacle {
            Obstacle::Disk(_) => (120, 0),
            Obstacle::Polygon(_) => (40, 18),
        };
        MfsParams {
            n_sources,
            n_collocation: 600,
            retraction_factor,
            svd_cutoff: 1e-12,
            warn_residual: default_warn(),
            corner_sources,
        }
    }

    /// Total number of sources, including corner clusters.
    pub fn total_sources(&self, obstacle: &Obstacle) -> usize {
        match obstacle {
            Obstacle::Disk(_) => self.n_sources,
            Obstacle::Polygon(p) => self.n_sources + CORNER_FAN.len() * self.corner_sources * p.vertices.len(),
        }
    }

    fn validate(&self, obstacle: &Obstacle) -> Result<()> {
        let ns = self.total_sources(obstacle);
        if self.n_sources == 0 || self.n_collocation < 2 * ns {
            return Err(Error::InvalidInput(format!(
                "need n_collocation >= 2 x (number of sources) > 0, got {} and {}",
                self.n_collocation, ns
            )));
        }
        if !(self.retraction_factor > 0.0 && self.retraction_factor < 1.0) {
            return Err(Error::InvalidInput(format!("retraction factor must lie in (0, 1), got {}", self.retraction_factor)));
        }
        if !(self.svd_cutoff >= 0.0 && self.svd_cutoff < 1.0) {
            return Err(Error::InvalidInput(format!("svd cutoff must lie in [0, 1), got {}", self.svd_cutoff)));
        }
        Ok(())
    }
}

/// Sources and coefficients of an MFS solution.
#[derive(Clone, Debug)]
pub struct MfsSolution {
    pub sources: Vec<Point>,
    pub coefficients: Vec<CVec2>,
}

impl MfsSolution {
    pub fn scattered(&self, x: Point, med: &ElasticMedium) -> CVec2 {
        let mut u = [ZERO; 2];
        for (y, c) in self.sources.iter().zip(&self.coefficients) {
            match navier_phiomega(x, *y, med) {
                Ok(t) => u = cadd(&u, &t.apply(c)),
                Err(_) => return [Complex64::new(f64::NAN, 0.0); 2],
            }
        }
        u
    }

    pub fn farfield_at(&self, xh: Point, med: &ElasticMedium) -> (Complex64, Complex64) {
        self.sources.iter().zip(&self.coefficients).fold((ZERO, ZERO), |acc, (y, c)| {
            let (a, b) = point_source_farfield_at(*y, c, med, xh);
            (acc.0 + a, acc.1 + b)
        })
    }
}

/// Factored MFS system for one geometry and medium, reusable across incident waves.
pub struct MfsOperator {
    pub obstacle: Obstacle,
    pub medium: ElasticMedium,
    pub params: MfsParams,
    pub sources: Vec<Point>,
    pub collocation: Vec<Point>,
    pub validation: Vec<Point>,
    row_weights: Vec<f64>,
    u: DMatrix<Complex64>,
    sigma: Vec<f64>,
    v_t: DMatrix<Complex64>,
    pub rank: usize,
    pub condition: f64,
}

impl MfsOperator {
    pub fn new(obstacle: &Obstacle, med: &ElasticMedium, params: MfsParams) -> Result<Self> {
        params.validate(obstacle)?;
        if med.omega <= 0.0 {
            return Err(Error::InvalidMedium("MFS needs omega > 0".into()));
        }
        let c = obstacle.centroid();
        let mut sources: Vec<Point> = (0..params.n_sources)
            .map(|j| {
                let b = obstacle.boundary_point((j as f64 + 0.5) / params.n_sources as f64);
                [c[0] + params.retraction_factor * (b[0] - c[0]), c[1] + params.retraction_factor * (b[1] - c[1])]
            })
            .collect();
        if let Obstacle::Polygon(p) = obstacle {
            sources.extend(corner_sources(p, params.corner_sources));
        }
        if let Some(y) = sources.iter().find(|y| !obstacle.contains(**y)) {
            return Err(Error::Geometry(format!("source {y:?} is not interior; the obstacle is not star-shaped about its centroid")));
        }
        let nodes = collocation_nodes(obstacle, params.n_collocation, params.corner_sources);
        let nc = nodes.len();
        let collocation: Vec<Point> = nodes.iter().map(|s| obstacle.boundary_point(*s)).collect();
        let validation: Vec<Point> = (0..nc)
            .flat_map(|i| {
                let a = nodes[i];
                let b = if i + 1 < nc { nodes[i + 1] } else { nodes[0] + 1.0 };
                (0..4).map(move |k| a + (b - a) * (k as f64 + 0.5) / 4.0)
            })
            .map(|s| obstacle.boundary_point(s))
            .collect();

        // square roots of the arclength spacing, so the fit approximates the boundary L^2 norm
        let row_weights: Vec<f64> = (0..nc)
            .map(|i| {
                let next = if i + 1 < nc { nodes[i + 1] } else { nodes[0] + 1.0 };
                let prev = if i > 0 { nodes[i - 1] } else { nodes[nc - 1] - 1.0 };
                (0.5 * (next - prev)).sqrt()
            })
            .collect();
        let ns = sources.len();
        let rows: Vec<Vec<[[Complex64; 2]; 2]>> = collocation
            .par_iter()
            .map(|x| sources.iter().map(|y| navier_phiomega(*x, *y, med).map(|t| t.0)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        let mut a = DMatrix::<Complex64>::zeros(2 * nc, 2 * ns);
        for (i, row) in rows.iter().enumerate() {
            for (j, t) in row.iter().enumerate() {
                for p in 0..2 {
                    for q in 0..2 {
                        a[(2 * i + p, 2 * j + q)] = t[p][q] * row_weights[i];
                    }
                }
            }
        }
        let svd = a.svd(true, true);
        let u = svd.u.ok_or_else(|| Error::InvalidInput("SVD did not return U".into()))?;
        let v_t = svd.v_t.ok_or_else(|| Error::InvalidInput("SVD did not return V".into()))?;
        let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
        let smax = sigma.iter().copied().fold(0.0, f64::max);
        let rank = sigma.iter().filter(|s| **s > params.svd_cutoff * smax).count();
        let smin = sigma.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(MfsOperator {
            obstacle: obstacle.clone(),
            medium: *med,
            params,
            sources,
            collocation,
            validation,
            row_weights,
            u,
            sigma,
            v_t,
            rank,
            condition: smax / smin,
        })
    }

    fn pinv_apply(&self, b: &DVector<Complex64>) -> DVector<Complex64> {
        let smax = self.sigma.iter().copied().fold(0.0, f64::max);
        let mut t = self.u.adjoint() * b;
        for (k, s) in self.sigma.iter().enumerate() {
            t[k] = if *s > self.params.svd_cutoff * smax { t[k] / *s } else { ZERO };
        }
        self.v_t.adjoint() * t
    }

    pub fn solve(&self, pw: &PlaneWave) -> Result<ScatterSolution> {
        let inc = pw.field(&self.medium);
        let mut b = DVector::<Complex64>::zeros(2 * self.collocation.len());
        for (i, x) in self.collocation.iter().enumerate() {
            let v = inc.value(*x);
            b[2 * i] = -v[0] * self.row_weights[i];
            b[2 * i + 1] = -v[1] * self.row_weights[i];
        }
        let coef = self.pinv_apply(&b);
        let coefficients = (0..self.sources.len()).map(|j| [coef[2 * j], coef[2 * j + 1]]).collect();
        let mfs = MfsSolution { sources: self.sources.clone(), coefficients };
        let mut sol = ScatterSolution {
            obstacle: self.obstacle.clone(),
            incident: *pw,
            medium: self.medium,
            representation: Representation::Mfs(mfs),
            boundary_residual: 0.0,
            warnings: Vec::new(),
        };
        sol.boundary_residual = self.validation.par_iter().map(|x| cnorm(&sol.total(*x))).reduce(|| 0.0, f64::max);
        if !sol.boundary_residual.is_finite() {
            return Err(Error::InvalidInput("MFS solution is not finite".into()));
        }
        if sol.boundary_residual > self.params.warn_residual {
            sol.warnings.push(format!(
                "boundary residual {:.3e} exceeds {:.1e} (rank {} of {}, condition {:.2e})",
                sol.boundary_residual,
                self.params.warn_residual,
                self.rank,
                self.sigma.len(),
                self.condition
            ));
        }
        Ok(sol)
    }
}

/// Distances `scale * exp(-sigma (sqrt(n) - sqrt(k)))`, `k = 1..=n`.
fn graded(n: usize, scale: f64) -> impl Iterator<Item = f64> {
    let sn = (n as f64).sqrt();
    (1..=n).map(move |k| scale * (-CORNER_GRADING * (sn - (k as f64).sqrt())).exp())
}

fn corner_sources(p: &PolygonObstacle, per_corner: usize) -> Vec<Point> {
    let nv = p.vertices.len();
    let mut out = Vec::with_capacity(per_corner * nv);
    for i in 0..nv {
        let v = p.vertices[i];
        let prev = p.vertices[(i + nv - 1) % nv];
        let next = p.vertices[(i + 1) % nv];
        let e1 = [prev[0] - v[0], prev[1] - v[1]];
        let e2 = [next[0] - v[0], next[1] - v[1]];
        let (l1, l2) = (e1[0].hypot(e1[1]), e2[0].hypot(e2[1]));
        let mut b = [e1[0] / l1 + e2[0] / l2, e1[1] / l1 + e2[1] / l2];
        let lb = b[0].hypot(b[1]);
        b = if lb > 1e-12 { [b[0] / lb, b[1] / lb] } else { [-e2[1] / l2, e2[0] / l2] };
        // bisector of a reflex interior angle points out of the obstacle
        if cross2(e2, e1) < 0.0 {
            b = [-b[0], -b[1]];
        }
        let scale = 0.5 * l1.min(l2);
        let half = 0.5 * interior_angle(e1, e2);
        for d in graded(per_corner, scale) {
            for f in CORNER_FAN {
                let (c, s) = ((f * half).cos(), (f * half).sin());
                let dir = [c * b[0] - s * b[1], s * b[0] + c * b[1]];
                out.push([v[0] + d * dir[0], v[1] + d * dir[1]]);
            }
        }
    }
    out
}

/// Interior angle at a vertex with edge vectors `e1` (to previous) and `e2` (to next).
fn interior_angle(e1: Point, e2: Point) -> f64 {
    cross2(e2, e1).atan2(e2[0] * e1[0] + e2[1] * e1[1]).rem_euclid(2.0 * std::f64::consts::PI)
}

fn cross2(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Sorted arclength fractions of the collocation nodes.
///
/// Polygons get `2 x per_corner` extra nodes on each side of every vertex,
/// clustered like the corner sources.
fn collocation_nodes(obstacle: &Obstacle, n_total: usize, per_corner: usize) -> Vec<f64> {
    let p = match obstacle {
        Obstacle::Polygon(p) if per_corner > 0 => p,
        _ => return (0..n_total).map(|i| i as f64 / n_total as f64).collect(),
    };
    let nv = p.vertices.len();
    let perim = p.perimeter();
    let mut starts = Vec::with_capacity(nv);
    let mut acc = 0.0;
    for i in 0..nv {
        starts.push(acc / perim);
        let a = p.vertices[i];
        let b = p.vertices[(i + 1) % nv];
        acc += (b[0] - a[0]).hypot(b[1] - a[1]);
    }
    let n_graded = 2 * per_corner;
    let n_uniform = n_total.saturating_sub(2 * nv * n_graded).max(nv);
    let mut s: Vec<f64> = (0..n_uniform).map(|i| i as f64 / n_uniform as f64).collect();
    for i in 0..nv {
        let len = if i + 1 < nv { starts[i + 1] - starts[i] } else { 1.0 - starts[i] };
        let next_start = starts[i] + len;
        for d in graded(n_graded, 0.5 * len) {
            if d < 0.5 * len {
                s.push(starts[i] + d);
                s.push(next_start - d);
            }
        }
    }
    s.iter_mut().for_each(|v| *v = v.rem_euclid(1.0));
    s.sort_by(f64::total_cmp);
    s.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    s
}

/// One-shot MFS solve.
pub fn mfs_solve(obstacle: &Obstacle, pw: &PlaneWave, med: &ElasticMedium, params: MfsParams) -> Result<ScatterSolution> {
    MfsOperator::new(obstacle, med, params)?.solve(pw)
}
