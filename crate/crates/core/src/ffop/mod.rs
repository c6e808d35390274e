//! Discretized far-field operator, its eigensystem and Herglotz waves.
//!
//! Operator-facing vectors scale channel `a` of a [`FarFieldPattern`] by
//! `sqrt(8 pi / k_a) e^{-i pi/4}`, and a unit `b`-wave input carries weight `k_b`.
//! In this basis the operator of a rigid obstacle is normal.

mod cache;
mod eigen;

pub use cache::{CacheEntry, CacheKey, SpectrumCache, CACHE_ENV, CACHE_SCHEMA};
pub use eigen::{
    conjugate_spectrum_translate, disk_spectrum_fast, disk_spectrum_robust, eigensystem, mode_transform, EigenSystem, ModeBlock,
    Provenance, RobustSpectrum, NORMALITY_LIMIT,
};

use crate::elastic::{direction_grid, unit, Channel, ElasticMedium, FarFieldPattern, PatternSource, PlaneWave};
use crate::error::{Error, Result};
use crate::field::{CVec2, Jet, Point, VectorField, ZERO};
use crate::forward::{default_truncation, disk_series_solve, farfield_of_solution, MfsOperator, MfsParams, Obstacle};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Per-channel factor from pattern normalization to operator normalization.
pub fn channel_scale(med: &ElasticMedium, channel: Channel) -> Complex64 {
    (8.0 * PI / med.wavenumber(channel)).sqrt() * Complex64::from_polar(1.0, -PI / 4.0)
}

/// Pattern flattened into the weighted operator basis (p block, then s block).
pub fn operator_vector(ffp: &FarFieldPattern, med: &ElasticMedium) -> DVector<Complex64> {
    let m = ffp.len();
    let (sp, ss) = (channel_scale(med, Channel::P), channel_scale(med, Channel::S));
    DVector::from_fn(2 * m, |i, _| {
        if i < m {
            ffp.up[i] * sp * ffp.weights[i].sqrt()
        } else {
            ffp.us[i - m] * ss * ffp.weights[i - m].sqrt()
        }
    })
}

/// Inverse of [`operator_vector`] on the uniform grid.
pub fn pattern_from_operator_vector(v: &DVector<Complex64>, med: &ElasticMedium) -> FarFieldPattern {
    let m = v.len() / 2;
    let mut ffp = FarFieldPattern::zeros(m);
    let (sp, ss) = (channel_scale(med, Channel::P), channel_scale(med, Channel::S));
    for i in 0..m {
        let sw = ffp.weights[i].sqrt();
        ffp.up[i] = v[i] / (sp * sw);
        ffp.us[i] = v[m + i] / (ss * sw);
    }
    ffp.source = PatternSource::Other;
    ffp
}

/// Weighted-basis matrix of the far-field operator on `M` uniform directions.
#[derive(Clone, Debug)]
pub struct FarFieldOperator {
    pub m: usize,
    pub directions: Vec<Point>,
    pub weights: Vec<f64>,
    pub matrix: DMatrix<Complex64>,
    pub normality_defect: f64,
}

impl FarFieldOperator {
    /// Builds the operator from its `2M` column patterns: column `beta * M + m'` is
    /// the pattern for a unit `beta`-wave incident from direction `m'`.
    pub fn from_columns(columns: &[FarFieldPattern], med: &ElasticMedium) -> Result<Self> {
        if columns.len() % 2 != 0 || columns.is_empty() {
            return Err(Error::InvalidInput("need 2M column patterns".into()));
        }
        let m = columns.len() / 2;
        let mut a = DMatrix::<Complex64>::zeros(2 * m, 2 * m);
        let w = 2.0 * PI / m as f64;
        for (j, col) in columns.iter().enumerate() {
            if col.len() != m {
                return Err(Error::InvalidInput(format!("column {j} has {} directions, expected {m}", col.len())));
            }
            let k = if j < m { med.k_p } else { med.k_s };
            let v = operator_vector(col, med) * Complex64::from(k * w.sqrt());
            a.set_column(j, &v);
        }
        let normality_defect = normality_defect(&a);
        Ok(FarFieldOperator { m, directions: direction_grid(m), weights: vec![w; m], matrix: a, normality_defect })
    }

    /// Wraps an operator-basis matrix of size `2M x 2M` on the uniform grid.
    pub fn from_matrix(matrix: DMatrix<Complex64>) -> Result<Self> {
        let n = matrix.nrows();
        if n != matrix.ncols() || n % 2 != 0 || n == 0 {
            return Err(Error::InvalidInput(format!("operator matrix must be square of even size, got {n}x{}", matrix.ncols())));
        }
        let m = n / 2;
        let normality_defect = normality_defect(&matrix);
        Ok(FarFieldOperator { m, directions: direction_grid(m), weights: vec![2.0 * PI / m as f64; m], matrix, normality_defect })
    }

    pub fn apply(&self, g: &DVector<Complex64>) -> DVector<Complex64> {
        &self.matrix * g
    }
}

/// `|A A* - A* A|_F / |A|_F^2`.
pub fn normality_defect(a: &DMatrix<Complex64>) -> f64 {
    let ah = a.adjoint();
    let c = a * &ah - &ah * a;
    let n = a.norm();
    if n == 0.0 {
        0.0
    } else {
        c.norm() / (n * n)
    }
}

/// Column patterns for pure P then pure S incidence from each of the `m` directions.
pub fn farfield_columns(obstacle: &Obstacle, med: &ElasticMedium, m: usize) -> Result<Vec<FarFieldPattern>> {
    let dirs = direction_grid(m);
    let incidents: Vec<PlaneWave> = [Channel::P, Channel::S]
        .iter()
        .flat_map(|ch| (0..m).map(move |k| PlaneWave::channel(2.0 * PI * k as f64 / m as f64, *ch)))
        .collect();
    let wrap = |index: usize| move |e: Error| Error::ForwardFailure { index, source: Box::new(e) };
    match obstacle {
        Obstacle::Disk(d) => incidents
            .par_iter()
            .enumerate()
            .map(|(j, pw)| {
                let sol = disk_series_solve(d, pw, med, default_truncation(d.radius, med)).map_err(wrap(j % m))?;
                Ok(farfield_of_solution(&sol, &dirs))
            })
            .collect(),
        Obstacle::Polygon(_) => {
            let op = MfsOperator::new(obstacle, med, MfsParams::for_obstacle(obstacle))?;
            incidents
                .par_iter()
                .enumerate()
                .map(|(j, pw)| Ok(farfield_of_solution(&op.solve(pw).map_err(wrap(j % m))?, &dirs)))
                .collect()
        }
    }
}

/// Assembles the operator of `obstacle` from `2M` forward solves.
pub fn assemble_f(obstacle: &Obstacle, med: &ElasticMedium, m: usize) -> Result<FarFieldOperator> {
    if m < 16 || m % 2 != 0 {
        return Err(Error::InvalidInput(format!("M must be even and at least 16, got {m}")));
    }
    FarFieldOperator::from_columns(&farfield_columns(obstacle, med, m)?, med)
}

/// Herglotz density on the uniform grid: `gp[m]`, `gs[m]` at direction `m`.
#[derive(Clone, Debug, PartialEq)]
pub struct HerglotzDensity {
    pub gp: Vec<Complex64>,
    pub gs: Vec<Complex64>,
}

impl HerglotzDensity {
    pub fn zeros(m: usize) -> Self {
        HerglotzDensity { gp: vec![ZERO; m], gs: vec![ZERO; m] }
    }

    /// Density whose operator-basis vector is `v` (p block then s block).
    pub fn from_weighted(v: &DVector<Complex64>, med: &ElasticMedium) -> Self {
        let m = v.len() / 2;
        let sw = (2.0 * PI / m as f64).sqrt();
        HerglotzDensity {
            gp: (0..m).map(|i| v[i] * med.k_p / sw).collect(),
            gs: (0..m).map(|i| v[m + i] * med.k_s / sw).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.gp.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gp.is_empty()
    }
}

/// `Hg(x)` by the trapezoid rule on the uniform direction grid.
pub fn herglotz_eval(g: &HerglotzDensity, med: &ElasticMedium, x: Point) -> CVec2 {
    HerglotzField { g: g.clone(), med: *med }.value(x)
}

#[derive(Clone, Debug)]
pub struct HerglotzField {
    pub g: HerglotzDensity,
    pub med: ElasticMedium,
}

impl VectorField for HerglotzField {
    fn value(&self, x: Point) -> CVec2 {
        self.analytic_jet(x).expect("analytic").value
    }

    fn analytic_jet(&self, x: Point) -> Option<Jet> {
        let m = self.g.len();
        let w = 2.0 * PI / m as f64;
        let mut j = Jet::zero();
        for k in 0..m {
            let d = unit(2.0 * PI * k as f64 / m as f64);
            if self.g.gp[k] != ZERO {
                j = j + crate::elastic::plane_jet(self.g.gp[k] * w, d, self.med.k_p, d, x);
            }
            if self.g.gs[k] != ZERO {
                j = j + crate::elastic::plane_jet(self.g.gs[k] * w, crate::elastic::perp(d), self.med.k_s, d, x);
            }
        }
        Some(j)
    }
}
