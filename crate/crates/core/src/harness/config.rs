//! Scene configuration: JSON, unknown keys rejected, errors carry field paths.

use crate::elastic::{ElasticMedium, PlaneWave};
use crate::error::{Error, Result};
use crate::factorization::{PicardConfig, SamplingGeometry, Truncation};
use crate::forward::{DiskObstacle, MfsParams, Obstacle, PolygonObstacle, ScanGrid};
use crate::field::Point;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumConfig {
    pub lambda: f64,
    pub mu: f64,
    pub omega: f64,
}

/// Incident plane wave; angles in radians, amplitudes as `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncidentConfig {
    pub theta_inc: f64,
    pub c_p: [f64; 2],
    pub c_s: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObstacleConfig {
    Disk { center: Point, radius: f64 },
    Polygon { vertices: Vec<Point> },
    RegularPolygon { sides: usize, center: Point, circumradius: f64, rotation: f64 },
}

/// `m` far-field directions; sampling centers on the circle of radius `radius`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementConfig {
    pub m: usize,
    pub radius: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub level: f64,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig { level: 0.0, seed: 1 }
    }
}

fn d_n_theta() -> usize {
    64
}
fn d_h_step() -> f64 {
    0.03
}
fn d_grid_n() -> usize {
    64
}
fn d_grid_half_width() -> f64 {
    2.0
}
fn d_polarization() -> f64 {
    0.0
}
fn d_lsm_alpha() -> f64 {
    1e-8
}
fn d_nodal_grid_n() -> usize {
    200
}
fn d_nodal_half_width() -> f64 {
    3.0
}
fn d_nodal_tol() -> f64 {
    1e-3
}
fn d_probes() -> usize {
    20
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    /// Relative eigenvalue cutoff; `None` picks the noise-dependent default.
    #[serde(default)]
    pub truncation_rho: Option<f64>,
    /// Fixed retained-mode count; overrides `truncation_rho`.
    #[serde(default)]
    pub retained_modes: Option<usize>,
    #[serde(default = "d_n_theta")]
    pub n_theta: usize,
    #[serde(default = "d_h_step")]
    pub h_step: f64,
    /// Indicator grid is `grid_n x grid_n` on `[-w, w]^2`.
    #[serde(default = "d_grid_n")]
    pub grid_n: usize,
    #[serde(default = "d_grid_half_width")]
    pub grid_half_width: f64,
    /// Point-source polarization angle for the full-aperture indicator.
    #[serde(default = "d_polarization")]
    pub polarization: f64,
    #[serde(default = "d_lsm_alpha")]
    pub lsm_alpha: f64,
    /// Sampling angles of the `lsm-compare` curves; empty means `[0]`.
    #[serde(default)]
    pub lsm_thetas: Vec<f64>,
    #[serde(default = "d_nodal_grid_n")]
    pub nodal_grid_n: usize,
    #[serde(default = "d_nodal_half_width")]
    pub nodal_half_width: f64,
    #[serde(default = "d_nodal_tol")]
    pub nodal_tol: f64,
    /// Navier reflection probes; the Lame check uses 50 and the Helmholtz check 30.
    #[serde(default = "d_probes")]
    pub reflection_probes: usize,
    /// Disk series truncation; `None` picks the radius-dependent default.
    #[serde(default)]
    pub series_terms: Option<usize>,
    #[serde(default)]
    pub mfs: Option<MfsParams>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub name: String,
    pub medium: MediumConfig,
    pub incident: IncidentConfig,
    pub obstacle: ObstacleConfig,
    pub measurement: MeasurementConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub solver: SolverConfig,
}

/// A validated scene with its derived objects.
#[derive(Clone, Debug)]
pub struct Scene {
    pub config: SceneConfig,
    pub medium: ElasticMedium,
    pub incident: PlaneWave,
    pub obstacle: Obstacle,
}

fn positive(path: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(path, format!("must be positive and finite, got {v}")))
    }
}

fn finite(path: &str, v: &[f64]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::config(path, "must be finite"))
    }
}

impl SceneConfig {
    /// Parses JSON; syntax and type errors report the offending field path.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(if path == "." || path == "?" { "(root)".to_string() } else { path }, e.into_inner().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("(file)", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn obstacle(&self) -> Result<Obstacle> {
        let geo = |e: Error| Error::config("obstacle", e.to_string());
        match &self.obstacle {
            ObstacleConfig::Disk { center, radius } => {
                finite("obstacle.center", center)?;
                positive("obstacle.radius", *radius)?;
                Ok(Obstacle::Disk(DiskObstacle::new(*center, *radius).map_err(geo)?))
            }
            ObstacleConfig::Polygon { vertices } => {
                for (i, v) in vertices.iter().enumerate() {
                    finite(&format!("obstacle.vertices[{i}]"), v)?;
                }
                Ok(Obstacle::Polygon(PolygonObstacle::new(vertices.clone()).map_err(geo)?))
            }
            ObstacleConfig::RegularPolygon { sides, center, circumradius, rotation } => {
                if !(3..=4096).contains(sides) {
                    return Err(Error::config("obstacle.sides", "must lie in 3..=4096"));
                }
                finite("obstacle.center", center)?;
                positive("obstacle.circumradius", *circumradius)?;
                finite("obstacle.rotation", &[*rotation])?;
                Ok(Obstacle::Polygon(PolygonObstacle::regular(*sides, *center, *circumradius, *rotation).map_err(geo)?))
            }
        }
    }

    /// Checks every precondition the commands rely on.
    pub fn validate(&self) -> Result<Scene> {
        if self.name.is_empty() {
            return Err(Error::config("name", "must not be empty"));
        }
        let mc = &self.medium;
        finite("medium", &[mc.lambda, mc.mu, mc.omega])?;
        positive("medium.omega", mc.omega)?;
        let medium = ElasticMedium::new(mc.lambda, mc.mu, mc.omega).map_err(|e| Error::config("medium", e.to_string()))?;
        let ic = &self.incident;
        finite("incident.theta_inc", &[ic.theta_inc])?;
        finite("incident.c_p", &ic.c_p)?;
        finite("incident.c_s", &ic.c_s)?;
        let incident = PlaneWave::new(
            ic.theta_inc,
            Complex64::new(ic.c_p[0], ic.c_p[1]),
            Complex64::new(ic.c_s[0], ic.c_s[1]),
        )
        .map_err(|e| Error::config("incident", e.to_string()))?;
        let obstacle = self.obstacle()?;
        let ms = &self.measurement;
        if ms.m < 16 || ms.m % 2 != 0 {
            return Err(Error::config("measurement.m", format!("must be even and at least 16, got {}", ms.m)));
        }
        positive("measurement.radius", ms.radius)?;
        let extent = obstacle.extent_from_origin();
        if extent >= ms.radius {
            return Err(Error::config(
                "measurement.radius",
                format!("obstacle reaches |x| = {extent}, not strictly inside R = {}", ms.radius),
            ));
        }
        if !(self.noise.level >= 0.0 && self.noise.level.is_finite()) {
            return Err(Error::config("noise.level", format!("must be nonnegative, got {}", self.noise.level)));
        }
        let s = &self.solver;
        if let Some(rho) = s.truncation_rho {
            if !(rho > 0.0 && rho < 1.0) {
                return Err(Error::config("solver.truncation_rho", format!("must lie in (0, 1), got {rho}")));
            }
        }
        if let Some(n) = s.retained_modes {
            if n == 0 || n > 2 * ms.m {
                return Err(Error::config("solver.retained_modes", format!("must lie in 1..={}", 2 * ms.m)));
            }
        }
        if s.n_theta == 0 {
            return Err(Error::config("solver.n_theta", "must be at least 1"));
        }
        positive("solver.h_step", s.h_step)?;
        if s.h_step > 2.0 * ms.radius {
            return Err(Error::config("solver.h_step", "must not exceed 2R"));
        }
        if s.grid_n < 2 {
            return Err(Error::config("solver.grid_n", "must be at least 2"));
        }
        positive("solver.grid_half_width", s.grid_half_width)?;
        finite("solver.polarization", &[s.polarization])?;
        positive("solver.lsm_alpha", s.lsm_alpha)?;
        for (i, t) in s.lsm_thetas.iter().enumerate() {
            finite(&format!("solver.lsm_thetas[{i}]"), &[*t])?;
        }
        if s.nodal_grid_n < 2 {
            return Err(Error::config("solver.nodal_grid_n", "must be at least 2"));
        }
        positive("solver.nodal_half_width", s.nodal_half_width)?;
        positive("solver.nodal_tol", s.nodal_tol)?;
        if s.reflection_probes == 0 {
            return Err(Error::config("solver.reflection_probes", "must be at least 1"));
        }
        if s.series_terms == Some(0) {
            return Err(Error::config("solver.series_terms", "must be at least 1"));
        }
        if let Some(p) = &s.mfs {
            if p.n_sources == 0 || p.n_collocation < 2 * p.total_sources(&obstacle) {
                return Err(Error::config("solver.mfs", "needs sources and at least twice as many collocation points"));
            }
            if !(p.retraction_factor > 0.0 && p.retraction_factor < 1.0) {
                return Err(Error::config("solver.mfs.retraction_factor", "must lie in (0, 1)"));
            }
        }
        Ok(Scene { config: self.clone(), medium, incident, obstacle })
    }
}

impl Scene {
    pub fn geometry(&self) -> SamplingGeometry {
        let s = &self.config.solver;
        SamplingGeometry { radius: self.config.measurement.radius, n_theta: s.n_theta, h_step: s.h_step }
    }

    pub fn picard(&self) -> PicardConfig {
        let s = &self.config.solver;
        let mut cfg = PicardConfig::for_noise(self.config.noise.level);
        if let Some(rho) = s.truncation_rho {
            cfg.truncation = Truncation::Relative(rho);
        }
        if let Some(n) = s.retained_modes {
            cfg.truncation = Truncation::Fixed(n);
        }
        cfg
    }

    pub fn grid(&self) -> ScanGrid {
        let (w, n) = (self.config.solver.grid_half_width, self.config.solver.grid_n);
        ScanGrid { min: [-w, -w], max: [w, w], nx: n, ny: n }
    }

    pub fn nodal_grid(&self) -> ScanGrid {
        let (w, n) = (self.config.solver.nodal_half_width, self.config.solver.nodal_grid_n);
        ScanGrid { min: [-w, -w], max: [w, w], nx: n, ny: n }
    }

    pub fn mfs_params(&self) -> MfsParams {
        self.config.solver.mfs.unwrap_or_else(|| MfsParams::for_obstacle(&self.obstacle))
    }
}

/// Names accepted by [`bundled_scene`].
pub const BUNDLED_SCENES: [&str; 3] = ["off_center_disk", "unit_square", "equilateral_triangle"];

/// The reference scenes: medium (2, 1, 1), M = 64, R = 3, pure P-wave incidence.
pub fn bundled_scene(name: &str) -> Option<SceneConfig> {
    let (obstacle, theta_inc) = match name {
        "off_center_disk" => (ObstacleConfig::Disk { center: [0.5, 0.0], radius: 0.7 }, FRAC_PI_2),
        "unit_square" => (
            ObstacleConfig::Polygon { vertices: vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]] },
            0.6,
        ),
        "equilateral_triangle" => (
            ObstacleConfig::RegularPolygon { sides: 3, center: [0.0, 0.0], circumradius: 1.0, rotation: FRAC_PI_2 },
            FRAC_PI_2,
        ),
        _ => return None,
    };
    let solver = SolverConfig {
        grid_n: if name == "equilateral_triangle" { 96 } else { 64 },
        ..SolverConfig::default()
    };
    Some(SceneConfig {
        name: name.to_string(),
        medium: MediumConfig { lambda: 2.0, mu: 1.0, omega: 1.0 },
        incident: IncidentConfig { theta_inc, c_p: [1.0, 0.0], c_s: [0.0, 0.0] },
        obstacle,
        measurement: MeasurementConfig { m: 64, radius: 3.0 },
        noise: NoiseConfig::default(),
        solver,
    })
}
