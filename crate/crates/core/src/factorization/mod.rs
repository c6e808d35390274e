//! Picard-criterion indicators: full-aperture W(y), single-wave W(h, theta), I(y),
//! the Picard density and a Tikhonov baseline.

mod grid;

pub use grid::IndicatorGrid;

use crate::elastic::{direction_grid, ElasticMedium, FarFieldPattern};
use crate::error::{Error, Result};
use crate::ffop::{conjugate_spectrum_translate, mode_transform, operator_vector, EigenSystem, SpectrumCache};
use crate::field::Point;
use crate::forward::{Obstacle, ScanGrid};
use crate::green::farfield_point_source;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Which eigenpairs enter a truncated Picard series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Truncation {
    /// The `N` largest eigenvalues.
    Fixed(usize),
    /// Eigenvalues with `|eta_n| >= rho |eta_1|`.
    Relative(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PicardConfig {
    pub truncation: Truncation,
    #[serde(default)]
    pub noise: f64,
}

/// Relative cutoff for noiseless data.
pub const NOISELESS_RHO: f64 = 1e-12;

impl PicardConfig {
    /// Relative cutoff `1e-12` without noise, `10 eps` with noise level `eps`.
    pub fn for_noise(noise: f64) -> Self {
        let rho = if noise > 0.0 { 10.0 * noise } else { NOISELESS_RHO };
        PicardConfig { truncation: Truncation::Relative(rho), noise }
    }

    pub fn fixed(n: usize) -> Self {
        PicardConfig { truncation: Truncation::Fixed(n), noise: 0.0 }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(Error::config("noise", "must be a finite number >= 0"));
        }
        match self.truncation {
            Truncation::Fixed(n) if n == 0 || n > dim => {
                Err(Error::config("truncation.fixed", format!("must be in 1..={dim}, got {n}")))
            }
            Truncation::Relative(r) if !(r > 0.0 && r < 1.0) => {
                Err(Error::config("truncation.relative", format!("must lie in (0, 1), got {r}")))
            }
            _ => Ok(()),
        }
    }

    /// Number of leading entries of `values` (sorted by decreasing modulus) retained.
    pub fn retained(&self, values: &[Complex64]) -> usize {
        match self.truncation {
            Truncation::Fixed(n) => n.min(values.len()),
            Truncation::Relative(rho) => {
                let top = values.first().map(|v| v.norm()).unwrap_or(0.0);
                values.iter().take_while(|v| v.norm() >= rho * top && v.norm() > 0.0).count()
            }
        }
    }
}

/// Truncated Picard series `S = sum |<phi_n, psi>|^2 / |eta_n|` and `W = 1/S`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PicardSum {
    pub s: f64,
    /// `1/S`; `+inf` when `S = 0` and `0` when `S` overflows.
    pub w: f64,
    pub retained: usize,
    /// Partial sums after each retained mode.
    pub partial: Vec<f64>,
}

impl PicardSum {
    /// `S_N / S_{N-k}`: growth over the last `k` retained modes.
    pub fn tail_growth(&self, k: usize) -> f64 {
        let n = self.partial.len();
        if n <= k {
            return f64::NAN;
        }
        self.partial[n - 1] / self.partial[n - 1 - k]
    }

    /// `(S_N - S_{N-k}) / S_N`.
    pub fn tail_increment(&self, k: usize) -> f64 {
        let n = self.partial.len();
        if n <= k {
            return f64::NAN;
        }
        (self.partial[n - 1] - self.partial[n - 1 - k]) / self.partial[n - 1]
    }
}

fn inverse(s: f64) -> f64 {
    if s == 0.0 {
        f64::INFINITY
    } else if s.is_finite() {
        1.0 / s
    } else {
        0.0
    }
}

/// Picard sum from eigenvalues and precomputed coefficients, both in sorted order.
pub fn picard_from_coefficients(values: &[Complex64], coefs: &[Complex64], cfg: &PicardConfig) -> Result<PicardSum> {
    let n = cfg.retained(values);
    if n == 0 {
        return Err(Error::EmptyRetention);
    }
    let mut partial = Vec::with_capacity(n);
    let mut s = 0.0;
    for k in 0..n {
        s += coefs[k].norm_sqr() / values[k].norm();
        partial.push(s);
    }
    Ok(PicardSum { s, w: inverse(s), retained: n, partial })
}

pub fn picard_sum(es: &EigenSystem, psi: &DVector<Complex64>, cfg: &PicardConfig) -> Result<PicardSum> {
    picard_from_coefficients(&es.values, &es.coefficients(psi), cfg)
}

/// Truncated Picard solution `g = sum <phi_n, psi> / sqrt|eta_n| phi_n` in the operator basis.
pub fn picard_solution_g(es: &EigenSystem, psi: &DVector<Complex64>, cfg: &PicardConfig) -> Result<DVector<Complex64>> {
    let n = cfg.retained(&es.values);
    if n == 0 {
        return Err(Error::EmptyRetention);
    }
    let coefs = es.coefficients(psi);
    let mut g = DVector::zeros(psi.len());
    for k in 0..n {
        g += es.vector(k) * (coefs[k] / es.values[k].norm().sqrt());
    }
    Ok(g)
}

/// `(A* A)^{p/2} v = sum |eta_n|^p <phi_n, v> phi_n` over the whole eigensystem.
pub fn spectral_power_apply(es: &EigenSystem, v: &DVector<Complex64>, p: f64) -> DVector<Complex64> {
    let coefs = es.coefficients(v);
    let mut out = DVector::zeros(v.len());
    for (k, c) in coefs.iter().enumerate() {
        let e = es.values[k].norm();
        if e > 0.0 {
            out += es.vector(k) * (c * e.powf(p));
        }
    }
    out
}

/// Sampling circle of radius `radius` with `n_theta` centers `z = R (cos theta, sin theta)`
/// and sampling radii on a grid of spacing `h_step` in `(0, 2R]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingGeometry {
    pub radius: f64,
    pub n_theta: usize,
    pub h_step: f64,
}

impl SamplingGeometry {
    pub fn new(radius: f64, n_theta: usize, h_step: f64) -> Result<Self> {
        let g = SamplingGeometry { radius, n_theta, h_step };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::config("sampling.radius", "must be positive"));
        }
        if self.n_theta == 0 {
            return Err(Error::config("sampling.n_theta", "must be at least 1"));
        }
        if !(self.h_step > 0.0 && self.h_step <= 2.0 * self.radius) {
            return Err(Error::config("sampling.h_step", "must lie in (0, 2R]"));
        }
        Ok(())
    }

    /// Checks that the obstacle lies in the open disk of radius `R`.
    pub fn check_contains(&self, obstacle: &Obstacle) -> Result<()> {
        let e = obstacle.extent_from_origin();
        if e >= self.radius {
            return Err(Error::config("sampling.radius", format!("obstacle reaches |x| = {e}, outside R = {}", self.radius)));
        }
        Ok(())
    }

    pub fn thetas(&self) -> Vec<f64> {
        (0..self.n_theta).map(|j| 2.0 * PI * j as f64 / self.n_theta as f64).collect()
    }

    pub fn center(&self, theta: f64) -> Point {
        [self.radius * theta.cos(), self.radius * theta.sin()]
    }

    /// `h_k = k h_step` for `k = 1..=K` with `h_K` the last node not above `2R`.
    pub fn h_grid(&self) -> Vec<f64> {
        let k = ((2.0 * self.radius / self.h_step) * (1.0 + 1e-12)).floor() as usize;
        (1..=k.max(1)).map(|i| i as f64 * self.h_step).collect()
    }
}

/// `W(h, theta)` with the radius actually used and tail diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingleWaveValue {
    pub h: f64,
    pub h_used: f64,
    pub theta: f64,
    pub sum: PicardSum,
}

impl SingleWaveValue {
    pub fn perturbed(&self) -> bool {
        self.h_used != self.h
    }
}

/// Test vector of a measured pattern in the operator basis.
pub fn data_vector(uinf: &FarFieldPattern, med: &ElasticMedium) -> DVector<Complex64> {
    operator_vector(uinf, med)
}

fn check_radius(h: f64, geom: &SamplingGeometry) -> Result<()> {
    if !(h > 0.0 && h <= 2.0 * geom.radius * (1.0 + 1e-12)) {
        return Err(Error::InvalidInput(format!("sampling radius {h} outside (0, 2R]")));
    }
    Ok(())
}

/// `W(h, theta)` for the sampling disk `B(z(theta), h)` and one measured pattern.
pub fn single_wave_w(
    uinf: &FarFieldPattern,
    h: f64,
    theta: f64,
    geom: &SamplingGeometry,
    med: &ElasticMedium,
    cfg: &PicardConfig,
    cache: &SpectrumCache,
) -> Result<SingleWaveValue> {
    check_radius(h, geom)?;
    let rs = cache.get(h, med, uinf.len())?;
    let es = conjugate_spectrum_translate(&rs.spectrum, geom.center(theta))?;
    let sum = picard_sum(&es, &data_vector(uinf, med), cfg)?;
    Ok(SingleWaveValue { h, h_used: rs.h_used, theta, sum })
}

/// `S(h_k)` over the geometry's `h` grid at one angle, sharing the mode transform.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WProfile {
    pub theta: f64,
    pub h: Vec<f64>,
    /// `None` where the spectrum or the Picard sum failed.
    pub s: Vec<Option<f64>>,
    pub perturbed: usize,
}

impl WProfile {
    /// `W` at radius `h` by linear interpolation of `ln S` between grid nodes,
    /// clamped to the first and last nodes.
    pub fn w_at(&self, h: f64) -> Option<f64> {
        let step = self.h[0];
        let t = h / step;
        let last = self.h.len() - 1;
        if t <= 1.0 {
            return self.s[0].map(inverse);
        }
        if t >= (last + 1) as f64 {
            return self.s[last].map(inverse);
        }
        let i = (t.floor() as usize - 1).min(last - 1);
        let f = t - (i + 1) as f64;
        match (self.s[i], self.s[i + 1]) {
            (Some(a), Some(b)) if a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() => {
                Some(inverse((a.ln() * (1.0 - f) + b.ln() * f).exp()))
            }
            (Some(a), Some(b)) => Some(inverse(a) * (1.0 - f) + inverse(b) * f),
            (Some(a), None) => Some(inverse(a)),
            (None, Some(b)) => Some(inverse(b)),
            (None, None) => None,
        }
    }
}

pub fn w_profile(
    uinf: &FarFieldPattern,
    theta: f64,
    geom: &SamplingGeometry,
    med: &ElasticMedium,
    cfg: &PicardConfig,
    cache: &SpectrumCache,
) -> Result<WProfile> {
    let m = uinf.len();
    let psi = data_vector(uinf, med);
    let hat = mode_transform(&psi, m, geom.center(theta), [med.k_p, med.k_s]);
    let hs = geom.h_grid();
    let mut s = Vec::with_capacity(hs.len());
    let mut perturbed = 0;
    for &h in &hs {
        match cache.get(h, med, m) {
            Ok(rs) => {
                perturbed += usize::from(rs.perturbed());
                let coefs = rs.spectrum.coefficients_from_modes(&hat);
                s.push(picard_from_coefficients(&rs.spectrum.values, &coefs, cfg).ok().map(|p| p.s));
            }
            Err(Error::NearSingularMode { .. }) => s.push(None),
            Err(e) => return Err(e),
        }
    }
    Ok(WProfile { theta, h: hs, s, perturbed })
}

/// `I(y)` over a grid plus the sweep's bookkeeping.
#[derive(Clone, Debug, Serialize)]
pub struct IndicatorReport {
    pub grid: IndicatorGrid,
    pub profiles: usize,
    pub perturbed_radii: usize,
    pub failed_samples: usize,
}

/// `I(y) = 1 / int W(|y - z(theta)|, theta) d theta` by the trapezoid rule over the
/// geometry's angles; failed angles are dropped with renormalized weights.
pub fn indicator_i(
    uinf: &FarFieldPattern,
    grid: &ScanGrid,
    geom: &SamplingGeometry,
    med: &ElasticMedium,
    cfg: &PicardConfig,
    cache: &SpectrumCache,
) -> Result<IndicatorReport> {
    geom.validate()?;
    cfg.validate(2 * uinf.len())?;
    let thetas = geom.thetas();
    let profiles: Vec<WProfile> =
        thetas.par_iter().map(|&t| w_profile(uinf, t, geom, med, cfg, cache)).collect::<Result<_>>()?;
    let perturbed_radii = profiles.first().map(|p| p.perturbed).unwrap_or(0);
    let n = grid.nx * grid.ny;
    let cells: Vec<(Option<f64>, usize)> = (0..n)
        .into_par_iter()
        .map(|k| {
            let y = grid.point(k % grid.nx, k / grid.nx);
            let mut acc = 0.0;
            let mut used = 0;
            for p in &profiles {
                let z = geom.center(p.theta);
                if let Some(w) = p.w_at((y[0] - z[0]).hypot(y[1] - z[1])) {
                    acc += w;
                    used += 1;
                }
            }
            if used == 0 {
                return (None, thetas.len());
            }
            let integral = acc * 2.0 * PI / used as f64;
            (Some(inverse(integral)), thetas.len() - used)
        })
        .collect();
    let failed_samples = cells.iter().map(|c| c.1).sum();
    let grid = IndicatorGrid::from_cells(*grid, cells.into_iter().map(|c| c.0).collect());
    Ok(IndicatorReport { grid, profiles: profiles.len(), perturbed_radii, failed_samples })
}

/// Full-aperture indicator `W(y)` with `psi` the point-source pattern of polarization `p`.
pub fn classical_indicator(
    es: &EigenSystem,
    grid: &ScanGrid,
    p: [f64; 2],
    med: &ElasticMedium,
    cfg: &PicardConfig,
) -> Result<IndicatorGrid> {
    cfg.validate(es.len())?;
    let dirs = direction_grid(es.m);
    let cells: Vec<Option<f64>> = (0..grid.nx * grid.ny)
        .into_par_iter()
        .map(|k| {
            let y = grid.point(k % grid.nx, k / grid.nx);
            let psi = operator_vector(&farfield_point_source(y, p, med, &dirs), med);
            picard_sum(es, &psi, cfg).ok().map(|s| s.w)
        })
        .collect();
    Ok(IndicatorGrid::from_cells(*grid, cells))
}

/// Tikhonov solution of `A g = psi` with its norm and residual.
#[derive(Clone, Debug, PartialEq)]
pub struct LsmSolution {
    pub g: DVector<Complex64>,
    pub norm: f64,
    pub residual: f64,
}

/// `g = (A* A + alpha I)^{-1} A* psi` through the eigensystem of a normal operator.
pub fn lsm_spectral(es: &EigenSystem, psi: &DVector<Complex64>, alpha: f64) -> Result<LsmSolution> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidInput(format!("Tikhonov alpha must be positive, got {alpha}")));
    }
    let coefs = es.coefficients(psi);
    let mut g = DVector::zeros(psi.len());
    let mut res2 = psi.norm_squared() - coefs.iter().map(|c| c.norm_sqr()).sum::<f64>();
    for (k, c) in coefs.iter().enumerate() {
        let eta = es.values[k];
        let f = eta.conj() / (eta.norm_sqr() + alpha);
        g += es.vector(k) * (c * f);
        res2 += (c * (eta * f - 1.0)).norm_sqr();
    }
    Ok(LsmSolution { norm: g.norm(), g, residual: res2.max(0.0).sqrt() })
}

/// Dense Tikhonov solution through the SVD of `A`.
pub fn lsm_dense(a: &DMatrix<Complex64>, psi: &DVector<Complex64>, alpha: f64) -> Result<LsmSolution> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidInput(format!("Tikhonov alpha must be positive, got {alpha}")));
    }
    let svd = a.clone().svd(true, true);
    let (u, vt) = (svd.u.as_ref().expect("u"), svd.v_t.as_ref().expect("v_t"));
    let c = u.adjoint() * psi;
    let scaled = DVector::from_fn(c.len(), |i, _| c[i] * (svd.singular_values[i] / (svd.singular_values[i].powi(2) + alpha)));
    let g = vt.adjoint() * scaled;
    let residual = (a * &g - psi).norm();
    Ok(LsmSolution { norm: g.norm(), g, residual })
}
