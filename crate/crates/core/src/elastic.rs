//! Isotropic media, plane waves and sampled far-field patterns.

use crate::error::{Error, Result};
use crate::field::{CVec2, Jet, Point, VectorField};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ElasticMedium {
    pub lambda: f64,
    pub mu: f64,
    pub omega: f64,
    pub k_p: f64,
    pub k_s: f64,
    pub c_refl: f64,
}

impl ElasticMedium {
    pub fn new(lambda: f64, mu: f64, omega: f64) -> Result<Self> {
        if !(lambda.is_finite() && mu.is_finite() && omega.is_finite()) {
            return Err(Error::InvalidMedium("parameters must be finite".into()));
        }
        if mu <= 0.0 {
            return Err(Error::InvalidMedium(format!("mu must be positive, got {mu}")));
        }
        if lambda + 2.0 * mu <= 0.0 {
            return Err(Error::InvalidMedium(format!("lambda + 2 mu must be positive, got {}", lambda + 2.0 * mu)));
        }
        if omega <= 0.0 {
            return Err(Error::InvalidMedium(format!("omega must be positive, got {omega}")));
        }
        Ok(Self::derived(lambda, mu, omega))
    }

    /// Static (Lamé) medium: same constants, `omega = 0`, wavenumbers zero.
    pub fn lame(lambda: f64, mu: f64) -> Result<Self> {
        let m = Self::new(lambda, mu, 1.0)?;
        Ok(Self::derived(m.lambda, m.mu, 0.0))
    }

    fn derived(lambda: f64, mu: f64, omega: f64) -> Self {
        ElasticMedium {
            lambda,
            mu,
            omega,
            k_p: omega / (lambda + 2.0 * mu).sqrt(),
            k_s: omega / mu.sqrt(),
            c_refl: (lambda + mu) / (lambda + 3.0 * mu),
        }
    }

    /// Same constants at a different frequency (`omega = 0` allowed).
    pub fn with_omega(&self, omega: f64) -> Self {
        Self::derived(self.lambda, self.mu, omega)
    }

    pub fn wavenumber(&self, channel: Channel) -> f64 {
        match channel {
            Channel::P => self.k_p,
            Channel::S => self.k_s,
        }
    }
}

/// Compressional or shear.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    P,
    S,
}

#[inline]
pub fn unit(theta: f64) -> Point {
    [theta.cos(), theta.sin()]
}

/// `x^perp = (-x2, x1)`.
#[inline]
pub fn perp(x: Point) -> Point {
    [-x[1], x[0]]
}

#[inline]
pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneWave {
    pub theta_inc: f64,
    pub d: Point,
    pub d_perp: Point,
    pub c_p: Complex64,
    pub c_s: Complex64,
}

impl PlaneWave {
    pub fn new(theta_inc: f64, c_p: Complex64, c_s: Complex64) -> Result<Self> {
        if !theta_inc.is_finite() || !(c_p.norm() + c_s.norm() > 0.0) {
            return Err(Error::InvalidInput("plane wave needs a finite angle and a nonzero amplitude".into()));
        }
        let theta_inc = theta_inc.rem_euclid(2.0 * PI);
        let d = unit(theta_inc);
        Ok(PlaneWave { theta_inc, d, d_perp: perp(d), c_p, c_s })
    }

    pub fn pressure(theta: f64) -> Self {
        Self::new(theta, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)).expect("valid")
    }

    pub fn shear(theta: f64) -> Self {
        Self::new(theta, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)).expect("valid")
    }

    pub fn channel(theta: f64, channel: Channel) -> Self {
        match channel {
            Channel::P => Self::pressure(theta),
            Channel::S => Self::shear(theta),
        }
    }

    /// Pure channel of this wave, if it has one.
    pub fn pure_channel(&self) -> Option<Channel> {
        match (self.c_p.norm() > 0.0, self.c_s.norm() > 0.0) {
            (true, false) => Some(Channel::P),
            (false, true) => Some(Channel::S),
            _ => None,
        }
    }

    /// Split into pure-channel parts `(channel, amplitude)`.
    pub fn channels(&self) -> Vec<(Channel, Complex64)> {
        let mut v = Vec::new();
        if self.c_p.norm() > 0.0 {
            v.push((Channel::P, self.c_p));
        }
        if self.c_s.norm() > 0.0 {
            v.push((Channel::S, self.c_s));
        }
        v
    }

    pub fn field(&self, med: &ElasticMedium) -> PlaneWaveField {
        PlaneWaveField { pw: *self, med: *med }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PlaneWaveField {
    pub pw: PlaneWave,
    pub med: ElasticMedium,
}

/// Jet of `amp * dir * exp(i k x.d)`.
pub(crate) fn plane_jet(amp: Complex64, dir: Point, k: f64, d: Point, x: Point) -> Jet {
    let ph = Complex64::new(0.0, k * dot(x, d)).exp() * amp;
    let ik = Complex64::new(0.0, k);
    let mut j = Jet::zero();
    for i in 0..2 {
        j.value[i] = ph * dir[i];
        for a in 0..2 {
            j.grad[i][a] = ph * dir[i] * ik * d[a];
            for b in 0..2 {
                j.hess[i][a][b] = ph * dir[i] * ik * ik * d[a] * d[b];
            }
        }
    }
    j
}

impl VectorField for PlaneWaveField {
    fn value(&self, x: Point) -> CVec2 {
        self.analytic_jet(x).expect("analytic").value
    }

    fn analytic_jet(&self, x: Point) -> Option<Jet> {
        let pw = &self.pw;
        let a = plane_jet(pw.c_p, pw.d, self.med.k_p, pw.d, x);
        let b = plane_jet(pw.c_s, pw.d_perp, self.med.k_s, pw.d, x);
        Some(a + b)
    }
}

/// Uniform direction grid `x_m = (cos 2 pi m / M, sin 2 pi m / M)`.
pub fn direction_grid(m: usize) -> Vec<Point> {
    (0..m).map(|i| unit(2.0 * PI * i as f64 / m as f64)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct FarFieldPattern {
    pub directions: Vec<Point>,
    pub weights: Vec<f64>,
    pub up: Vec<Complex64>,
    pub us: Vec<Complex64>,
    /// Incident channel that produced this pattern, when it was a single pure channel.
    pub source: PatternSource,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PatternSource {
    /// Scattered by a pure-channel plane wave with unit amplitude in direction `d`.
    Channel { channel: Channel, d: Point },
    /// Mixed incident wave or unknown provenance.
    Other,
}

impl FarFieldPattern {
    pub fn zeros(m: usize) -> Self {
        FarFieldPattern {
            directions: direction_grid(m),
            weights: vec![2.0 * PI / m as f64; m],
            up: vec![Complex64::new(0.0, 0.0); m],
            us: vec![Complex64::new(0.0, 0.0); m],
            source: PatternSource::Other,
        }
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// Flattened into the weighted basis: `sqrt(w_m) u_p` block then `sqrt(w_m) u_s` block.
    pub fn weighted(&self) -> Vec<Complex64> {
        let mut v = Vec::with_capacity(2 * self.len());
        v.extend(self.up.iter().zip(&self.weights).map(|(u, w)| u * w.sqrt()));
        v.extend(self.us.iter().zip(&self.weights).map(|(u, w)| u * w.sqrt()));
        v
    }

    /// `L^2(S)^2` norm by the trapezoid rule.
    pub fn l2_norm(&self) -> f64 {
        self.weighted().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Relative `L^2` distance `|self - other| / |other|`.
    pub fn rel_l2_diff(&self, other: &FarFieldPattern) -> f64 {
        let a = self.weighted();
        let b = other.weighted();
        let num: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).norm_sqr()).sum();
        let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
        (num / den).sqrt()
    }

    /// Linear combination `self + s * other` on the same grid.
    pub fn axpy(&self, s: Complex64, other: &FarFieldPattern) -> FarFieldPattern {
        let mut out = self.clone();
        for i in 0..self.len() {
            out.up[i] += s * other.up[i];
            out.us[i] += s * other.us[i];
        }
        out.source = PatternSource::Other;
        out
    }

    /// Full vector far field `u_p x + u_s x^perp` at node `m`.
    pub fn vector(&self, m: usize) -> CVec2 {
        let x = self.directions[m];
        let xp = perp(x);
        [self.up[m] * x[0] + self.us[m] * xp[0], self.up[m] * x[1] + self.us[m] * xp[1]]
    }
}
