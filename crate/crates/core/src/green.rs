//! Kelvin tensor, Navier (Kupradze) tensor, half-plane Lamé tensor and the
//! far field of a Navier point source.

use crate::elastic::{dot, perp, ElasticMedium, FarFieldPattern, PatternSource};
use crate::error::{Error, Result};
use crate::field::{CVec2, Jet, Point, VectorField, ZERO};
use crate::special_fn::hankel1_all;
use crate::taylor::Jet2;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Separation below which source and target are treated as coincident.
pub const COINCIDENCE_TOL: f64 = 1e-13;

/// A 2x2 complex matrix, `0[i][j]` is row `i`, column `j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tensor2(pub [[Complex64; 2]; 2]);

impl Tensor2 {
    pub fn from_real(m: [[f64; 2]; 2]) -> Self {
        let c = |v: f64| Complex64::new(v, 0.0);
        Tensor2([[c(m[0][0]), c(m[0][1])], [c(m[1][0]), c(m[1][1])]])
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.0[i][j]
    }

    pub fn column(&self, j: usize) -> CVec2 {
        [self.0[0][j], self.0[1][j]]
    }

    pub fn transpose(&self) -> Self {
        let m = self.0;
        Tensor2([[m[0][0], m[1][0]], [m[0][1], m[1][1]]])
    }

    pub fn apply(&self, p: &CVec2) -> CVec2 {
        let m = self.0;
        [m[0][0] * p[0] + m[0][1] * p[1], m[1][0] * p[0] + m[1][1] * p[1]]
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn sub(&self, o: &Tensor2) -> Tensor2 {
        let mut m = self.0;
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] -= o.0[i][j];
            }
        }
        Tensor2(m)
    }
}

fn separation(x: Point, y: Point) -> Result<(Point, f64)> {
    let r = [x[0] - y[0], x[1] - y[1]];
    let rho = r[0].hypot(r[1]);
    if !(rho >= COINCIDENCE_TOL) {
        return Err(Error::Coincident(rho));
    }
    Ok((r, rho))
}

/// Coefficients `(a, b)` of `Phi0 = a ln|r| I + b r r^T / |r|^2`.
pub fn kelvin_coefficients(med: &ElasticMedium) -> (f64, f64) {
    let den = 4.0 * PI * med.mu * (med.lambda + 2.0 * med.mu);
    (-(3.0 * med.mu + med.lambda) / den, (med.lambda + med.mu) / den)
}

/// Kelvin tensor as a real matrix, for `r = x - y` with `|r| = rho > 0`.
pub(crate) fn kelvin_real(r: Point, rho: f64, ab: (f64, f64)) -> [[f64; 2]; 2] {
    let (a, b) = ab;
    let l = a * rho.ln();
    let q = b / (rho * rho);
    [[l + q * r[0] * r[0], q * r[0] * r[1]], [q * r[0] * r[1], l + q * r[1] * r[1]]]
}

pub fn kelvin_phi0(x: Point, y: Point, med: &ElasticMedium) -> Result<Tensor2> {
    let (r, rho) = separation(x, y)?;
    Ok(Tensor2::from_real(kelvin_real(r, rho, kelvin_coefficients(med))))
}

/// `D0` applied to the columns of `z -> Phi0(z, y)`, evaluated at `z`, with `r = z - y`.
pub(crate) fn d0_kelvin_real(z1: f64, r: Point, rho: f64, ab: (f64, f64), c: f64) -> [[f64; 2]; 2] {
    let (a, b) = ab;
    let phi = kelvin_real(r, rho, ab);
    let p2 = rho * rho;
    let p4 = p2 * p2;
    let delta = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
    let lap = |i: usize, j: usize| b * (2.0 * delta(i, j) / p2 - 4.0 * r[i] * r[j] / p4);
    let d2 = |i: usize, j: usize| {
        a * r[1] / p2 * delta(i, j) + b * ((delta(i, 1) * r[j] + r[i] * delta(j, 1)) / p2 - 2.0 * r[i] * r[j] * r[1] / p4)
    };
    let mut out = [[0.0; 2]; 2];
    for j in 0..2 {
        out[0][j] = -phi[0][j] - c * z1 * z1 * lap(0, j) - 2.0 * c * z1 * d2(1, j);
        out[1][j] = -phi[1][j] + c * z1 * z1 * lap(1, j) - 2.0 * c * z1 * d2(0, j);
    }
    out
}

/// Half-plane Green's tensor for the Lamé operator on `{x1 > 0}` with zero
/// displacement on `{x1 = 0}`: `Phi0(x, y) + (D0 Phi0(., y))(Rx)`.
pub fn halfplane_g0(x: Point, y: Point, med: &ElasticMedium) -> Result<Tensor2> {
    Ok(Tensor2::from_real(halfplane_g0_real(x, y, med)?))
}

pub(crate) fn halfplane_g0_real(x: Point, y: Point, med: &ElasticMedium) -> Result<[[f64; 2]; 2]> {
    let (r, rho) = separation(x, y)?;
    let z = [-x[0], x[1]];
    let (rz, rhoz) = separation(z, y)?;
    let ab = kelvin_coefficients(med);
    let p = kelvin_real(r, rho, ab);
    let h = d0_kelvin_real(z[0], rz, rhoz, ab, med.c_refl);
    Ok([[p[0][0] + h[0][0], p[0][1] + h[0][1]], [p[1][0] + h[1][0], p[1][1] + h[1][1]]])
}

/// Taylor jets of the Kelvin tensor entries about `x`.
fn kelvin_jets(x: Point, y: Point, ab: (f64, f64)) -> [[Jet2; 2]; 2] {
    let r = [Jet2::variable(0, x[0] - y[0]), Jet2::variable(1, x[1] - y[1])];
    let rho2 = r[0] * r[0] + r[1] * r[1];
    let lnr = rho2.ln().scale(0.5 * ab.0);
    let inv = rho2.recip().scale(ab.1);
    let mut out = [[Jet2::constant(0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let mut e = r[i] * r[j] * inv;
            if i == j {
                e = e + lnr;
            }
            out[i][j] = e;
        }
    }
    out
}

/// Jets (valid to second order) of the half-plane tensor entries about `x`.
fn halfplane_jets(x: Point, y: Point, med: &ElasticMedium) -> Result<[[Jet2; 2]; 2]> {
    separation(x, y)?;
    let z = [-x[0], x[1]];
    separation(z, y)?;
    let ab = kelvin_coefficients(med);
    let c = med.c_refl;
    let direct = kelvin_jets(x, y, ab);
    let phi = kelvin_jets(z, y, ab);
    let z1 = Jet2::variable(0, z[0]);
    let z1sq = z1 * z1;
    let mut out = [[Jet2::constant(0.0); 2]; 2];
    for j in 0..2 {
        let lap = |i: usize| phi[i][j].derivative(0).derivative(0) + phi[i][j].derivative(1).derivative(1);
        let d2 = |i: usize| phi[i][j].derivative(1);
        let img0 = -phi[0][j] - z1sq * lap(0).scale(c) - z1 * d2(1).scale(2.0 * c);
        let img1 = -phi[1][j] + z1sq * lap(1).scale(c) - z1 * d2(0).scale(2.0 * c);
        out[0][j] = direct[0][j] + img0.flip_first();
        out[1][j] = direct[1][j] + img1.flip_first();
    }
    Ok(out)
}

/// Jet of `x -> G(x, y) p` from per-entry Taylor jets.
fn column_jet(entries: &[[Jet2; 2]; 2], p: CVec2) -> Jet {
    let mut jet = Jet::zero();
    for i in 0..2 {
        for (k, &s) in p.iter().enumerate() {
            let e = &entries[i][k];
            jet.value[i] += s * e.value();
            jet.grad[i][0] += s * e.partial(1, 0);
            jet.grad[i][1] += s * e.partial(0, 1);
            jet.hess[i][0][0] += s * e.partial(2, 0);
            jet.hess[i][1][1] += s * e.partial(0, 2);
            let m = s * e.partial(1, 1);
            jet.hess[i][0][1] += m;
            jet.hess[i][1][0] += m;
        }
    }
    jet
}

/// Navier Green's tensor in Kupradze form.
pub fn navier_phiomega(x: Point, y: Point, med: &ElasticMedium) -> Result<Tensor2> {
    let (r, rho) = separation(x, y)?;
    if med.omega <= 0.0 {
        return Err(Error::InvalidMedium("Navier tensor needs omega > 0".into()));
    }
    let hs = hankel1_all(1, med.k_s * rho);
    let hp = hankel1_all(1, med.k_p * rho);
    let rh = [r[0] / rho, r[1] / rho];
    let i = Complex64::new(0.0, 1.0);
    // grad grad^T H0(k rho) = -k^2 H0 rr^T + (k H1 / rho)(2 rr^T - I)
    let hess = |k: f64, h: &[Complex64]| {
        let mut m = [[ZERO; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                let rr = rh[a] * rh[b];
                let id = if a == b { 1.0 } else { 0.0 };
                m[a][b] = -h[0] * (k * k * rr) + h[1] * (k / rho) * (2.0 * rr - id);
            }
        }
        m
    };
    let ms = hess(med.k_s, &hs);
    let mp = hess(med.k_p, &hp);
    let diag = i * hs[0] / (4.0 * med.mu);
    let pre = i / (4.0 * med.omega * med.omega);
    let mut out = [[ZERO; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            out[a][b] = pre * (ms[a][b] - mp[a][b]);
        }
        out[a][a] += diag;
    }
    Ok(Tensor2(out))
}

/// Far-field coefficients `(u_p, u_s)` at direction `xh` of `x -> Phi_omega(x, y) p`.
///
/// These carry the factors `1/(lambda + 2 mu)` and `1/mu` of the Kupradze
/// tensor; with `lambda + 2 mu = mu = 1` they reduce to
/// `e^{i pi/4} e^{-i k x.y} / sqrt(8 pi k)` times the projections of `p`.
pub fn point_source_farfield_at(y: Point, p: &CVec2, med: &ElasticMedium, xh: Point) -> (Complex64, Complex64) {
    let xp = perp(xh);
    let e = Complex64::from_polar(1.0, PI / 4.0);
    let ap = e * Complex64::from_polar(1.0, -med.k_p * dot(xh, y))
        / ((med.lambda + 2.0 * med.mu) * (8.0 * PI * med.k_p).sqrt());
    let as_ = e * Complex64::from_polar(1.0, -med.k_s * dot(xh, y)) / (med.mu * (8.0 * PI * med.k_s).sqrt());
    (ap * (p[0] * xh[0] + p[1] * xh[1]), as_ * (p[0] * xp[0] + p[1] * xp[1]))
}

/// Far-field pattern of `x -> Phi_omega(x, y) P` on the given directions.
pub fn farfield_point_source(y: Point, p: [f64; 2], med: &ElasticMedium, directions: &[Point]) -> FarFieldPattern {
    let pc = [Complex64::new(p[0], 0.0), Complex64::new(p[1], 0.0)];
    let m = directions.len();
    let mut out = FarFieldPattern {
        directions: directions.to_vec(),
        weights: vec![2.0 * PI / m as f64; m],
        up: Vec::with_capacity(m),
        us: Vec::with_capacity(m),
        source: PatternSource::Other,
    };
    for &xh in directions {
        let (a, b) = point_source_farfield_at(y, &pc, med, xh);
        out.up.push(a);
        out.us.push(b);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GreenKind {
    Kelvin,
    Navier,
    HalfPlane,
}

/// `x -> G(x, y) p` for one of the tensors above.
#[derive(Clone, Copy, Debug)]
pub struct GreenField {
    pub kind: GreenKind,
    pub y: Point,
    pub p: CVec2,
    pub med: ElasticMedium,
}

impl GreenField {
    pub fn column(kind: GreenKind, y: Point, col: usize, med: &ElasticMedium) -> Self {
        let mut p = [ZERO; 2];
        p[col] = Complex64::new(1.0, 0.0);
        GreenField { kind, y, p, med: *med }
    }

    pub fn tensor(&self, x: Point) -> Result<Tensor2> {
        match self.kind {
            GreenKind::Kelvin => kelvin_phi0(x, self.y, &self.med),
            GreenKind::Navier => navier_phiomega(x, self.y, &self.med),
            GreenKind::HalfPlane => halfplane_g0(x, self.y, &self.med),
        }
    }
}

impl VectorField for GreenField {
    fn value(&self, x: Point) -> CVec2 {
        match self.tensor(x) {
            Ok(t) => t.apply(&self.p),
            Err(_) => [Complex64::new(f64::NAN, 0.0); 2],
        }
    }

    fn analytic_jet(&self, x: Point) -> Option<Jet> {
        let entries = match self.kind {
            GreenKind::Kelvin => {
                separation(x, self.y).ok()?;
                kelvin_jets(x, self.y, kelvin_coefficients(&self.med))
            }
            GreenKind::HalfPlane => halfplane_jets(x, self.y, &self.med).ok()?,
            GreenKind::Navier => return None,
        };
        Some(column_jet(&entries, self.p))
    }

    fn analytic_derivs(&self) -> bool {
        self.kind != GreenKind::Navier
    }
}
