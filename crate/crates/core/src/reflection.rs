//! Reflection operators across a straight line: the scalar Helmholtz
//! reflections, the Lamé operator `D0` and the volume-potential realisation of
//! the Navier operator `D_omega`, plus a randomized verification driver.

use crate::elastic::{dot, ElasticMedium};
use crate::error::{Error, Result};
use crate::field::{cnorm, csub, field_jet, fd_jet, CVec2, DerivMode, FnField, Jet, Point, VectorField, ZERO};
use crate::green::{d0_kelvin_real, kelvin_coefficients, kelvin_real, GreenField, GreenKind};
use crate::quadrature::{adaptive, gauss_legendre_on};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Reflection `Rx = (-x1, x2)` across the canonical line `{x1 = 0}`.
#[inline]
pub fn reflect(x: Point) -> Point {
    [-x[0], x[1]]
}

/// The line `{x : normal . x = offset}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReflectionLine {
    pub normal: Point,
    pub offset: f64,
}

impl ReflectionLine {
    pub fn new(normal: Point, offset: f64) -> Result<Self> {
        let n = normal[0].hypot(normal[1]);
        if !(n > 0.0) || !n.is_finite() || !offset.is_finite() {
            return Err(Error::Geometry("reflection line needs a nonzero finite normal".into()));
        }
        Ok(ReflectionLine { normal: [normal[0] / n, normal[1] / n], offset })
    }

    pub fn canonical() -> Self {
        ReflectionLine { normal: [1.0, 0.0], offset: 0.0 }
    }

    pub fn reflect(&self, x: Point) -> Point {
        let s = 2.0 * (dot(self.normal, x) - self.offset);
        [x[0] - s * self.normal[0], x[1] - s * self.normal[1]]
    }

    /// Rigid motion taking this line to `{x1 = 0}` and its positive side to `{x1 > 0}`.
    pub fn to_canonical(&self, x: Point) -> Point {
        let n = self.normal;
        [dot(n, x) - self.offset, -n[1] * x[0] + n[0] * x[1]]
    }

    pub fn from_canonical(&self, x: Point) -> Point {
        let n = self.normal;
        let t = [-n[1], n[0]];
        let o = self.offset;
        [o * n[0] + x[0] * n[0] + x[1] * t[0], o * n[1] + x[0] * n[1] + x[1] * t[1]]
    }

    /// Rotation part applied to a vector.
    pub fn vector_to_canonical(&self, v: CVec2) -> CVec2 {
        let n = self.normal;
        [v[0] * n[0] + v[1] * n[1], -v[0] * n[1] + v[1] * n[0]]
    }

    pub fn vector_from_canonical(&self, v: CVec2) -> CVec2 {
        let n = self.normal;
        [v[0] * n[0] - v[1] * n[1], v[0] * n[1] + v[1] * n[0]]
    }
}

/// `D0` in canonical coordinates from a second-order jet at `x`.
pub fn d0_of_jet(j: &Jet, x: Point, med: &ElasticMedium) -> CVec2 {
    let c = med.c_refl;
    let x1 = x[0];
    [
        -j.value[0] - j.laplacian(0) * (c * x1 * x1) - j.grad[1][1] * (2.0 * c * x1),
        -j.value[1] + j.laplacian(1) * (c * x1 * x1) - j.grad[0][1] * (2.0 * c * x1),
    ]
}

/// The Lamé reflection `D0 f(x) = -f + c x1^2 (-Lap f1, Lap f2) - 2 c x1 (d2 f2, d2 f1)`.
pub fn apply_d0<F: VectorField + ?Sized>(f: &F, x: Point, med: &ElasticMedium, mode: DerivMode) -> Result<CVec2> {
    Ok(d0_of_jet(&field_jet(f, x, mode)?, x, med))
}

/// `D0` across an arbitrary line, by the rigid motion to the canonical line.
pub fn apply_d0_line<F: VectorField + ?Sized>(
    f: &F,
    x: Point,
    med: &ElasticMedium,
    line: &ReflectionLine,
    mode: DerivMode,
) -> Result<CVec2> {
    let local = FnField(|p: Point| line.vector_to_canonical(f.value(line.from_canonical(p))));
    let xl = line.to_canonical(x);
    let j = match mode {
        DerivMode::FiniteDifference(h) | DerivMode::Auto(h) => fd_jet(&local, xl, h)?,
        DerivMode::Analytic => return Err(Error::DerivativeUnavailable),
    };
    Ok(line.vector_from_canonical(d0_of_jet(&j, xl, med)))
}

/// A disk with a tensor-product polar rule about its center.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureDisk {
    pub center: Point,
    pub radius: f64,
    pub n_r: usize,
    pub n_t: usize,
}

impl QuadratureDisk {
    pub fn new(center: Point, radius: f64, n_r: usize, n_t: usize) -> Result<Self> {
        if !(radius > 0.0) || n_r == 0 || n_t < 4 || n_t % 2 == 1 {
            return Err(Error::Geometry("quadrature disk needs radius > 0, n_r >= 1 and even n_t >= 4".into()));
        }
        Ok(QuadratureDisk { center, radius, n_r, n_t })
    }

    /// Symmetric disk on `{x1 = 0}` with the default 64 x 64 rule.
    pub fn on_line(x2: f64, radius: f64) -> Result<Self> {
        Self::new([0.0, x2], radius, 64, 64)
    }

    /// Nodes and positive weights of the polar rule over the whole disk.
    pub fn nodes(&self) -> Vec<(Point, f64)> {
        let (r, w) = gauss_legendre_on(self.n_r, 0.0, self.radius);
        let dt = 2.0 * PI / self.n_t as f64;
        let mut out = Vec::with_capacity(self.n_r * self.n_t);
        for j in 0..self.n_t {
            let t = (j as f64 + 0.5) * dt;
            for (ri, wi) in r.iter().zip(&w) {
                out.push(([self.center[0] + ri * t.cos(), self.center[1] + ri * t.sin()], wi * ri * dt));
            }
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        self.center[0].abs() <= 1e-12 * (1.0 + self.radius)
    }

    fn depth(&self, x: Point) -> f64 {
        self.radius - (x[0] - self.center[0]).hypot(x[1] - self.center[1])
    }
}

/// Polar rule over the disk about an interior point `s`: complete rings out
/// to the largest disk about `s` inside `B`, then rays to the boundary.
fn polar_rule(disk: &QuadratureDisk, s: Point) -> Vec<(Point, f64)> {
    let d = [s[0] - disk.center[0], s[1] - disk.center[1]];
    let dn2 = d[0] * d[0] + d[1] * d[1];
    let rho0 = disk.radius - dn2.sqrt();
    let nt = disk.n_t;
    let dt = 2.0 * PI / nt as f64;
    let dirs: Vec<Point> = (0..nt)
        .map(|j| {
            let t = (j as f64 + 0.5) * dt;
            [t.cos(), t.sin()]
        })
        .collect();
    let mut out = Vec::with_capacity(2 * nt * disk.n_r);
    let (r, w) = gauss_legendre_on(disk.n_r, 0.0, rho0);
    for (ri, wi) in r.iter().zip(&w) {
        for e in &dirs {
            out.push(([s[0] + ri * e[0], s[1] + ri * e[1]], wi * ri * dt));
        }
    }
    for e in &dirs {
        let de = dot(d, *e);
        let rmax = -de + (de * de - dn2 + disk.radius * disk.radius).max(0.0).sqrt();
        if rmax - rho0 <= 1e-14 * disk.radius {
            continue;
        }
        let (r, w) = gauss_legendre_on(disk.n_r, rho0, rmax);
        for (ri, wi) in r.iter().zip(&w) {
            out.push(([s[0] + ri * e[0], s[1] + ri * e[1]], wi * ri * dt));
        }
    }
    out
}

/// Volume potential `int_B G0(x', y) f(y) dy` for `x'` inside `B`.
///
/// The Kelvin part is integrated on a polar rule about `x'`; the image part,
/// which is singular like `1/|y - Rx'|^2` with zero angular mean, on a polar
/// rule about `Rx'` in the principal-value sense.
fn halfplane_potential<F: VectorField + ?Sized>(
    f: &F,
    xp: Point,
    med: &ElasticMedium,
    disk: &QuadratureDisk,
) -> CVec2 {
    let ab = kelvin_coefficients(med);
    let c = med.c_refl;
    let mut acc = [ZERO; 2];
    let mut add = |k: [[f64; 2]; 2], v: CVec2, w: f64| {
        acc[0] += (v[0] * k[0][0] + v[1] * k[0][1]) * w;
        acc[1] += (v[0] * k[1][0] + v[1] * k[1][1]) * w;
    };

    for (y, w) in polar_rule(disk, xp) {
        let r = [xp[0] - y[0], xp[1] - y[1]];
        add(kelvin_real(r, r[0].hypot(r[1]), ab), f.value(y), w);
    }

    // zero angular mean of the 1/|y - Rx'|^2 part makes each complete ring
    // about Rx' sum to a bounded value, which realises the principal value
    let z = reflect(xp);
    for (y, w) in polar_rule(disk, z) {
        let r = [z[0] - y[0], z[1] - y[1]];
        add(d0_kelvin_real(z[0], r, r[0].hypot(r[1]), ab, c), f.value(y), w);
    }
    acc
}

/// Navier reflection realised through the Lamé-harmonic correction
/// `v = f - omega^2 Pot_B[f]`: returns `D0 v(x) + omega^2 Pot_B[f](Rx)`.
pub fn apply_domega<F: VectorField + ?Sized>(
    f: &F,
    x: Point,
    med: &ElasticMedium,
    disk: &QuadratureDisk,
) -> Result<CVec2> {
    if !disk.is_symmetric() {
        return Err(Error::Geometry("quadrature disk must be centered on the reflecting line".into()));
    }
    let step = disk.radius / 200.0;
    if med.omega == 0.0 {
        return apply_d0(f, x, med, DerivMode::Auto(step));
    }
    let margin = 2.0 * step;
    if disk.depth(x) <= margin || disk.depth(reflect(x)) <= margin {
        return Err(Error::Quadrature(format!("point {x:?} or its reflection is too close to the quadrature disk boundary")));
    }
    let w2 = med.omega * med.omega;
    let v = FnField(|p: Point| {
        let pot = halfplane_potential(f, p, med, disk);
        let fv = f.value(p);
        [fv[0] - pot[0] * w2, fv[1] - pot[1] * w2]
    });
    let d0v = d0_of_jet(&fd_jet(&v, x, step)?, x, med);
    let pot_rx = halfplane_potential(f, reflect(x), med, disk);
    Ok([d0v[0] + pot_rx[0] * w2, d0v[1] + pot_rx[1] * w2])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
    Robin { q_re: f64, q_im: f64 },
}

impl BoundaryCondition {
    pub fn robin(q: Complex64) -> Self {
        BoundaryCondition::Robin { q_re: q.re, q_im: q.im }
    }
}

/// Scalar Helmholtz reflection across `{x1 = 0}`.
///
/// Robin data follow `d1 v + q v = 0` on the line. The wavenumber is not
/// needed by the formulas and is accepted for call-site symmetry.
pub fn helmholtz_reflect<V: Fn(Point) -> Complex64>(bc: BoundaryCondition, v: &V, x: Point, _k: f64) -> Result<Complex64> {
    match bc {
        BoundaryCondition::Dirichlet => Ok(-v(x)),
        BoundaryCondition::Neumann => Ok(v(x)),
        BoundaryCondition::Robin { q_re, q_im } => {
            let q = Complex64::new(q_re, q_im);
            if q == ZERO || x[0] == 0.0 {
                return Ok(v(x));
            }
            let x1 = x[0];
            let integrand = |t: f64| ((q * (x1 - t)).exp()) * v([t, x[1]]);
            let (lo, hi, sign) = if x1 > 0.0 { (0.0, x1, 1.0) } else { (x1, 0.0, -1.0) };
            let scale = v(x).norm().max(1.0);
            let i = adaptive(&integrand, lo, hi, 1e-13 * scale)?;
            Ok(v(x) + q * 2.0 * i * sign)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReflectionCheck {
    Lame,
    Navier,
    HelmholtzBc,
}

impl std::str::FromStr for ReflectionCheck {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lame" => Ok(ReflectionCheck::Lame),
            "navier" => Ok(ReflectionCheck::Navier),
            "helmholtz_bc" => Ok(ReflectionCheck::HelmholtzBc),
            other => Err(Error::InvalidInput(format!("unknown reflection check `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeRecord {
    pub point: Point,
    pub error: f64,
    pub family: String,
    pub params: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReflectionReport {
    pub check: ReflectionCheck,
    pub seed: u64,
    pub max_error: f64,
    pub probes: Vec<ProbeRecord>,
}

/// Closed-form Navier field vanishing on `{x1 = 0}`:
/// `f = grad phi + curl psi` with `phi = A sin(a x1) e^{i b x2}`,
/// `psi = B cos(c x1) e^{i b x2}`, `a^2 + b^2 = k_p^2`, `c^2 + b^2 = k_s^2`, `B = -i A a / b`.
#[derive(Clone, Copy, Debug)]
pub struct NavierStrip {
    pub amp: Complex64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl NavierStrip {
    pub fn new(med: &ElasticMedium, b: f64, amp: Complex64) -> Result<Self> {
        if !(b > 0.0 && b < med.k_p) {
            return Err(Error::InvalidInput("need 0 < b < k_p".into()));
        }
        Ok(NavierStrip { amp, a: (med.k_p * med.k_p - b * b).sqrt(), b, c: (med.k_s * med.k_s - b * b).sqrt() })
    }
}

impl VectorField for NavierStrip {
    fn value(&self, x: Point) -> CVec2 {
        let i = Complex64::new(0.0, 1.0);
        let e = (i * self.b * x[1]).exp();
        let bb = -i * self.amp * self.a / self.b;
        let (sa, ca) = (self.a * x[0]).sin_cos();
        let (sc, cc) = (self.c * x[0]).sin_cos();
        // grad phi = (A a cos, i b A sin) e;  curl psi = (-d2 psi, d1 psi) = (-i b B cos, -c B sin) e
        [
            (self.amp * self.a * ca - i * self.b * bb * cc) * e,
            (i * self.b * self.amp * sa - self.c * bb * sc) * e,
        ]
    }
}

fn probe_point(rng: &mut ChaCha8Rng) -> Point {
    [rng.random_range(0.05..0.8), rng.random_range(-0.5..0.5)]
}

/// Runs one of the reflection identities on random admissible fields and points.
pub fn verify_reflection(which: ReflectionCheck, probe_count: usize, seed: u64) -> ReflectionReport {
    let med = ElasticMedium::new(2.0, 1.0, 1.0).expect("valid medium");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    type Job = Box<dyn Fn() -> Result<f64> + Send + Sync>;
    let mut jobs: Vec<(Point, String, BTreeMap<String, f64>, Job)> = Vec::with_capacity(probe_count);
    for k in 0..probe_count {
        let x = probe_point(&mut rng);
        let mut params = BTreeMap::new();
        let (family, job): (String, Job) = match which {
            ReflectionCheck::Lame => {
                if k % 5 == 4 {
                    let s = Complex64::from_polar(1.0, rng.random_range(0.0..2.0 * PI));
                    params.insert("phase".into(), s.arg());
                    let f = FnField(move |p: Point| [s * p[0], ZERO]);
                    let m = med;
                    ("linear".into(), Box::new(move || {
                        let lhs = apply_d0(&f, x, &m, DerivMode::FiniteDifference(0.25))?;
                        Ok(cnorm(&csub(&lhs, &f.value(reflect(x)))))
                    }))
                } else {
                    let y = [rng.random_range(0.9..2.0), rng.random_range(-1.0..1.0)];
                    let col = rng.random_range(0..2usize);
                    params.insert("y1".into(), y[0]);
                    params.insert("y2".into(), y[1]);
                    params.insert("column".into(), col as f64);
                    let f = GreenField::column(GreenKind::HalfPlane, y, col, &med);
                    let m = med;
                    ("halfplane_green_column".into(), Box::new(move || {
                        let lhs = apply_d0(&f, x, &m, DerivMode::Analytic)?;
                        Ok(cnorm(&csub(&lhs, &f.value(reflect(x)))))
                    }))
                }
            }
            ReflectionCheck::Navier => {
                let b: f64 = rng.random_range(0.1..0.45);
                let phase = rng.random_range(0.0..2.0 * PI);
                params.insert("b".into(), b);
                params.insert("phase".into(), phase);
                let f = NavierStrip::new(&med, b, Complex64::from_polar(1.0, phase)).expect("b in range");
                let disk = QuadratureDisk::on_line(x[1], 1.0).expect("valid disk");
                let m = med;
                ("navier_strip".into(), Box::new(move || {
                    let lhs = apply_domega(&f, x, &m, &disk)?;
                    Ok(cnorm(&csub(&lhs, &f.value(reflect(x)))))
                }))
            }
            ReflectionCheck::HelmholtzBc => {
                let kk: f64 = rng.random_range(0.5..2.0);
                let b: f64 = rng.random_range(0.05..0.95) * kk;
                let a = (kk * kk - b * b).sqrt();
                let q: f64 = rng.random_range(-2.0..2.0);
                params.insert("k".into(), kk);
                params.insert("b".into(), b);
                let i = Complex64::new(0.0, 1.0);
                let (name, bc, beta, alpha) = match k % 3 {
                    0 => ("dirichlet", BoundaryCondition::Dirichlet, 1.0, 0.0),
                    1 => ("neumann", BoundaryCondition::Neumann, 0.0, 1.0),
                    _ => {
                        params.insert("q".into(), q);
                        ("robin", BoundaryCondition::robin(Complex64::new(q, 0.0)), -q / a, 1.0)
                    }
                };
                let v = move |p: Point| (alpha * (a * p[0]).cos() + beta * (a * p[0]).sin()) * (i * b * p[1]).exp();
                (name.into(), Box::new(move || {
                    let lhs = helmholtz_reflect(bc, &v, x, kk)?;
                    Ok((lhs - v(reflect(x))).norm())
                }))
            }
        };
        jobs.push((x, family, params, job));
    }
    let probes: Vec<ProbeRecord> = jobs
        .into_par_iter()
        .map(|(point, family, params, job)| match job() {
            Ok(error) => ProbeRecord { point, error, family, params, failure: None },
            Err(e) => ProbeRecord { point, error: f64::INFINITY, family, params, failure: Some(e.to_string()) },
        })
        .collect();
    let max_error = probes.iter().map(|p| p.error).fold(0.0, f64::max);
    ReflectionReport { check: which, seed, max_error, probes }
}
