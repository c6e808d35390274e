//! Separation of variables for the rigid disk.

use super::{DiskObstacle, Obstacle, Representation, ScatterSolution};
use crate::elastic::{ElasticMedium, PlaneWave};
use crate::error::{Error, Result};
use crate::field::{CVec2, Point};
use crate::special_fn::{bessel_j_all, deriv_from_table, hankel1_all};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Threshold on the column-normalized condition number of a mode system.
pub const MODE_COND_LIMIT: f64 = 1e10;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Default truncation `ceil(k_s h) + 25`.
pub fn default_truncation(radius: f64, med: &ElasticMedium) -> usize {
    (med.k_s * radius).ceil() as usize + 25
}

/// Per-mode Dirichlet matrices for the Hankel (outgoing) and Bessel (regular) bases.
#[derive(Clone, Copy, Debug)]
pub struct ModeMatrices {
    pub hankel: [[Complex64; 2]; 2],
    pub bessel: [[Complex64; 2]; 2],
}

/// Mode matrices for `0 <= n <= nmax` on a circle of radius `h`.
///
/// Negative modes follow from `M_{-n} = S M_n S` with `S = diag(1, -1)`, up to the
/// common factor `(-1)^n`.
pub fn disk_mode_matrices(nmax: usize, h: f64, med: &ElasticMedium) -> Vec<ModeMatrices> {
    let (kp, ks) = (med.k_p, med.k_s);
    let hp = hankel1_all(nmax + 1, kp * h);
    let hs = hankel1_all(nmax + 1, ks * h);
    let jp: Vec<Complex64> = bessel_j_all(nmax + 1, kp * h).into_iter().map(Complex64::from).collect();
    let js: Vec<Complex64> = bessel_j_all(nmax + 1, ks * h).into_iter().map(Complex64::from).collect();
    let build = |zp: &[Complex64], zs: &[Complex64], n: usize| {
        let inh = I * (n as f64 / h);
        [
            [deriv_from_table(zp, n, kp * h) * kp, -inh * zs[n]],
            [inh * zp[n], deriv_from_table(zs, n, ks * h) * ks],
        ]
    };
    (0..=nmax).map(|n| ModeMatrices { hankel: build(&hp, &hs, n), bessel: build(&jp, &js, n) }).collect()
}

fn solve2(m: &[[Complex64; 2]; 2], b: [Complex64; 2]) -> [Complex64; 2] {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [(m[1][1] * b[0] - m[0][1] * b[1]) / det, (m[0][0] * b[1] - m[1][0] * b[0]) / det]
}

/// Condition number of a 2x2 matrix after scaling its columns to unit norm.
pub fn normalized_cond(m: &[[Complex64; 2]; 2]) -> f64 {
    let c0 = (m[0][0].norm_sqr() + m[1][0].norm_sqr()).sqrt();
    let c1 = (m[0][1].norm_sqr() + m[1][1].norm_sqr()).sqrt();
    scaled_cond(m, [c0, c1])
}

/// Condition number of a 2x2 matrix with column `j` divided by `scale[j]`.
pub fn scaled_cond(m: &[[Complex64; 2]; 2], scale: [f64; 2]) -> f64 {
    let [c0, c1] = scale;
    if !(c0 > 0.0 && c1 > 0.0) || !c0.is_finite() || !c1.is_finite() {
        return f64::INFINITY;
    }
    let a = [[m[0][0] / c0, m[0][1] / c1], [m[1][0] / c0, m[1][1] / c1]];
    let fro2: f64 = a.iter().flatten().map(|z| z.norm_sqr()).sum();
    let det = (a[0][0] * a[1][1] - a[0][1] * a[1][0]).norm();
    if det == 0.0 || !fro2.is_finite() {
        return f64::INFINITY;
    }
    // singular values of a 2x2: s1 s2 = |det|, s1^2 + s2^2 = |A|_F^2
    let disc = (fro2 * fro2 - 4.0 * det * det).max(0.0).sqrt();
    let s1 = ((fro2 + disc) / 2.0).sqrt();
    let s2 = det / s1;
    s1 / s2
}

/// Mode transfer `T_n = -M_H^{-1} M_J` mapping regular to outgoing coefficients.
///
/// Modes whose outgoing matrix or transfer overflows are set to zero.
pub fn disk_transfer(m: &ModeMatrices) -> [[Complex64; 2]; 2] {
    let zero = Complex64::new(0.0, 0.0);
    if !m.hankel.iter().flatten().all(|z| z.is_finite()) {
        return [[zero; 2]; 2];
    }
    let c0 = solve2(&m.hankel, [-m.bessel[0][0], -m.bessel[1][0]]);
    let c1 = solve2(&m.hankel, [-m.bessel[0][1], -m.bessel[1][1]]);
    let t = [[c0[0], c1[0]], [c0[1], c1[1]]];
    if t.iter().flatten().all(|z| z.is_finite()) {
        t
    } else {
        [[zero; 2]; 2]
    }
}

/// Outgoing potential coefficients of a disk solution.
#[derive(Clone, Debug)]
pub struct DiskSeries {
    pub center: Point,
    pub radius: f64,
    pub k_p: f64,
    pub k_s: f64,
    /// Coefficients for `n = -N..=N`, index `n + N`.
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
}

impl DiskSeries {
    pub fn truncation(&self) -> usize {
        (self.a.len() - 1) / 2
    }

    pub fn scattered(&self, x: Point) -> CVec2 {
        let n_tr = self.truncation();
        let dx = [x[0] - self.center[0], x[1] - self.center[1]];
        let r = dx[0].hypot(dx[1]);
        let alpha = dx[1].atan2(dx[0]);
        let hp = hankel1_all(n_tr + 1, self.k_p * r);
        let hs = hankel1_all(n_tr + 1, self.k_s * r);
        let mut ur = Complex64::new(0.0, 0.0);
        let mut ua = Complex64::new(0.0, 0.0);
        for (idx, (a, b)) in self.a.iter().zip(&self.b).enumerate() {
            let n = idx as i64 - n_tr as i64;
            let na = n.unsigned_abs() as usize;
            let sign = if n < 0 && na % 2 == 1 { -1.0 } else { 1.0 };
            let hpn = hp[na] * sign;
            let hsn = hs[na] * sign;
            let dhp = deriv_from_table(&hp, na, self.k_p * r) * sign * self.k_p;
            let dhs = deriv_from_table(&hs, na, self.k_s * r) * sign * self.k_s;
            let e = Complex64::from_polar(1.0, n as f64 * alpha);
            let inr = I * (n as f64 / r);
            ur += (a * dhp - inr * b * hsn) * e;
            ua += (inr * a * hpn + b * dhs) * e;
        }
        let (c, s) = (alpha.cos(), alpha.sin());
        [ur * c - ua * s, ur * s + ua * c]
    }

    /// `(u_p, u_s)` far-field components in direction `xh`.
    pub fn farfield_at(&self, xh: Point) -> (Complex64, Complex64) {
        let n_tr = self.truncation() as i64;
        let alpha = xh[1].atan2(xh[0]);
        let gp = (2.0 * self.k_p / PI).sqrt() * Complex64::from_polar(1.0, PI / 4.0);
        let gs = (2.0 * self.k_s / PI).sqrt() * Complex64::from_polar(1.0, PI / 4.0);
        let mut sp = Complex64::new(0.0, 0.0);
        let mut ss = Complex64::new(0.0, 0.0);
        for (idx, (a, b)) in self.a.iter().zip(&self.b).enumerate() {
            let n = idx as i64 - n_tr;
            let w = Complex64::from_polar(1.0, n as f64 * (alpha - PI / 2.0));
            sp += a * w;
            ss += b * w;
        }
        let cx = xh[0] * self.center[0] + xh[1] * self.center[1];
        (
            gp * sp * Complex64::from_polar(1.0, -self.k_p * cx),
            gs * ss * Complex64::from_polar(1.0, -self.k_s * cx),
        )
    }
}

/// Scattering of a plane wave by a rigid disk, truncated at `|n| <= n_trunc`.
pub fn disk_series_solve(disk: &DiskObstacle, pw: &PlaneWave, med: &ElasticMedium, n_trunc: usize) -> Result<ScatterSolution> {
    if med.omega <= 0.0 {
        return Err(Error::InvalidMedium("disk series needs omega > 0".into()));
    }
    let min = med.k_s * disk.radius + 10.0;
    if (n_trunc as f64) < min {
        return Err(Error::InvalidInput(format!("truncation {n_trunc} below k_s h + 10 = {min:.3}")));
    }
    let h = disk.radius;
    let mats = disk_mode_matrices(n_trunc, h, med);
    let resonant = (med.k_s * h).ceil() as usize + 2;
    let c0 = disk.center;
    let ph_p = Complex64::from_polar(1.0, med.k_p * (c0[0] * pw.d[0] + c0[1] * pw.d[1])) * pw.c_p / (I * med.k_p);
    let ph_s = Complex64::from_polar(1.0, med.k_s * (c0[0] * pw.d[0] + c0[1] * pw.d[1])) * pw.c_s / (I * med.k_s);
    let len = 2 * n_trunc + 1;
    let mut a = vec![Complex64::new(0.0, 0.0); len];
    let mut b = vec![Complex64::new(0.0, 0.0); len];
    for n in -(n_trunc as i64)..=(n_trunc as i64) {
        let na = n.unsigned_abs() as usize;
        let mut m = mats[na];
        if n < 0 {
            for mm in [&mut m.hankel, &mut m.bessel] {
                mm[0][1] = -mm[0][1];
                mm[1][0] = -mm[1][0];
            }
        }
        if !m.hankel.iter().flatten().all(|z| z.is_finite()) {
            continue;
        }
        let cond = normalized_cond(&m.hankel);
        if na <= resonant && cond > MODE_COND_LIMIT {
            return Err(Error::NearSingularMode { mode: n, cond });
        }
        let w = Complex64::from_polar(1.0, n as f64 * (PI / 2.0 - pw.theta_inc));
        let alpha = ph_p * w;
        let beta = ph_s * w;
        let rhs = [
            -(m.bessel[0][0] * alpha + m.bessel[0][1] * beta),
            -(m.bessel[1][0] * alpha + m.bessel[1][1] * beta),
        ];
        let sol = solve2(&m.hankel, rhs);
        let idx = (n + n_trunc as i64) as usize;
        a[idx] = sol[0];
        b[idx] = sol[1];
    }
    let series = DiskSeries { center: c0, radius: h, k_p: med.k_p, k_s: med.k_s, a, b };
    let mut sol = ScatterSolution {
        obstacle: Obstacle::Disk(*disk),
        incident: *pw,
        medium: *med,
        representation: Representation::DiskSeries(series),
        boundary_residual: 0.0,
        warnings: Vec::new(),
    };
    let nb = 8 * n_trunc.max(1);
    sol.boundary_residual = (0..nb)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / nb as f64;
            crate::field::cnorm(&sol.total([c0[0] + h * t.cos(), c0[1] + h * t.sin()]))
        })
        .fold(0.0, f64::max);
    Ok(sol)
}
