//! Complex vector fields in the plane, their second-order jets and the
//! Navier/Lamé residuals and Helmholtz split built on them.

use crate::elastic::ElasticMedium;
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::ops::{Add, Mul};

pub type Point = [f64; 2];
pub type CVec2 = [Complex64; 2];

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Step of the default finite-difference stencil.
///
/// The stencils are fourth order (Richardson-extrapolated central
/// differences), so a step of `1e-3` keeps truncation error near `1e-12`
/// while rounding stays below `1e-9`.
pub const DEFAULT_FD_STEP: f64 = 1e-3;

/// Value, gradient `grad[i][a] = d_a u_i` and Hessian `hess[i][a][b] = d_a d_b u_i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub value: CVec2,
    pub grad: [[Complex64; 2]; 2],
    pub hess: [[[Complex64; 2]; 2]; 2],
}

impl Jet {
    pub fn zero() -> Self {
        Jet { value: [ZERO; 2], grad: [[ZERO; 2]; 2], hess: [[[ZERO; 2]; 2]; 2] }
    }

    pub fn laplacian(&self, i: usize) -> Complex64 {
        self.hess[i][0][0] + self.hess[i][1][1]
    }

    pub fn divergence(&self) -> Complex64 {
        self.grad[0][0] + self.grad[1][1]
    }

    /// `grad div u`.
    pub fn grad_div(&self) -> CVec2 {
        [self.hess[0][0][0] + self.hess[1][0][1], self.hess[0][0][1] + self.hess[1][1][1]]
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, o: Jet) -> Jet {
        for i in 0..2 {
            self.value[i] += o.value[i];
            for a in 0..2 {
                self.grad[i][a] += o.grad[i][a];
                for b in 0..2 {
                    self.hess[i][a][b] += o.hess[i][a][b];
                }
            }
        }
        self
    }
}

impl Mul<Complex64> for Jet {
    type Output = Jet;
    fn mul(mut self, s: Complex64) -> Jet {
        for i in 0..2 {
            self.value[i] *= s;
            for a in 0..2 {
                self.grad[i][a] *= s;
                for b in 0..2 {
                    self.hess[i][a][b] *= s;
                }
            }
        }
        self
    }
}

/// An evaluable complex 2-vector field.
///
/// Implementations must be callable from many threads at once.
pub trait VectorField: Sync {
    fn value(&self, x: Point) -> CVec2;

    /// Exact value, gradient and Hessian, when the field has them in closed form.
    fn analytic_jet(&self, _x: Point) -> Option<Jet> {
        None
    }

    fn analytic_derivs(&self) -> bool {
        self.analytic_jet([0.3, 0.2]).is_some()
    }
}

impl<T: VectorField + ?Sized> VectorField for &T {
    fn value(&self, x: Point) -> CVec2 {
        (**self).value(x)
    }
    fn analytic_jet(&self, x: Point) -> Option<Jet> {
        (**self).analytic_jet(x)
    }
    fn analytic_derivs(&self) -> bool {
        (**self).analytic_derivs()
    }
}

/// Wraps a closure as a value-only field.
pub struct FnField<F>(pub F);

impl<F: Fn(Point) -> CVec2 + Sync> VectorField for FnField<F> {
    fn value(&self, x: Point) -> CVec2 {
        (self.0)(x)
    }
    fn analytic_derivs(&self) -> bool {
        false
    }
}

/// How derivatives of a field are obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DerivMode {
    /// Closed-form derivatives; an error if the field has none.
    Analytic,
    /// Closed-form derivatives when available, else finite differences with this step.
    Auto(f64),
    /// Finite differences with this step, even if closed forms exist.
    FiniteDifference(f64),
}

impl Default for DerivMode {
    fn default() -> Self {
        DerivMode::Auto(DEFAULT_FD_STEP)
    }
}

pub fn field_jet<F: VectorField + ?Sized>(f: &F, x: Point, mode: DerivMode) -> Result<Jet> {
    match mode {
        DerivMode::Analytic => f.analytic_jet(x).ok_or(Error::DerivativeUnavailable),
        DerivMode::Auto(h) => match f.analytic_jet(x) {
            Some(j) => Ok(j),
            None => fd_jet(f, x, h),
        },
        DerivMode::FiniteDifference(h) => fd_jet(f, x, h),
    }
}

const D1: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
const D2: [f64; 5] = [-1.0, 16.0, -30.0, 16.0, -1.0];

/// Fourth-order central differences on the 5x5 stencil around `x`.
pub fn fd_jet<F: VectorField + ?Sized>(f: &F, x: Point, h: f64) -> Result<Jet> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidInput(format!("finite-difference step must be positive, got {h}")));
    }
    let mut grid = [[[ZERO; 2]; 5]; 5];
    for (a, row) in grid.iter_mut().enumerate() {
        for (b, cell) in row.iter_mut().enumerate() {
            let on_axis = a == 2 || b == 2;
            if on_axis || (D1[a] != 0.0 && D1[b] != 0.0) {
                let v = f.value([x[0] + (a as f64 - 2.0) * h, x[1] + (b as f64 - 2.0) * h]);
                if !(v[0].is_finite() && v[1].is_finite()) {
                    return Err(Error::Domain(format!("field not finite on the stencil around {x:?}")));
                }
                *cell = v;
            }
        }
    }
    let mut j = Jet::zero();
    for i in 0..2 {
        j.value[i] = grid[2][2][i];
        let mut g0 = ZERO;
        let mut g1 = ZERO;
        let mut h00 = ZERO;
        let mut h11 = ZERO;
        let mut h01 = ZERO;
        for k in 0..5 {
            g0 += grid[k][2][i] * D1[k];
            g1 += grid[2][k][i] * D1[k];
            h00 += grid[k][2][i] * D2[k];
            h11 += grid[2][k][i] * D2[k];
            for l in 0..5 {
                if D1[k] != 0.0 && D1[l] != 0.0 {
                    h01 += grid[k][l][i] * (D1[k] * D1[l]);
                }
            }
        }
        j.grad[i] = [g0 / (12.0 * h), g1 / (12.0 * h)];
        let h2 = h * h;
        j.hess[i][0][0] = h00 / (12.0 * h2);
        j.hess[i][1][1] = h11 / (12.0 * h2);
        j.hess[i][0][1] = h01 / (144.0 * h2);
        j.hess[i][1][0] = j.hess[i][0][1];
    }
    Ok(j)
}

/// `mu Lap u + (lambda + mu) grad div u + omega^2 u` from a jet.
pub fn navier_of_jet(j: &Jet, med: &ElasticMedium) -> CVec2 {
    let gd = j.grad_div();
    let w2 = med.omega * med.omega;
    [
        j.laplacian(0) * med.mu + gd[0] * (med.lambda + med.mu) + j.value[0] * w2,
        j.laplacian(1) * med.mu + gd[1] * (med.lambda + med.mu) + j.value[1] * w2,
    ]
}

/// Navier operator applied to `f` at `x`: closed-form derivatives when the
/// field has them, else finite differences with `step`.
pub fn navier_residual<F: VectorField + ?Sized>(f: &F, med: &ElasticMedium, x: Point, step: f64) -> Result<CVec2> {
    navier_residual_with(f, med, x, DerivMode::Auto(step))
}

pub fn navier_residual_with<F: VectorField + ?Sized>(
    f: &F,
    med: &ElasticMedium,
    x: Point,
    mode: DerivMode,
) -> Result<CVec2> {
    Ok(navier_of_jet(&field_jet(f, x, mode)?, med))
}

/// Lamé (static) operator applied to `f` at `x`.
pub fn lame_residual<F: VectorField + ?Sized>(f: &F, med: &ElasticMedium, x: Point, mode: DerivMode) -> Result<CVec2> {
    Ok(navier_of_jet(&field_jet(f, x, mode)?, &med.with_omega(0.0)))
}

/// Split of a jet into `u_p = -(1/k_p^2) grad div u` and
/// `u_s = (1/k_s^2) (-d_2 w, d_1 w)` with `w = d_2 u_1 - d_1 u_2`.
pub fn helmholtz_split_jet(j: &Jet, med: &ElasticMedium) -> (CVec2, CVec2) {
    let gd = j.grad_div();
    let kp2 = med.k_p * med.k_p;
    let ks2 = med.k_s * med.k_s;
    let up = [-gd[0] / kp2, -gd[1] / kp2];
    let dw1 = j.hess[0][1][0] - j.hess[1][0][0];
    let dw2 = j.hess[0][1][1] - j.hess[1][0][1];
    let us = [-dw2 / ks2, dw1 / ks2];
    (up, us)
}

pub fn helmholtz_split<F: VectorField + ?Sized>(
    f: &F,
    med: &ElasticMedium,
    x: Point,
    mode: DerivMode,
) -> Result<(CVec2, CVec2)> {
    if med.omega <= 0.0 {
        return Err(Error::InvalidMedium("Helmholtz split needs omega > 0".into()));
    }
    Ok(helmholtz_split_jet(&field_jet(f, x, mode)?, med))
}

#[inline]
pub fn cnorm(v: &CVec2) -> f64 {
    (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
}

#[inline]
pub fn csub(a: &CVec2, b: &CVec2) -> CVec2 {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn cadd(a: &CVec2, b: &CVec2) -> CVec2 {
    [a[0] + b[0], a[1] + b[1]]
}
