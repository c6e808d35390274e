//! Integer-order Bessel and Hankel functions of a positive real argument.
//!
//! `J_n` comes from Miller's backward recurrence normalised by
//! `J_0 + 2 sum J_2k = 1`. `Y_0`, `Y_1` use Neumann series in the `J_n` for
//! moderate arguments and Hankel's asymptotic expansion above
//! [`ASYMPTOTIC_THRESHOLD`]; higher `Y_n` follow by forward recurrence.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Largest supported order.
pub const MAX_ORDER: u32 = 64;

/// Above this argument `J_0, J_1, Y_0, Y_1` use the Hankel expansion.
pub const ASYMPTOTIC_THRESHOLD: f64 = 25.0;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CylKind {
    J,
    Y,
    H1,
}

fn check_arg(x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("cylinder function argument must be positive and finite, got {x}")));
    }
    Ok(())
}

fn check_order(n: u32) -> Result<()> {
    if n > MAX_ORDER {
        return Err(Error::UnsupportedOrder { order: n, max: MAX_ORDER });
    }
    Ok(())
}

/// Value of `J_n`, `Y_n` or `H^(1)_n` at `x > 0`.
pub fn cyl(kind: CylKind, n: u32, x: f64) -> Result<Complex64> {
    check_order(n)?;
    check_arg(x)?;
    let v = match kind {
        CylKind::J => Complex64::new(bessel_j_all(n as usize, x)[n as usize], 0.0),
        CylKind::Y => Complex64::new(bessel_y_all(n as usize, x)[n as usize], 0.0),
        CylKind::H1 => hankel1_all(n as usize, x)[n as usize],
    };
    Ok(v)
}

/// Derivative in `x` via `C_n' = C_{n-1} - (n/x) C_n`, `C_0' = -C_1`.
pub fn cyl_deriv(kind: CylKind, n: u32, x: f64) -> Result<Complex64> {
    check_order(n)?;
    check_arg(x)?;
    let top = (n as usize).max(1);
    let vals: Vec<Complex64> = match kind {
        CylKind::J => bessel_j_all(top, x).into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
        CylKind::Y => bessel_y_all(top, x).into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
        CylKind::H1 => hankel1_all(top, x),
    };
    Ok(deriv_from_table(&vals, n as usize, x))
}

/// Derivative of order `n` given a table holding orders `0..=max(n,1)`.
pub fn deriv_from_table<T>(vals: &[T], n: usize, x: f64) -> T
where
    T: Copy + std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T> + std::ops::Neg<Output = T>,
{
    if n == 0 {
        -vals[1]
    } else {
        vals[n - 1] - vals[n] * (n as f64 / x)
    }
}

/// `J_0(x) ..= J_nmax(x)`. Caller guarantees `x > 0`.
pub fn bessel_j_all(nmax: usize, x: f64) -> Vec<f64> {
    if x > ASYMPTOTIC_THRESHOLD && (nmax as f64) < x {
        let (j0, j1, _, _) = hankel_asymptotic01(x);
        let mut out = vec![0.0; nmax + 1];
        out[0] = j0;
        if nmax >= 1 {
            out[1] = j1;
        }
        for k in 1..nmax {
            out[k + 1] = (2.0 * k as f64 / x) * out[k] - out[k - 1];
        }
        return out;
    }
    let table = miller_table(nmax, x);
    table[..=nmax].to_vec()
}

/// Miller backward recurrence. Returns normalised `J_0 ..= J_start`.
fn miller_table(nmax: usize, x: f64) -> Vec<f64> {
    let base = (nmax as f64).max(x);
    let mut start = (base + 20.0 + (50.0 * base).sqrt()).ceil() as usize;
    if start % 2 == 1 {
        start += 1;
    }
    let mut j = vec![0.0f64; start + 2];
    j[start + 1] = 0.0;
    j[start] = 1e-300;
    for k in (1..=start).rev() {
        j[k - 1] = (2.0 * k as f64 / x) * j[k] - j[k + 1];
        if j[k - 1].abs() > 1e250 {
            for v in j[k - 1..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    let mut norm = j[0];
    let mut k = 2;
    while k <= start {
        norm += 2.0 * j[k];
        k += 2;
    }
    for v in j.iter_mut() {
        *v /= norm;
    }
    j.truncate(start + 1);
    j
}

/// `Y_0(x) ..= Y_nmax(x)`. Caller guarantees `x > 0`.
pub fn bessel_y_all(nmax: usize, x: f64) -> Vec<f64> {
    let (y0, y1) = if x > ASYMPTOTIC_THRESHOLD {
        let (_, _, y0, y1) = hankel_asymptotic01(x);
        (y0, y1)
    } else {
        neumann_y01(x)
    };
    let mut out = vec![0.0; nmax.max(1) + 1];
    out[0] = y0;
    out[1] = y1;
    for k in 1..nmax {
        out[k + 1] = (2.0 * k as f64 / x) * out[k] - out[k - 1];
    }
    out.truncate(nmax + 1);
    out
}

/// `H^(1)_0(x) ..= H^(1)_nmax(x)`. Caller guarantees `x > 0`.
pub fn hankel1_all(nmax: usize, x: f64) -> Vec<Complex64> {
    let j = bessel_j_all(nmax, x);
    let y = bessel_y_all(nmax, x);
    j.iter().zip(&y).map(|(&a, &b)| Complex64::new(a, b)).collect()
}

fn neumann_y01(x: f64) -> (f64, f64) {
    let j = miller_table(1, x);
    let lg = (0.5 * x).ln() + EULER_GAMMA;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut k = 1;
    while 2 * k + 1 < j.len() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s0 += sign * j[2 * k] / k as f64;
        s1 += sign * (j[2 * k - 1] - j[2 * k + 1]) / k as f64;
        k += 1;
    }
    let y0 = 2.0 / PI * (lg * j[0] - 2.0 * s0);
    let y1 = -2.0 / PI * (j[0] / x - lg * j[1] - s1);
    (y0, y1)
}

/// Hankel's expansion for orders 0 and 1: returns `(J0, J1, Y0, Y1)`.
fn hankel_asymptotic01(x: f64) -> (f64, f64, f64, f64) {
    let pq = |nu: f64| -> (f64, f64) {
        let mu = 4.0 * nu * nu;
        let mut p = 1.0;
        let mut q = 0.0;
        let mut term = 1.0;
        let mut last = f64::INFINITY;
        for k in 1..60 {
            let odd = (2 * k - 1) as f64;
            term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
            if term.abs() > last || term.abs() < 1e-18 {
                break;
            }
            last = term.abs();
            match k % 4 {
                1 => q += term,
                2 => p -= term,
                3 => q -= term,
                _ => p += term,
            }
        }
        (p, q)
    };
    let amp = (2.0 / (PI * x)).sqrt();
    let (p0, q0) = pq(0.0);
    let (p1, q1) = pq(1.0);
    let chi0 = x - 0.25 * PI;
    let chi1 = x - 0.75 * PI;
    let (s0, c0) = chi0.sin_cos();
    let (s1, c1) = chi1.sin_cos();
    (
        amp * (p0 * c0 - q0 * s0),
        amp * (p1 * c1 - q1 * s1),
        amp * (p0 * s0 + q0 * c0),
        amp * (p1 * s1 + q1 * c1),
    )
}
