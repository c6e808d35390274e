//! Gauss–Legendre rules and adaptive 1D integration.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    if n == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let h = 0.5 * (b - a);
    let m = 0.5 * (a + b);
    (x.iter().map(|t| m + h * t).collect(), w.iter().map(|v| v * h).collect())
}

/// Adaptive bisection comparing a 10-point rule with its two halves.
pub fn adaptive<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, tol: f64) -> Result<Complex64> {
    let (x, w) = gauss_legendre(10);
    let rule = |lo: f64, hi: f64| -> Complex64 {
        let h = 0.5 * (hi - lo);
        let m = 0.5 * (hi + lo);
        x.iter().zip(&w).map(|(t, wt)| f(m + h * t) * (wt * h)).sum()
    };
    let mut total = Complex64::new(0.0, 0.0);
    let mut stack = vec![(a, b, rule(a, b), 0usize)];
    let mut evals = 0usize;
    while let Some((lo, hi, whole, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = rule(lo, mid);
        let right = rule(mid, hi);
        evals += 20;
        let err = (left + right - whole).norm();
        let local_tol = tol * (hi - lo).abs() / (b - a).abs().max(f64::MIN_POSITIVE);
        if err <= local_tol.max(1e-15 * (left + right).norm()) {
            total += left + right;
        } else if depth >= 40 || evals > 200_000 {
            return Err(Error::Quadrature(format!("adaptive rule did not converge on [{lo}, {hi}] (error estimate {err:e})")));
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    Ok(total)
}
