//! Truncated bivariate Taylor jets of total degree four.
//!
//! Used to differentiate closed-form real kernels (Kelvin tensor and the
//! half-plane tensor built from it) exactly up to second order after one
//! application of a second-order operator.

use std::ops::{Add, Mul, Neg, Sub};

pub const DEGREE: usize = 4;
const LEN: usize = (DEGREE + 1) * (DEGREE + 2) / 2;

#[inline]
const fn idx(a: usize, b: usize) -> usize {
    let d = a + b;
    d * (d + 1) / 2 + b
}

/// Coefficients `c[a,b]` of `sum c[a,b] t1^a t2^b`, valid up to total degree `valid`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2 {
    c: [f64; LEN],
    valid: usize,
}

impl Jet2 {
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; LEN];
        c[0] = v;
        Jet2 { c, valid: DEGREE }
    }

    /// The coordinate `x_dir` expanded about `at`.
    pub fn variable(dir: usize, at: f64) -> Self {
        let mut j = Self::constant(at);
        if dir == 0 {
            j.c[idx(1, 0)] = 1.0;
        } else {
            j.c[idx(0, 1)] = 1.0;
        }
        j
    }

    pub fn valid_degree(&self) -> usize {
        self.valid
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn coeff(&self, a: usize, b: usize) -> f64 {
        if a + b > self.valid {
            0.0
        } else {
            self.c[idx(a, b)]
        }
    }

    /// Partial derivative `d^a_1 d^b_2` at the expansion point.
    pub fn partial(&self, a: usize, b: usize) -> f64 {
        assert!(a + b <= self.valid, "derivative beyond the valid degree");
        let fact = |n: usize| (1..=n).product::<usize>() as f64;
        self.c[idx(a, b)] * fact(a) * fact(b)
    }

    /// Jet of the partial derivative in direction `dir`.
    pub fn derivative(&self, dir: usize) -> Self {
        assert!(self.valid >= 1);
        let mut out = [0.0; LEN];
        for d in 0..self.valid {
            for b in 0..=d {
                let a = d - b;
                out[idx(a, b)] = if dir == 0 {
                    (a + 1) as f64 * self.c[idx(a + 1, b)]
                } else {
                    (b + 1) as f64 * self.c[idx(a, b + 1)]
                };
            }
        }
        Jet2 { c: out, valid: self.valid - 1 }
    }

    /// Composition with `t1 -> -t1`.
    pub fn flip_first(&self) -> Self {
        let mut out = *self;
        for d in 0..=DEGREE {
            for b in 0..=d {
                let a = d - b;
                if a % 2 == 1 {
                    out.c[idx(a, b)] = -out.c[idx(a, b)];
                }
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        out.c.iter_mut().for_each(|v| *v *= s);
        out
    }

    fn truncated(mut self) -> Self {
        for d in self.valid + 1..=DEGREE {
            for b in 0..=d {
                self.c[idx(d - b, b)] = 0.0;
            }
        }
        self
    }

    /// `sum_k coeffs[k] t^k` where `t = self - self.value()`.
    fn compose_series(&self, coeffs: &[f64; DEGREE + 1]) -> Self {
        let mut t = *self;
        t.c[0] = 0.0;
        let mut out = Self::constant(coeffs[0]);
        out.valid = self.valid;
        let mut power = Self::constant(1.0);
        for &ck in coeffs.iter().skip(1) {
            power = power * t;
            out = out + power.scale(ck);
        }
        out.truncated()
    }

    pub fn recip(&self) -> Self {
        let a0 = self.c[0];
        let mut k = [0.0; DEGREE + 1];
        let mut p = 1.0 / a0;
        for v in k.iter_mut() {
            *v = p;
            p *= -1.0 / a0;
        }
        self.compose_series(&k)
    }

    pub fn ln(&self) -> Self {
        let a0 = self.c[0];
        let mut k = [0.0; DEGREE + 1];
        k[0] = a0.ln();
        let mut p = 1.0;
        for (n, v) in k.iter_mut().enumerate().skip(1) {
            p /= a0;
            *v = if n % 2 == 1 { p / n as f64 } else { -p / n as f64 };
        }
        self.compose_series(&k)
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        let mut c = [0.0; LEN];
        for i in 0..LEN {
            c[i] = self.c[i] + o.c[i];
        }
        Jet2 { c, valid: self.valid.min(o.valid) }.truncated()
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        self + (-o)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        let valid = self.valid.min(o.valid);
        let mut c = [0.0; LEN];
        for d1 in 0..=valid {
            for b1 in 0..=d1 {
                let x = self.c[idx(d1 - b1, b1)];
                if x == 0.0 {
                    continue;
                }
                for d2 in 0..=valid - d1 {
                    for b2 in 0..=d2 {
                        c[idx(d1 - b1 + d2 - b2, b1 + b2)] += x * o.c[idx(d2 - b2, b2)];
                    }
                }
            }
        }
        Jet2 { c, valid }
    }
}
