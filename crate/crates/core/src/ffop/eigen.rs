//! Eigensystems of far-field operators: dense Schur path and per-mode disk path.

use super::{channel_scale, FarFieldOperator};
use crate::elastic::{Channel, ElasticMedium};
use crate::error::{Error, Result};
use crate::field::{Point, ZERO};
use crate::forward::{default_truncation, disk_mode_matrices, disk_transfer, scaled_cond, MODE_COND_LIMIT};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Largest normality defect accepted by [`eigensystem`].
pub const NORMALITY_LIMIT: f64 = 1e-6;
const RESIDUAL_LIMIT: f64 = 1e-8;
const ORTHO_LIMIT: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Numeric,
    DiskModal,
    Translated,
}

/// One angular mode of a disk operator: eigenpairs of its 2x2 (p, s) block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeBlock {
    pub n: i64,
    pub values: [Complex64; 2],
    /// `vectors[a][c]`: channel `a` component of eigenvector `c`.
    pub vectors: [[Complex64; 2]; 2],
}

#[derive(Clone, Debug)]
enum Basis {
    Dense(DMatrix<Complex64>),
    Modal { blocks: Vec<ModeBlock>, order: Vec<(usize, usize)>, shift: Point, k: [f64; 2] },
}

/// Eigenvalues sorted by decreasing modulus with orthonormal eigenvectors in the
/// weighted operator basis.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub m: usize,
    pub values: Vec<Complex64>,
    pub provenance: Provenance,
    basis: Basis,
}

fn sort_order(values: &[Complex64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].norm().total_cmp(&values[a].norm()).then(a.cmp(&b)));
    idx
}

/// Full eigendecomposition of a near-normal operator via the complex Schur form.
pub fn eigensystem(op: &FarFieldOperator) -> Result<EigenSystem> {
    if !(op.normality_defect < NORMALITY_LIMIT) {
        return Err(Error::NormalityViolation { defect: op.normality_defect });
    }
    let (q, t) = op.matrix.clone().schur().unpack();
    let n = t.nrows();
    let raw: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    let order = sort_order(&raw);
    let values: Vec<Complex64> = order.iter().map(|&i| raw[i]).collect();
    let mut vecs = DMatrix::<Complex64>::zeros(n, n);
    for (c, &i) in order.iter().enumerate() {
        vecs.set_column(c, &q.column(i));
    }
    let es = EigenSystem { m: op.m, values, provenance: Provenance::Numeric, basis: Basis::Dense(vecs) };
    es.check(Some(&op.matrix))?;
    Ok(es)
}

fn eig2(k: &[[Complex64; 2]; 2]) -> ([Complex64; 2], [[Complex64; 2]; 2]) {
    let (a, b, c, d) = (k[0][0], k[0][1], k[1][0], k[1][1]);
    let half_tr = (a + d) * 0.5;
    let disc = (half_tr * half_tr - (a * d - b * c)).sqrt();
    let (l1, l2) = (half_tr + disc, half_tr - disc);
    let l1 = if l1.norm() >= l2.norm() { l1 } else { l2 };
    let v_a = [b, l1 - a];
    let v_b = [l1 - d, c];
    let na = (v_a[0].norm_sqr() + v_a[1].norm_sqr()).sqrt();
    let nb = (v_b[0].norm_sqr() + v_b[1].norm_sqr()).sqrt();
    let scale = a.norm() + b.norm() + c.norm() + d.norm();
    let v = if na.max(nb) <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
        if (a - l1).norm() <= (d - l1).norm() {
            [Complex64::new(1.0, 0.0), ZERO]
        } else {
            [ZERO, Complex64::new(1.0, 0.0)]
        }
    } else if na >= nb {
        [v_a[0] / na, v_a[1] / na]
    } else {
        [v_b[0] / nb, v_b[1] / nb]
    };
    let q2 = [-v[1].conj(), v[0].conj()];
    let kq2 = [a * q2[0] + b * q2[1], c * q2[0] + d * q2[1]];
    let l2 = q2[0].conj() * kq2[0] + q2[1].conj() * kq2[1];
    ([l1, l2], [[v[0], q2[0]], [v[1], q2[1]]])
}

/// Spectrum of the origin-centered rigid disk of radius `h` from per-mode 2x2 blocks.
pub fn disk_spectrum_fast(h: f64, med: &ElasticMedium, m: usize) -> Result<EigenSystem> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidInput(format!("disk radius must be positive, got {h}")));
    }
    if m < 2 || m % 2 != 0 {
        return Err(Error::InvalidInput(format!("M must be even, got {m}")));
    }
    if med.omega <= 0.0 {
        return Err(Error::InvalidMedium("disk spectrum needs omega > 0".into()));
    }
    let n_tr = default_truncation(h, med);
    let mats = disk_mode_matrices(n_tr, h, med);
    let n_check = ((med.k_s * h).floor() as usize).min(n_tr);
    for (n, mm) in mats.iter().enumerate().take(n_check + 1) {
        let col = |c: usize| (mm.hankel[0][c].norm_sqr() + mm.hankel[1][c].norm_sqr()).sqrt();
        let cond = scaled_cond(&mm.bessel, [col(0), col(1)]);
        if cond > MODE_COND_LIMIT {
            return Err(Error::NearSingularMode { mode: n as i64, cond });
        }
    }
    let ks = [med.k_p, med.k_s];
    let nu = [channel_scale(med, Channel::P), channel_scale(med, Channel::S)];
    let i = Complex64::new(0.0, 1.0);
    let gamma = |k: f64| (2.0 * k / PI).sqrt() * Complex64::from_polar(1.0, PI / 4.0);
    let transfers: Vec<[[Complex64; 2]; 2]> = mats.iter().map(disk_transfer).collect();
    let kappa = |j: i64| {
        let t = transfers[j.unsigned_abs() as usize];
        let mut out = [[ZERO; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                let sign = if j < 0 && a != b { -1.0 } else { 1.0 };
                out[a][b] = nu[a] * gamma(ks[a]) * t[a][b] * sign / i;
            }
        }
        out
    };
    let mi = m as i64;
    let blocks: Vec<ModeBlock> = (0..m)
        .map(|slot| {
            let n = if (slot as i64) < mi / 2 { slot as i64 } else { slot as i64 - mi };
            let mut k = [[ZERO; 2]; 2];
            let mut j = n - ((n + n_tr as i64) / mi) * mi;
            while j > n_tr as i64 {
                j -= mi;
            }
            while j < -(n_tr as i64) {
                j += mi;
            }
            let mut jj = j;
            while jj.unsigned_abs() as usize <= n_tr {
                let kj = kappa(jj);
                for a in 0..2 {
                    for b in 0..2 {
                        k[a][b] += kj[a][b] * (2.0 * PI);
                    }
                }
                jj += mi;
            }
            let (values, vectors) = eig2(&k);
            ModeBlock { n, values, vectors }
        })
        .collect();
    Ok(EigenSystem::from_blocks(m, blocks, Provenance::DiskModal, [0.0, 0.0], ks))
}

/// Outcome of [`disk_spectrum_robust`].
#[derive(Clone, Debug)]
pub struct RobustSpectrum {
    pub spectrum: EigenSystem,
    pub h_requested: f64,
    pub h_used: f64,
}

impl RobustSpectrum {
    pub fn perturbed(&self) -> bool {
        self.h_used != self.h_requested
    }
}

/// [`disk_spectrum_fast`], retried once at `h (1 + 1e-3)` when a mode is near an
/// interior Dirichlet eigenvalue.
pub fn disk_spectrum_robust(h: f64, med: &ElasticMedium, m: usize) -> Result<RobustSpectrum> {
    match disk_spectrum_fast(h, med, m) {
        Ok(spectrum) => Ok(RobustSpectrum { spectrum, h_requested: h, h_used: h }),
        Err(Error::NearSingularMode { .. }) => {
            let h2 = h * (1.0 + 1e-3);
            Ok(RobustSpectrum { spectrum: disk_spectrum_fast(h2, med, m)?, h_requested: h, h_used: h2 })
        }
        Err(e) => Err(e),
    }
}

/// Spectrum of the same disk moved to `z`: eigenvalues unchanged, eigenvectors
/// multiplied by `exp(-i k_a x_m . z)` per channel.
pub fn conjugate_spectrum_translate(es: &EigenSystem, z: Point) -> Result<EigenSystem> {
    match &es.basis {
        Basis::Modal { blocks, order, shift, k } => Ok(EigenSystem {
            m: es.m,
            values: es.values.clone(),
            provenance: Provenance::Translated,
            basis: Basis::Modal {
                blocks: blocks.clone(),
                order: order.clone(),
                shift: [shift[0] + z[0], shift[1] + z[1]],
                k: *k,
            },
        }),
        Basis::Dense(_) => Err(Error::InvalidInput("translation needs a disk spectrum".into())),
    }
}

fn phases(m: usize, shift: Point, k: [f64; 2]) -> Vec<Complex64> {
    (0..2 * m)
        .map(|i| {
            let (a, mm) = (i / m, i % m);
            let t = 2.0 * PI * mm as f64 / m as f64;
            Complex64::from_polar(1.0, -k[a] * (t.cos() * shift[0] + t.sin() * shift[1]))
        })
        .collect()
}

/// Per-slot channel DFT of `psi` after undoing the translation phases for a disk
/// centered at `shift`; slot order matches [`EigenSystem::blocks`].
pub fn mode_transform(psi: &DVector<Complex64>, m: usize, shift: Point, k: [f64; 2]) -> Vec<[Complex64; 2]> {
    let ph = phases(m, shift, k);
    let roots: Vec<Complex64> = (0..m).map(|r| Complex64::from_polar(1.0, -2.0 * PI * r as f64 / m as f64)).collect();
    let s = 1.0 / (m as f64).sqrt();
    let shifted: Vec<Complex64> = (0..2 * m).map(|i| ph[i].conj() * psi[i]).collect();
    let mi = m as i64;
    (0..m)
        .map(|slot| {
            let n = if (slot as i64) < mi / 2 { slot as i64 } else { slot as i64 - mi };
            let mut acc = [ZERO; 2];
            for (a, out) in acc.iter_mut().enumerate() {
                for mm in 0..m {
                    *out += roots[(n * mm as i64).rem_euclid(mi) as usize] * shifted[a * m + mm];
                }
                *out *= s;
            }
            acc
        })
        .collect()
}

impl EigenSystem {
    pub(crate) fn from_blocks(m: usize, blocks: Vec<ModeBlock>, provenance: Provenance, shift: Point, k: [f64; 2]) -> Self {
        let flat: Vec<(usize, usize, Complex64)> =
            blocks.iter().enumerate().flat_map(|(s, b)| (0..2).map(move |c| (s, c, b.values[c]))).collect();
        let vals: Vec<Complex64> = flat.iter().map(|f| f.2).collect();
        let idx = sort_order(&vals);
        let order: Vec<(usize, usize)> = idx.iter().map(|&i| (flat[i].0, flat[i].1)).collect();
        let values = idx.iter().map(|&i| vals[i]).collect();
        EigenSystem { m, values, provenance, basis: Basis::Modal { blocks, order, shift, k } }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Per-mode blocks for disk spectra.
    pub fn blocks(&self) -> Option<&[ModeBlock]> {
        match &self.basis {
            Basis::Modal { blocks, .. } => Some(blocks),
            Basis::Dense(_) => None,
        }
    }

    /// Center of a disk spectrum.
    pub fn shift(&self) -> Option<Point> {
        match &self.basis {
            Basis::Modal { shift, .. } => Some(*shift),
            Basis::Dense(_) => None,
        }
    }

    /// Eigenvector `n` (in sorted order).
    pub fn vector(&self, n: usize) -> DVector<Complex64> {
        match &self.basis {
            Basis::Dense(v) => v.column(n).into_owned(),
            Basis::Modal { blocks, order, shift, k } => {
                let m = self.m;
                let (slot, c) = order[n];
                let b = &blocks[slot];
                let ph = phases(self.m, *shift, *k);
                let s = 1.0 / (m as f64).sqrt();
                DVector::from_fn(2 * m, |i, _| {
                    let (a, mm) = (i / m, i % m);
                    let e = Complex64::from_polar(s, 2.0 * PI * (b.n * mm as i64).rem_euclid(m as i64) as f64 / m as f64);
                    ph[i] * b.vectors[a][c] * e
                })
            }
        }
    }

    pub fn vectors(&self) -> DMatrix<Complex64> {
        match &self.basis {
            Basis::Dense(v) => v.clone(),
            Basis::Modal { .. } => {
                let mut out = DMatrix::zeros(2 * self.m, self.len());
                for n in 0..self.len() {
                    out.set_column(n, &self.vector(n));
                }
                out
            }
        }
    }

    /// `<phi_n, psi>` for all `n` in sorted order.
    pub fn coefficients(&self, psi: &DVector<Complex64>) -> Vec<Complex64> {
        match &self.basis {
            Basis::Dense(v) => (v.adjoint() * psi).iter().copied().collect(),
            Basis::Modal { shift, k, .. } => self.coefficients_from_modes(&mode_transform(psi, self.m, *shift, *k)),
        }
    }

    /// `<phi_n, psi>` from the output of [`mode_transform`]; the shift used there
    /// replaces this spectrum's own. Disk spectra only.
    pub fn coefficients_from_modes(&self, hat: &[[Complex64; 2]]) -> Vec<Complex64> {
        let Basis::Modal { blocks, order, .. } = &self.basis else {
            panic!("coefficients_from_modes needs a disk spectrum");
        };
        order
            .iter()
            .map(|&(slot, c)| {
                let v = &blocks[slot].vectors;
                v[0][c].conj() * hat[slot][0] + v[1][c].conj() * hat[slot][1]
            })
            .collect()
    }

    /// Dense matrix `sum eta_n phi_n phi_n^*`.
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let v = self.vectors();
        let d = DMatrix::from_diagonal(&DVector::from_vec(self.values.clone()));
        &v * d * v.adjoint()
    }

    /// Orthonormality and, given the operator, the eigen-residual bound.
    pub fn check(&self, a: Option<&DMatrix<Complex64>>) -> Result<()> {
        let v = self.vectors();
        let g = v.adjoint() * &v;
        let mut ortho: f64 = 0.0;
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                ortho = ortho.max((g[(i, j)] - target).norm());
            }
        }
        if ortho > ORTHO_LIMIT {
            return Err(Error::EigenCheck(format!("eigenvectors not orthonormal (max deviation {ortho:e})")));
        }
        if let Some(a) = a {
            let norm = self.values.first().map(|z| z.norm()).unwrap_or(0.0).max(f64::MIN_POSITIVE);
            let mut worst: f64 = 0.0;
            for n in 0..self.len() {
                let phi = v.column(n);
                let r = a * phi - phi * self.values[n];
                worst = worst.max(r.norm());
            }
            if worst > RESIDUAL_LIMIT * norm {
                return Err(Error::EigenCheck(format!("eigen-residual {worst:e} exceeds {RESIDUAL_LIMIT:e} |A|")));
            }
        }
        Ok(())
    }
}
