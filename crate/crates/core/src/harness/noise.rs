use crate::elastic::FarFieldPattern;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::FRAC_1_SQRT_2;

/// Noisy copy of a pattern and the realized relative `L^2` perturbation.
#[derive(Clone, Debug, PartialEq)]
pub struct NoisyPattern {
    pub pattern: FarFieldPattern,
    pub relative_perturbation: f64,
}

/// Multiplies every sample by `1 + level * zeta` with `zeta` complex standard normal,
/// drawn in order `u_p[0..M]` then `u_s[0..M]` from ChaCha8 seeded with `seed`.
/// `level = 0` returns the input unchanged.
pub fn inject_noise(ffp: &FarFieldPattern, level: f64, seed: u64) -> NoisyPattern {
    if level == 0.0 {
        return NoisyPattern { pattern: ffp.clone(), relative_perturbation: 0.0 };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut zeta = || {
        let (a, b): (f64, f64) = (StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
        Complex64::new(a, b) * FRAC_1_SQRT_2
    };
    let mut out = ffp.clone();
    for u in out.up.iter_mut() {
        *u *= 1.0 + level * zeta();
    }
    for u in out.us.iter_mut() {
        *u *= 1.0 + level * zeta();
    }
    let relative_perturbation = if ffp.l2_norm() > 0.0 { out.rel_l2_diff(ffp) } else { 0.0 };
    NoisyPattern { pattern: out, relative_perturbation }
}
