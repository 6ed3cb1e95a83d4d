//! Portable seeded random streams.
//!
//! The generator is PCG-64 (`Lcg128Xsl64`, O'Neill 2014) seeded with
//! `state = seed as u128` and a fixed increment, so every platform produces
//! the same stream for the same seed. Uniforms take the top 53 bits of a
//! 64-bit draw and are shifted into the open interval (0, 1). Gaussians use
//! the basic Box–Muller transform: each pair of uniforms `(u1, u2)` yields
//! `sqrt(-2 ln u1) cos(2π u2)` and `sqrt(-2 ln u1) sin(2π u2)`, consumed in
//! that order.

use rand_core::Rng;
use rand_pcg::Pcg64;

const STREAM: u128 = 0xa02b_dbf7_bb3c_0a7a_c28f_a16a_64ab_f96f;

/// Seeded uniform/Gaussian sampler.
#[derive(Clone, Debug)]
pub struct SeededRng {
    inner: Pcg64,
    spare: Option<f64>,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: Pcg64::new(seed as u128, STREAM),
            spare: None,
        }
    }

    /// Independent child stream, used to split one seed into several
    /// deterministic sub-streams.
    pub fn fork(seed: u64, stream: u64) -> Self {
        let mixed = (seed as u128) | ((stream as u128) << 64);
        Self {
            inner: Pcg64::new(mixed, STREAM),
            spare: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform draw in the open interval (0, 1).
    pub fn uniform(&mut self) -> f64 {
        ((self.inner.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw via Box–Muller.
    pub fn gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = libm::sqrt(-2.0 * libm::log(u1));
        let theta = 2.0 * core::f64::consts::PI * u2;
        self.spare = Some(r * libm::sin(theta));
        r * libm::cos(theta)
    }

    /// Bernoulli draw with success probability `p`.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = SeededRng::new(42);
        let mut b = SeededRng::new(42);
        for _ in 0..100 {
            assert_eq!(a.gaussian().to_bits(), b.gaussian().to_bits());
        }
        let mut c = SeededRng::new(43);
        assert_ne!(SeededRng::new(42).next_u64(), c.next_u64());
    }

    #[test]
    fn moments_are_plausible() {
        let mut r = SeededRng::new(7);
        let n = 200_000;
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let z = r.gaussian();
            s1 += z;
            s2 += z * z;
        }
        let mean = s1 / n as f64;
        let var = s2 / n as f64 - mean * mean;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
        let u = r.uniform();
        assert!(u > 0.0 && u < 1.0);
    }
}
