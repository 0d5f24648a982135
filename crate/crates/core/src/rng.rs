//! Seeded random streams.
//!
//! Every random draw in the crate comes from a [`StreamRng`], a ChaCha8
//! generator keyed by `(seed, stream)`. Distinct streams of the same seed are
//! independent, so Monte Carlo work can be split into chunks (one stream per
//! chunk) and reduced in a fixed order without depending on thread count.
//!
//! Uniforms use the top 53 bits of a 64-bit word. Normals use the Box–Muller
//! transform, consuming two uniforms per pair of normals.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

const TWO_POW_M53: f64 = 1.0 / 9_007_199_254_740_992.0;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct StreamRng {
    inner: ChaCha8Rng,
    seed: u64,
    stream: u64,
    spare_normal: Option<f64>,
}

impl StreamRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        StreamRng {
            inner,
            seed,
            stream,
            spare_normal: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// A child generator for substream `j`, keyed off this generator's
    /// `(seed, stream)` and independent of how much of it has been consumed.
    pub fn fork(&self, j: u64) -> StreamRng {
        let key = splitmix64(self.seed ^ splitmix64(self.stream.wrapping_add(0x5eed)));
        StreamRng::new(key, splitmix64(j.wrapping_add(1)))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * TWO_POW_M53
    }

    /// Uniform on `(0, 1]`, safe to take the logarithm of.
    fn uniform_open0(&mut self) -> f64 {
        ((self.inner.next_u64() >> 11) + 1) as f64 * TWO_POW_M53
    }

    /// Standard normal via Box–Muller.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = self.uniform_open0();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        self.spare_normal = Some(radius * s);
        radius * c
    }

    /// Index drawn from the (normalised) categorical distribution `weights`.
    pub fn categorical(&mut self, weights: &[f64]) -> usize {
        let u = self.uniform();
        let mut acc = 0.0;
        for (i, w) in weights.iter().enumerate() {
            acc += w;
            if u < acc {
                return i;
            }
        }
        weights.len() - 1
    }
}
