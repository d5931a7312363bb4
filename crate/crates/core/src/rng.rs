//! Reproducible random streams.
//!
//! Every sampler takes an [`RngStream`]: a `(master_seed, stream_id)` pair
//! that fully determines the generated sequence. Parallel code hands each
//! unit of work (trial, realization) its own stream id, so results do not
//! depend on thread count or scheduling.

use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;
use serde::{Deserialize, Serialize};

/// Identifier of an independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    /// Stream for a sub-task (trial index, realization index, ...).
    pub fn substream(&self, index: u64) -> Self {
        Self {
            master_seed: self.master_seed,
            stream_id: splitmix64(self.stream_id ^ (0x9e37_79b9_7f4a_7c15 ^ index)),
        }
    }

    /// Full-strength generator for this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut seed = [0u8; 32];
        let mut x = self.master_seed ^ splitmix64(self.stream_id);
        for chunk in seed.chunks_mut(8) {
            x = splitmix64(x);
            chunk.copy_from_slice(&x.to_le_bytes());
        }
        ChaCha8Rng::from_seed(seed)
    }

    /// Lightweight per-site generator, keyed by integer lattice coordinates.
    ///
    /// Perturbations are indexed by the lattice site, not by draw order, so
    /// re-sampling one site leaves every other site's offset untouched.
    pub fn site_rng(&self, coords: &[i64]) -> SiteRng {
        let mut h = self.master_seed ^ splitmix64(self.stream_id ^ 0xc2b2_ae3d_27d4_eb4f);
        for &c in coords {
            h = splitmix64(h ^ (c as u64));
        }
        SiteRng { state: h }
    }
}

/// SplitMix64 step; used both for seed derivation and for the per-site
/// generator below.
#[inline]
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Minimal counter-based generator for per-lattice-site Gaussian offsets.
///
/// ChaCha is overkill here: a trial touches thousands of sites and only needs
/// a couple of normals per site.
#[derive(Debug, Clone)]
pub struct SiteRng {
    state: u64,
}

impl SiteRng {
    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in (0, 1].
    #[inline]
    fn next_unit(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 1.0) * (1.0 / 9_007_199_254_740_992.0)
    }

    /// One standard normal pair via Box-Muller.
    #[inline]
    pub fn normal_pair(&mut self) -> (f64, f64) {
        let u = self.next_unit();
        let v = self.next_unit();
        let r = (-2.0 * u.ln()).sqrt();
        let phi = 2.0 * std::f64::consts::PI * v;
        (r * phi.cos(), r * phi.sin())
    }

    /// Standard normal vector of dimension `dim`.
    pub fn normal_vector(&mut self, dim: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(dim);
        while out.len() < dim {
            let (a, b) = self.normal_pair();
            out.push(a);
            if out.len() < dim {
                out.push(b);
            }
        }
        out
    }
}
