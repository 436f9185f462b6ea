//! Per-path Gaussian streams.
//!
//! Every path owns an independent ChaCha8 stream: the key is expanded from
//! the master seed and the stream id is the path index, so the draws of a
//! path depend only on `(seed, index)` and never on scheduling.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Supplier of standard normal draws, consumed in order by the Euler steppers.
pub trait NormalSource {
    fn next_normal(&mut self) -> f64;
}

/// Identifies the random stream of one Monte-Carlo path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PathStream {
    pub seed: u64,
    pub index: u64,
}

impl PathStream {
    pub fn new(seed: u64, index: u64) -> Self {
        Self { seed, index }
    }

    pub fn normals(&self) -> PathNormals {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.index);
        PathNormals { rng }
    }

    /// Draw number `k` of this stream. Replays the stream from the start, so
    /// use [`PathStream::normals`] for sequential access.
    pub fn gaussian(&self, k: usize) -> f64 {
        let mut normals = self.normals();
        for _ in 0..k {
            normals.next_normal();
        }
        normals.next_normal()
    }
}

/// Sequential standard normal draws of one path.
#[derive(Debug, Clone)]
pub struct PathNormals {
    rng: ChaCha8Rng,
}

impl NormalSource for PathNormals {
    #[inline(always)]
    fn next_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }
}

/// Replays a fixed list of draws, then zeros.
#[derive(Debug, Clone, Default)]
pub struct ReplayNormals {
    draws: Vec<f64>,
    pos: usize,
}

impl ReplayNormals {
    pub fn new(draws: Vec<f64>) -> Self {
        Self { draws, pos: 0 }
    }
}

impl NormalSource for ReplayNormals {
    fn next_normal(&mut self) -> f64 {
        let z = self.draws.get(self.pos).copied().unwrap_or(0.0);
        self.pos += 1;
        z
    }
}

/// Records every draw passed through it.
pub struct Recording<'a, S> {
    inner: &'a mut S,
    pub draws: Vec<f64>,
}

impl<'a, S: NormalSource> Recording<'a, S> {
    pub fn new(inner: &'a mut S) -> Self {
        Self {
            inner,
            draws: Vec::new(),
        }
    }
}

impl<S: NormalSource> NormalSource for Recording<'_, S> {
    fn next_normal(&mut self) -> f64 {
        let z = self.inner.next_normal();
        self.draws.push(z);
        z
    }
}

/// SplitMix64 finalizer, used to derive independent seeds from a master seed.
pub fn mix_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
