//! Counter-based random streams.
//!
//! Every random quantity in a run is a pure function of a key path
//! (run seed, domain, generation, member, ...) and a counter. Nothing
//! carries hidden state, so populations can be sampled in any order or on
//! any number of threads and still come out bit-identical.

/// Domain tags keep the training, environment and evaluation streams
/// disjoint even when they share the other key components.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Connectivity = 0x636f_6e6e,
    TrainEnv = 0x7472_656e,
    Eval = 0x6576_616c,
    EvalEnv = 0x6576_656e,
    Perturbation = 0x7065_7274,
    Init = 0x696e_6974,
    Target = 0x7461_7267,
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A keyed stream. `at(i)` is the i-th word of the stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stream {
    key: u64,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Self {
            key: mix64(seed ^ 0x5a71_5a71_5a71_5a71),
        }
    }

    /// Derives a child stream; distinct components give unrelated streams.
    #[must_use]
    pub fn derive(self, component: u64) -> Self {
        Self {
            key: mix64(self.key.wrapping_add(GOLDEN) ^ mix64(component.wrapping_add(GOLDEN))),
        }
    }

    #[must_use]
    pub fn domain(self, domain: Domain) -> Self {
        self.derive(domain as u64)
    }

    #[inline]
    pub fn at(&self, counter: u64) -> u64 {
        mix64(self.key ^ counter.wrapping_mul(GOLDEN).wrapping_add(GOLDEN))
    }

    /// Uniform in [0, 1) with 53 bits of resolution.
    #[inline]
    pub fn uniform_at(&self, counter: u64) -> f64 {
        (self.at(counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box-Muller on counters `2i` and `2i+1`.
    pub fn normal_at(&self, counter: u64) -> f64 {
        let u1 = 1.0 - self.uniform_at(counter.wrapping_mul(2));
        let u2 = self.uniform_at(counter.wrapping_mul(2).wrapping_add(1));
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Uniform in [lo, hi).
    pub fn range_at(&self, counter: u64, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform_at(counter)
    }
}
