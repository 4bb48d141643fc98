//! Counter-based random streams.
//!
//! Every random draw in an experiment comes from a ChaCha8 generator keyed
//! by the master seed and positioned on a stream whose id is a hash of
//! `(domain, grid index, hypothesis, trial)`. Streams never share state, so
//! results do not depend on how trials are scheduled across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent families of streams.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u64)]
pub enum Domain {
    /// H₀ draws used only to estimate a calibrated threshold.
    Calibration = 1,
    /// H₀ draws evaluated against the threshold.
    Null = 2,
    /// H₁ draws evaluated against the threshold.
    Alternative = 3,
    /// Ad-hoc single samples (CLI `sample`, `test`).
    Single = 4,
}

/// Coordinates of one stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StreamKey {
    pub domain: Domain,
    pub grid: u64,
    pub trial: u64,
}

impl StreamKey {
    pub fn new(domain: Domain, grid: u64, trial: u64) -> Self {
        StreamKey {
            domain,
            grid,
            trial,
        }
    }

    /// 64-bit stream id.
    pub fn id(&self) -> u64 {
        let mut h = mix(self.domain as u64 ^ 0x6a09_e667_f3bc_c908);
        h = mix(h ^ self.grid);
        mix(h ^ self.trial.wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }
}

/// SplitMix64 finalizer.
#[inline]
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator for `key` under `master_seed`.
pub fn stream(master_seed: u64, key: StreamKey) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(key.id());
    rng
}

/// Generator for a plain seed, as used by single-shot commands.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    stream(seed, StreamKey::new(Domain::Single, 0, 0))
}
