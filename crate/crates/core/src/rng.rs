//! Seed derivation.
//!
//! Every random component hangs off one master seed. A component gets its own
//! ChaCha8 key (`splitmix64(seed ^ domain)`) and, where it needs many
//! independent streams (one per pool, one per replica), selects a stream by
//! index. Streams never overlap, so work can be split across threads without
//! changing any draw.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent consumers of the master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Design = 0x6465_7369_676e_0001,
    Signal = 0x7369_676e_616c_0002,
    Sampler = 0x7361_6d70_6c65_0003,
    Trial = 0x7472_6961_6c00_0004,
}

/// SplitMix64 finaliser; a bijection on `u64`.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// RNG for stream `index` of `domain` under `seed`.
pub fn stream_rng(seed: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ domain as u64));
    rng.set_stream(index);
    rng
}

/// Seed for trial `index` of a batch driven by `master`.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    splitmix64(master.wrapping_add(index) ^ Domain::Trial as u64)
}
