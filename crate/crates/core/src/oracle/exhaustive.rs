//! Brute-force decoding of tiny instances.

use crate::design::PoolingDesign;
use crate::error::{Error, Result};
use crate::signal::{pool_sums, MeasurementVector};

use super::bounds::ln_multinomial;

/// Default cap on the number of enumerated label vectors.
pub const ENUMERATION_CAP: u64 = 1_000_000;

/// Rearrange `v` into the next lexicographic permutation; `false` after the last.
fn next_permutation(v: &mut [u8]) -> bool {
    let Some(i) = v.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = v.iter().rposition(|&x| x > v[i]).unwrap();
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// Number of bulk label vectors with the given histogram.
pub fn candidate_count(n: usize, counts: &[usize]) -> f64 {
    ln_multinomial(n, counts).exp().round()
}

/// Every bulk label vector with histogram `counts` whose measurements, with the
/// seed items fixed to `seed_labels`, equal the observed ones.
pub fn exhaustive_decode(
    design: &PoolingDesign,
    measurements: &MeasurementVector,
    seed_labels: &[u8],
    counts: &[usize],
    cap: u64,
) -> Result<Vec<Vec<u8>>> {
    let n = design.n_bulk();
    let k: usize = counts.iter().sum();
    if k > n || seed_labels.len() != design.n_seed() || measurements.len() != design.num_pools() {
        return Err(Error::Dimension("instance does not match the design".into()));
    }
    let candidates = candidate_count(n, counts);
    if candidates > cap as f64 {
        return Err(Error::EnumerationCap { candidates, cap });
    }

    let mut bulk = vec![0u8; n - k];
    for (w, &c) in counts.iter().enumerate() {
        bulk.extend(std::iter::repeat_n((w + 1) as u8, c));
    }
    let mut labels = seed_labels.to_vec();
    labels.extend_from_slice(&bulk);
    let offset = seed_labels.len();

    let mut feasible = Vec::new();
    loop {
        if pool_sums(design, &labels) == measurements.values() {
            feasible.push(labels[offset..].to_vec());
        }
        if !next_permutation(&mut labels[offset..]) {
            break;
        }
    }
    Ok(feasible)
}
