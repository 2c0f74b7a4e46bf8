//! The spatially coupled bipartite multigraph.
//!
//! Items and pools are split into `L = ℓ + s - 1` compartments arranged on a
//! ring. Compartments `0..s-1` hold the auxiliary seed items, `s-1..L` the real
//! (bulk) items. A pool in compartment `t` draws `Γ/s` items uniformly with
//! replacement from each of the `s` item compartments `t-s+1, …, t` (indices
//! taken mod `L`). Consequently an item in compartment `i` only meets pools in
//! compartments `i, …, i+s-1`; the distance `j` from `i` is the item's *offset*
//! into that pool compartment.
//!
//! All indices are 0-based. Seed items occupy the global index range
//! `0..n_seed`, bulk items follow.

use std::ops::Range;

use rand::Rng;
use rayon::prelude::*;

use super::params::{DerivedParams, DesignParams};
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Domain};

/// Per-item view of the incidence structure.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Incidence {
    offsets: Vec<usize>,
    pools: Vec<u32>,
    multiplicity: Vec<u32>,
    degree: Vec<u32>,
    distinct_degree: Vec<u32>,
}

/// An immutable pooling design with its incidence index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolingDesign {
    window: usize,
    item_bounds: Vec<usize>,
    pool_bounds: Vec<usize>,
    pool_compartment: Vec<u32>,
    slots_per_source: Option<usize>,
    pool_offsets: Vec<usize>,
    members: Vec<u32>,
    incidence: Incidence,
}

/// Item compartment boundaries for `n` bulk items: `s-1` seed compartments of
/// `⌈n/ℓ⌉` items, then `ℓ` bulk compartments whose first `n mod ℓ` members get
/// `⌈n/ℓ⌉` items and the rest `⌊n/ℓ⌋`.
pub fn item_layout(n: usize, ell: usize, s: usize) -> Vec<usize> {
    let ceil = n.div_ceil(ell);
    let floor = n / ell;
    let extra = n % ell;
    let mut bounds = Vec::with_capacity(ell + s);
    bounds.push(0);
    let mut at = 0;
    for _ in 0..s - 1 {
        at += ceil;
        bounds.push(at);
    }
    for c in 0..ell {
        at += if c < extra { ceil } else { floor };
        bounds.push(at);
    }
    bounds
}

/// Build the random spatially coupled design. Deterministic in `params.rng_seed`.
pub fn build_design(params: &DesignParams, derived: &DerivedParams) -> Result<PoolingDesign> {
    let s = derived.s;
    let l = derived.compartments();
    if derived.m % l != 0 || derived.gamma % s != 0 || derived.gamma == 0 {
        return Err(Error::InvalidDesign(format!(
            "m = {} must be divisible by {l} and gamma = {} by s = {s}",
            derived.m, derived.gamma
        )));
    }
    if derived.ell > params.n {
        return Err(Error::InvalidDesign(format!(
            "{} bulk compartments for {} items leaves some empty",
            derived.ell, params.n
        )));
    }
    let item_bounds = item_layout(params.n, derived.ell, s);
    if *item_bounds.last().unwrap() > u32::MAX as usize {
        return Err(Error::InvalidDesign("more than 2^32 items".into()));
    }
    let per = derived.pools_per_compartment();
    let pool_bounds: Vec<usize> = (0..=l).map(|c| c * per).collect();
    let gamma = derived.gamma;
    let slots = derived.slots_per_source();
    let seed = params.rng_seed;

    let mut members = vec![0u32; derived.m * gamma];
    members
        .par_chunks_mut(gamma)
        .enumerate()
        .for_each(|(a, pool)| {
            let t = a / per;
            let mut rng = stream_rng(seed, Domain::Design, a as u64);
            for (q, chunk) in pool.chunks_mut(slots).enumerate() {
                let r = (t + l + q - (s - 1)) % l;
                let (lo, hi) = (item_bounds[r] as u32, item_bounds[r + 1] as u32);
                for slot in chunk {
                    *slot = rng.random_range(lo..hi);
                }
            }
        });

    let pool_offsets: Vec<usize> = (0..=derived.m).map(|a| a * gamma).collect();
    Ok(PoolingDesign::assemble(
        s,
        item_bounds,
        pool_bounds,
        pool_offsets,
        members,
        Some(slots),
    ))
}

impl PoolingDesign {
    /// Design from explicit compartment bounds and pool member lists.
    ///
    /// Every member of a pool in compartment `t` must lie in one of the `window`
    /// item compartments ending at `t` (mod the compartment count).
    pub fn from_parts(
        window: usize,
        item_bounds: Vec<usize>,
        pool_bounds: Vec<usize>,
        pools: &[Vec<u32>],
        slots_per_source: Option<usize>,
    ) -> Result<Self> {
        let l = item_bounds.len().saturating_sub(1);
        if l == 0 || pool_bounds.len() != l + 1 {
            return Err(Error::InvalidDesign(format!(
                "{} item bounds and {} pool bounds do not describe the same compartments",
                item_bounds.len(),
                pool_bounds.len()
            )));
        }
        if window == 0 || window > l {
            return Err(Error::InvalidDesign(format!(
                "window {window} must lie in 1..={l}"
            )));
        }
        for b in [&item_bounds, &pool_bounds] {
            if b[0] != 0 || b.windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::InvalidDesign("bounds must start at 0 and be non-decreasing".into()));
            }
        }
        if pool_bounds[l] != pools.len() {
            return Err(Error::InvalidDesign(format!(
                "pool bounds cover {} pools but {} were given",
                pool_bounds[l],
                pools.len()
            )));
        }
        let n_items = item_bounds[l];
        let mut pool_offsets = Vec::with_capacity(pools.len() + 1);
        pool_offsets.push(0);
        let mut members = Vec::with_capacity(pools.iter().map(Vec::len).sum());
        for t in 0..l {
            for a in pool_bounds[t]..pool_bounds[t + 1] {
                for &x in &pools[a] {
                    let x = x as usize;
                    if x >= n_items {
                        return Err(Error::InvalidDesign(format!("pool {a} names item {x} of {n_items}")));
                    }
                    let i = item_bounds.partition_point(|&b| b <= x) - 1;
                    if (t + l - i) % l >= window {
                        return Err(Error::InvalidDesign(format!(
                            "pool {a} in compartment {t} draws item {x} from compartment {i} outside its window"
                        )));
                    }
                }
                members.extend_from_slice(&pools[a]);
                pool_offsets.push(members.len());
            }
        }
        Ok(Self::assemble(
            window,
            item_bounds,
            pool_bounds,
            pool_offsets,
            members,
            slots_per_source,
        ))
    }

    /// Unstructured design: one compartment, no seed, arbitrary pools.
    pub fn from_pools(n_items: usize, pools: &[Vec<u32>]) -> Result<Self> {
        Self::from_parts(1, vec![0, n_items], vec![0, pools.len()], pools, None)
    }

    fn assemble(
        window: usize,
        item_bounds: Vec<usize>,
        pool_bounds: Vec<usize>,
        pool_offsets: Vec<usize>,
        members: Vec<u32>,
        slots_per_source: Option<usize>,
    ) -> Self {
        let l = item_bounds.len() - 1;
        let mut pool_compartment = vec![0u32; pool_bounds[l]];
        for t in 0..l {
            pool_compartment[pool_bounds[t]..pool_bounds[t + 1]].fill(t as u32);
        }
        let incidence = build_incidence(
            window,
            &item_bounds,
            &pool_compartment,
            &pool_offsets,
            &members,
        );
        Self {
            window,
            item_bounds,
            pool_bounds,
            pool_compartment,
            slots_per_source,
            pool_offsets,
            members,
            incidence,
        }
    }

    /// Number of compartments `L = ℓ + s - 1`.
    pub fn compartments(&self) -> usize {
        self.item_bounds.len() - 1
    }

    /// Sliding window `s`.
    pub fn window(&self) -> usize {
        self.window
    }

    pub fn n_items(&self) -> usize {
        self.item_bounds[self.compartments()]
    }

    /// Number of auxiliary (seed) items `n'`.
    pub fn n_seed(&self) -> usize {
        self.item_bounds[self.window - 1]
    }

    pub fn n_bulk(&self) -> usize {
        self.n_items() - self.n_seed()
    }

    pub fn num_pools(&self) -> usize {
        self.pool_offsets.len() - 1
    }

    /// Total number of pool slots, `Σ_a |∂a|`.
    pub fn num_slots(&self) -> usize {
        self.members.len()
    }

    pub fn seed_compartments(&self) -> Range<usize> {
        0..self.window - 1
    }

    pub fn bulk_compartments(&self) -> Range<usize> {
        self.window - 1..self.compartments()
    }

    pub fn is_seed(&self, x: usize) -> bool {
        x < self.n_seed()
    }

    pub fn item_bounds(&self) -> &[usize] {
        &self.item_bounds
    }

    pub fn pool_bounds(&self) -> &[usize] {
        &self.pool_bounds
    }

    pub fn items(&self, compartment: usize) -> Range<usize> {
        self.item_bounds[compartment]..self.item_bounds[compartment + 1]
    }

    pub fn pools_in(&self, compartment: usize) -> Range<usize> {
        self.pool_bounds[compartment]..self.pool_bounds[compartment + 1]
    }

    pub fn item_compartment(&self, x: usize) -> usize {
        self.item_bounds.partition_point(|&b| b <= x) - 1
    }

    pub fn pool_compartment(&self, a: usize) -> usize {
        self.pool_compartment[a] as usize
    }

    /// Slots each pool draws per window compartment, when the design is regular.
    pub fn slots_per_source(&self) -> Option<usize> {
        self.slots_per_source
    }

    /// Members of pool `a` with multiplicity.
    pub fn pool(&self, a: usize) -> &[u32] {
        &self.members[self.pool_offsets[a]..self.pool_offsets[a + 1]]
    }

    /// Pool compartment reached from item compartment `i` at offset `j`.
    pub fn target(&self, i: usize, j: usize) -> usize {
        (i + j) % self.compartments()
    }

    /// Offset of pool compartment `t` relative to item compartment `i`, if any.
    pub fn offset(&self, i: usize, t: usize) -> Option<usize> {
        let l = self.compartments();
        let j = (t + l - i % l) % l;
        (j < self.window).then_some(j)
    }

    /// Item compartments feeding pool compartment `t`, in window order.
    pub fn sources(&self, t: usize) -> impl Iterator<Item = usize> + '_ {
        let l = self.compartments();
        let s = self.window;
        (0..s).map(move |q| (t + l + q - (s - 1)) % l)
    }

    /// Distinct pools of item `x` (sorted) and how often `x` occurs in each.
    pub fn neighbours(&self, x: usize) -> (&[u32], &[u32]) {
        let r = self.incidence.offsets[x]..self.incidence.offsets[x + 1];
        (&self.incidence.pools[r.clone()], &self.incidence.multiplicity[r])
    }

    /// `Δ_x[j]`: pool slots of `x` in its offset-`j` pool compartment.
    pub fn degree(&self, x: usize, j: usize) -> u32 {
        self.incidence.degree[x * self.window + j]
    }

    /// `Δ*_x[j]`: distinct pools of `x` in its offset-`j` pool compartment.
    pub fn distinct_degree(&self, x: usize, j: usize) -> u32 {
        self.incidence.distinct_degree[x * self.window + j]
    }

    /// `Δ_x` summed over offsets.
    pub fn total_degree(&self, x: usize) -> u32 {
        (0..self.window).map(|j| self.degree(x, j)).sum()
    }

    pub fn total_distinct_degree(&self, x: usize) -> u32 {
        (0..self.window).map(|j| self.distinct_degree(x, j)).sum()
    }

    /// Member lists of all pools, for serialisation.
    pub fn pool_lists(&self) -> Vec<Vec<u32>> {
        (0..self.num_pools()).map(|a| self.pool(a).to_vec()).collect()
    }
}

fn build_incidence(
    window: usize,
    item_bounds: &[usize],
    pool_compartment: &[u32],
    pool_offsets: &[usize],
    members: &[u32],
) -> Incidence {
    let l = item_bounds.len() - 1;
    let n_items = item_bounds[l];
    let num_pools = pool_offsets.len() - 1;

    let mut offsets = vec![0usize; n_items + 1];
    for &x in members {
        offsets[x as usize + 1] += 1;
    }
    for x in 0..n_items {
        offsets[x + 1] += offsets[x];
    }
    // Pools are visited in increasing order, so each item's list comes out sorted.
    let mut pools = vec![0u32; members.len()];
    let mut cursor = offsets.clone();
    for a in 0..num_pools {
        for &x in &members[pool_offsets[a]..pool_offsets[a + 1]] {
            pools[cursor[x as usize]] = a as u32;
            cursor[x as usize] += 1;
        }
    }
    drop(cursor);

    let mut multiplicity = Vec::with_capacity(members.len() / 2);
    let mut degree = vec![0u32; n_items * window];
    let mut distinct_degree = vec![0u32; n_items * window];
    let mut write = 0usize;
    let mut start = 0usize;
    for i in 0..l {
        for x in item_bounds[i]..item_bounds[i + 1] {
            let end = offsets[x + 1];
            offsets[x] = write;
            let mut at = start;
            while at < end {
                let a = pools[at];
                let mut run = 1;
                while at + run < end && pools[at + run] == a {
                    run += 1;
                }
                pools[write] = a;
                multiplicity.push(run as u32);
                write += 1;
                let t = pool_compartment[a as usize] as usize;
                let j = (t + l - i) % l;
                degree[x * window + j] += run as u32;
                distinct_degree[x * window + j] += 1;
                at += run;
            }
            start = end;
        }
    }
    offsets[n_items] = write;
    pools.truncate(write);
    pools.shrink_to_fit();
    multiplicity.shrink_to_fit();

    Incidence {
        offsets,
        pools,
        multiplicity,
        degree,
        distinct_degree,
    }
}
