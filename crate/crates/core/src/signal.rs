//! Ground-truth labels and additive pool measurements.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::design::{DesignParams, PoolingDesign};
use crate::error::{Error, Result};

/// Labels of every item (seed first, then bulk) with per-compartment weight counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signal {
    labels: Vec<u8>,
    n_seed: usize,
    d: usize,
    compartment_counts: Vec<Vec<usize>>,
}

impl Signal {
    /// Wrap a label vector over all items of `design`. Labels must not exceed `d`.
    pub fn from_labels(design: &PoolingDesign, labels: Vec<u8>, d: usize) -> Result<Self> {
        if labels.len() != design.n_items() {
            return Err(Error::Dimension(format!(
                "{} labels for {} items",
                labels.len(),
                design.n_items()
            )));
        }
        if d > u8::MAX as usize || labels.iter().any(|&l| l as usize > d) {
            return Err(Error::Dimension(format!("labels must lie in 0..={d}")));
        }
        let compartment_counts = (0..design.compartments())
            .map(|c| {
                let mut counts = vec![0usize; d];
                for &l in &labels[design.items(c)] {
                    if l > 0 {
                        counts[l as usize - 1] += 1;
                    }
                }
                counts
            })
            .collect();
        Ok(Self {
            labels,
            n_seed: design.n_seed(),
            d,
            compartment_counts,
        })
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Known labels `τ` of the auxiliary items.
    pub fn seed_labels(&self) -> &[u8] {
        &self.labels[..self.n_seed]
    }

    /// Hidden labels `σ` of the real items.
    pub fn bulk_labels(&self) -> &[u8] {
        &self.labels[self.n_seed..]
    }

    pub fn label(&self, x: usize) -> u8 {
        self.labels[x]
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// `k_w^{(c)}`: items of weight `w >= 1` in compartment `c`.
    pub fn count(&self, compartment: usize, w: usize) -> usize {
        self.compartment_counts[compartment][w - 1]
    }

    pub fn compartment_counts(&self) -> &[Vec<usize>] {
        &self.compartment_counts
    }

    /// Histogram of the bulk labels over `0..=d`.
    pub fn bulk_histogram(&self) -> Vec<usize> {
        histogram(self.bulk_labels(), self.d)
    }

    /// CSV with header `item_index,is_seed,label`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        #[derive(Serialize)]
        struct Row {
            item_index: usize,
            is_seed: bool,
            label: u8,
        }
        let mut w = csv::Writer::from_writer(writer);
        for (x, &label) in self.labels.iter().enumerate() {
            w.serialize(Row {
                item_index: x,
                is_seed: x < self.n_seed,
                label,
            })?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn histogram(labels: &[u8], d: usize) -> Vec<usize> {
    let mut h = vec![0usize; d + 1];
    for &l in labels {
        h[l as usize] += 1;
    }
    h
}

/// Non-zero seed label counts `k'_w = ⌈(s-1)·k_w/ℓ⌉`.
pub fn seed_counts(counts: &[usize], ell: usize, s: usize) -> Vec<usize> {
    counts.iter().map(|&k| ((s - 1) * k).div_ceil(ell)).collect()
}

fn arrange<R: Rng + ?Sized>(len: usize, counts: &[usize], rng: &mut R) -> Vec<u8> {
    let mut labels = vec![0u8; len];
    let mut at = 0;
    for (w, &k) in counts.iter().enumerate() {
        labels[at..at + k].fill((w + 1) as u8);
        at += k;
    }
    labels.shuffle(rng);
    labels
}

/// Draw `σ` uniformly among arrangements with exactly `counts` non-zero labels,
/// and `τ` uniformly among seed arrangements with the seed counts.
pub fn sample_signal<R: Rng + ?Sized>(
    params: &DesignParams,
    design: &PoolingDesign,
    rng: &mut R,
) -> Result<Signal> {
    let d = params.d();
    if d == 0 || d > u8::MAX as usize {
        return Err(Error::Dimension(format!("d = {d} must lie in 1..=255")));
    }
    if design.n_bulk() != params.n || params.k() > params.n {
        return Err(Error::Dimension(format!(
            "design has {} bulk items, parameters ask for n = {} with k = {}",
            design.n_bulk(),
            params.n,
            params.k()
        )));
    }
    let s = design.window();
    let ell = design.compartments() + 1 - s;
    let seed = seed_counts(&params.counts, ell, s);
    let needed: usize = seed.iter().sum();
    if needed > design.n_seed() {
        return Err(Error::SeedOverflow {
            needed,
            available: design.n_seed(),
        });
    }
    let mut labels = arrange(design.n_seed(), &seed, rng);
    labels.extend(arrange(params.n, &params.counts, rng));
    Signal::from_labels(design, labels, d)
}

/// Pool sums `σ̂_a = Σ_{y ∈ ∂a} σ_y`, multiplicities counted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementVector {
    values: Vec<u64>,
}

impl MeasurementVector {
    pub fn new(values: Vec<u64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// CSV with header `pool_index,compartment,value`.
    pub fn write_csv<W: Write>(&self, design: &PoolingDesign, writer: W) -> Result<()> {
        #[derive(Serialize)]
        struct Row {
            pool_index: usize,
            compartment: usize,
            value: u64,
        }
        let mut w = csv::Writer::from_writer(writer);
        for (a, &value) in self.values.iter().enumerate() {
            w.serialize(Row {
                pool_index: a,
                compartment: design.pool_compartment(a),
                value,
            })?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Sum `values` over every pool's member multiset.
pub fn pool_sums<T>(design: &PoolingDesign, values: &[T]) -> Vec<u64>
where
    T: Copy + Into<u64> + Sync,
{
    (0..design.num_pools())
        .into_par_iter()
        .map(|a| design.pool(a).iter().map(|&y| values[y as usize].into()).sum())
        .collect()
}

pub fn measure(design: &PoolingDesign, signal: &Signal) -> MeasurementVector {
    MeasurementVector::new(pool_sums(design, signal.labels()))
}
