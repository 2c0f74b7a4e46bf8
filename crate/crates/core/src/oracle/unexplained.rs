//! Conditional law of the unexplained neighbourhood sum under a correct prefix.
//!
//! With every item before compartment `i` labelled correctly, the residual mass
//! of the offset-`j` pools of `x ∈ V[i]` comes from slots drawing from the open
//! compartments `r >= i` of the window. Given the pools of `x`, its label and the
//! per-compartment weight counts, each such slot is an independent uniform draw
//! from `V[r]` (from `V[i] \ {x}` for the non-`x` slots of `x`'s own block).

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decoder::{neighbourhood_sum, residuals_from_scratch, ScoreModel};
use crate::design::PoolingDesign;
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Domain};
use crate::signal::{MeasurementVector, Signal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerMode {
    /// Redraw the pool memberships and sum the true labels.
    Direct,
    /// Draw the per-weight slot counts from independent multinomials.
    Multinomial,
}

/// Multinomial block of one open source compartment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceBlock {
    pub compartment: usize,
    /// `n^{(r;j)}`: slots drawn from this compartment.
    pub trials: u64,
    /// `p^{(r;j)}(w)` for `w = 1..=d`.
    pub probs: Vec<f64>,
}

impl SourceBlock {
    fn mean(&self) -> f64 {
        self.trials as f64 * first_moment(&self.probs)
    }

    fn variance(&self) -> f64 {
        let m1 = first_moment(&self.probs);
        let m2: f64 = self.probs.iter().enumerate().map(|(w, p)| ((w + 1) * (w + 1)) as f64 * p).sum();
        self.trials as f64 * (m2 - m1 * m1)
    }
}

fn first_moment(probs: &[f64]) -> f64 {
    probs.iter().enumerate().map(|(w, p)| (w + 1) as f64 * p).sum()
}

/// Exact conditional mean and variance of `U_x^j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalMoments {
    pub item: usize,
    pub offset: usize,
    pub label: u8,
    /// `Δ_x[j]`.
    pub degree: u32,
    /// `Δ*_x[j]`.
    pub distinct_degree: u32,
    pub blocks: Vec<SourceBlock>,
    pub mean: f64,
    pub variance: f64,
}

/// Source compartments of `F[i+j]` at or after `i` in sweep order.
fn open_sources(design: &PoolingDesign, i: usize, j: usize) -> Vec<usize> {
    design.sources(design.target(i, j)).filter(|&r| r >= i).collect()
}

/// `u(i,j)` under a correct prefix.
pub fn open_source_count(design: &PoolingDesign, i: usize, j: usize) -> usize {
    open_sources(design, i, j).len()
}

fn check_item(design: &PoolingDesign, x: usize, j: usize) -> Result<usize> {
    if x >= design.n_items() || design.is_seed(x) || j >= design.window() {
        return Err(Error::Dimension(format!("({x}, {j}) is not a bulk item and offset")));
    }
    design
        .slots_per_source()
        .ok_or_else(|| Error::InvalidDesign("conditional law needs a regular design".into()))
}

pub fn conditional_moments(x: usize, j: usize, design: &PoolingDesign, signal: &Signal) -> Result<ConditionalMoments> {
    let slots = check_item(design, x, j)? as u64;
    let i = design.item_compartment(x);
    let label = signal.label(x);
    let degree = design.degree(x, j);
    let distinct_degree = design.distinct_degree(x, j);
    let blocks: Vec<SourceBlock> = open_sources(design, i, j)
        .into_iter()
        .map(|r| {
            let own = (r == i) as u64;
            let size = (design.items(r).len() as u64 - own) as f64;
            let probs = (1..=signal.d())
                .map(|w| {
                    let mine = (own == 1 && label as usize == w) as usize;
                    if size > 0.0 { (signal.count(r, w) - mine) as f64 / size } else { 0.0 }
                })
                .collect();
            SourceBlock {
                compartment: r,
                trials: distinct_degree as u64 * slots - own * degree as u64,
                probs,
            }
        })
        .collect();
    let mean = degree as f64 * label as f64 + blocks.iter().map(SourceBlock::mean).sum::<f64>();
    let variance = blocks.iter().map(SourceBlock::variance).sum();
    Ok(ConditionalMoments { item: x, offset: j, label, degree, distinct_degree, blocks, mean, variance })
}

/// Sampler for the conditional law of `U_x^j`, in either representation.
#[derive(Debug, Clone)]
pub struct UnexplainedSampler<'a> {
    design: &'a PoolingDesign,
    signal: &'a Signal,
    moments: ConditionalMoments,
    /// Multiplicity of `x` in each distinct offset-`j` pool.
    multiplicities: Vec<u32>,
    slots: usize,
}

impl<'a> UnexplainedSampler<'a> {
    pub fn new(x: usize, j: usize, design: &'a PoolingDesign, signal: &'a Signal) -> Result<Self> {
        let moments = conditional_moments(x, j, design, signal)?;
        let slots = design.slots_per_source().unwrap_or(0);
        let range = design.pools_in(design.target(design.item_compartment(x), j));
        let (pools, mult) = design.neighbours(x);
        let multiplicities = pools
            .iter()
            .zip(mult)
            .filter(|(&a, _)| range.contains(&(a as usize)))
            .map(|(_, &m)| m)
            .collect();
        Ok(Self { design, signal, moments, multiplicities, slots })
    }

    pub fn moments(&self) -> &ConditionalMoments {
        &self.moments
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, mode: SamplerMode) -> u64 {
        let fixed = self.moments.degree as u64 * self.moments.label as u64;
        fixed
            + match mode {
                SamplerMode::Direct => self.sample_direct(rng),
                SamplerMode::Multinomial => self.sample_multinomial(rng),
            }
    }

    fn sample_direct<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let x = self.moments.item;
        let i = self.design.item_compartment(x);
        let labels = self.signal.labels();
        let mut total = 0u64;
        for block in &self.moments.blocks {
            let items = self.design.items(block.compartment);
            let own = block.compartment == i;
            let span = items.len() - own as usize;
            for &mu in &self.multiplicities {
                let draws = self.slots - if own { mu as usize } else { 0 };
                for _ in 0..draws {
                    let mut y = items.start + rng.random_range(0..span);
                    if own && y >= x {
                        y += 1;
                    }
                    total += labels[y] as u64;
                }
            }
        }
        total
    }

    fn sample_multinomial<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        self.moments
            .blocks
            .iter()
            .flat_map(|block| {
                multinomial_counts(rng, block.trials, &block.probs)
                    .into_iter()
                    .enumerate()
                    .map(|(w, hits)| (w + 1) as u64 * hits)
            })
            .sum()
    }

    /// `count` independent samples, reproducible for a given seed.
    pub fn sample_many(&self, count: usize, seed: u64, mode: SamplerMode) -> Vec<f64> {
        const CHUNK: usize = 4096;
        (0..count.div_ceil(CHUNK))
            .into_par_iter()
            .flat_map_iter(|c| {
                let mut rng = stream_rng(seed, Domain::Sampler, c as u64);
                let len = CHUNK.min(count - c * CHUNK);
                (0..len).map(move |_| self.sample(&mut rng, mode) as f64).collect::<Vec<_>>()
            })
            .collect()
    }
}

/// One draw of `U_x^j` from its conditional law.
pub fn sample_unexplained<R: Rng + ?Sized>(
    x: usize,
    j: usize,
    design: &PoolingDesign,
    signal: &Signal,
    rng: &mut R,
    mode: SamplerMode,
) -> Result<u64> {
    Ok(UnexplainedSampler::new(x, j, design, signal)?.sample(rng, mode))
}

/// Per-category counts of `trials` draws with category probabilities `probs`
/// (the remainder is the null category), via a chain of binomials.
pub fn multinomial_counts<R: Rng + ?Sized>(rng: &mut R, trials: u64, probs: &[f64]) -> Vec<u64> {
    let mut left = trials;
    let mut mass = 1.0;
    probs
        .iter()
        .map(|&p| {
            if left == 0 {
                return 0;
            }
            let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
            let hits = Binomial::new(left, q).expect("probability in [0, 1]").sample(rng);
            left -= hits;
            mass -= p;
            hits
        })
        .collect()
}

/// Labels agreeing with the truth before compartment `i` and zero from `i` on.
pub fn truth_prefix(design: &PoolingDesign, signal: &Signal, compartment: usize) -> Vec<u8> {
    let cut = design.items(compartment).start;
    let mut labels = signal.labels().to_vec();
    labels[cut..].fill(0);
    labels
}

/// Idealised scores `N_x` of every item of `compartment`, evaluated against the
/// truth prefix and centred by the exact conditional mean.
pub fn idealized_scores(
    design: &PoolingDesign,
    measurements: &MeasurementVector,
    signal: &Signal,
    model: &ScoreModel,
    compartment: usize,
) -> Result<Vec<f64>> {
    let residuals = residuals_from_scratch(design, measurements, &truth_prefix(design, signal, compartment));
    design
        .items(compartment)
        .into_par_iter()
        .map(|x| idealized_with(x, design, &residuals, signal, model))
        .collect()
}

pub fn idealized_score(
    x: usize,
    design: &PoolingDesign,
    measurements: &MeasurementVector,
    signal: &Signal,
    model: &ScoreModel,
) -> Result<f64> {
    let i = design.item_compartment(x);
    let residuals = residuals_from_scratch(design, measurements, &truth_prefix(design, signal, i));
    idealized_with(x, design, &residuals, signal, model)
}

fn idealized_with(
    x: usize,
    design: &PoolingDesign,
    residuals: &[i64],
    signal: &Signal,
    model: &ScoreModel,
) -> Result<f64> {
    let i = design.item_compartment(x);
    (0..design.window())
        .map(|j| {
            let moments = conditional_moments(x, j, design, signal)?;
            let observed = neighbourhood_sum(design, residuals, x, j) as f64;
            let centred = observed - moments.mean + moments.degree as f64 * moments.label as f64;
            Ok(model.term(j, centred, open_source_count(design, i, j)))
        })
        .sum()
}

/// `E[N_x | ε_x]`: the part of the idealised score that survives centring.
pub fn idealized_mean(x: usize, design: &PoolingDesign, signal: &Signal, model: &ScoreModel) -> f64 {
    let i = design.item_compartment(x);
    let label = signal.label(x) as f64;
    (0..design.window())
        .map(|j| model.term(j, design.degree(x, j) as f64 * label, open_source_count(design, i, j)))
        .sum()
}
