//! Compartment-by-compartment threshold decoder.

mod model;
mod report;
mod thresholds;

use std::time::{Duration, Instant};

use rayon::prelude::*;

pub use model::{expectation_estimate, ScoreModel};
pub use report::{write_trace, DecodeReport, TraceRow};
pub use thresholds::Thresholds;

use crate::design::PoolingDesign;
use crate::error::{Error, Result};
use crate::signal::{pool_sums, MeasurementVector};

/// Running decoder state: the estimate, per-pool residuals and the frontier.
#[derive(Debug, Clone)]
pub struct Decoder<'a> {
    design: &'a PoolingDesign,
    model: ScoreModel,
    thresholds: Thresholds,
    estimate: Vec<u8>,
    residuals: Vec<i64>,
    known: Vec<bool>,
    frontier: usize,
    scores: Vec<f64>,
}

impl<'a> Decoder<'a> {
    /// Start a sweep with the seed labels loaded into the estimate.
    pub fn new(
        design: &'a PoolingDesign,
        measurements: &MeasurementVector,
        seed_labels: &[u8],
        model: ScoreModel,
        thresholds: Thresholds,
    ) -> Result<Self> {
        if measurements.len() != design.num_pools() {
            return Err(Error::Dimension(format!(
                "{} measurements for {} pools",
                measurements.len(),
                design.num_pools()
            )));
        }
        if seed_labels.len() != design.n_seed() {
            return Err(Error::Dimension(format!(
                "{} seed labels for {} seed items",
                seed_labels.len(),
                design.n_seed()
            )));
        }
        let mut estimate = vec![0u8; design.n_items()];
        estimate[..design.n_seed()].copy_from_slice(seed_labels);
        let residuals = residuals_from_scratch(design, measurements, &estimate);
        let mut known = vec![false; design.compartments()];
        for c in design.seed_compartments() {
            known[c] = true;
        }
        Ok(Self {
            design,
            model,
            thresholds,
            estimate,
            residuals,
            known,
            frontier: design.bulk_compartments().start,
            scores: vec![f64::NAN; design.n_items()],
        })
    }

    pub fn estimate(&self) -> &[u8] {
        &self.estimate
    }

    pub fn residuals(&self) -> &[i64] {
        &self.residuals
    }

    /// Scores of decoded items; NaN for seed items and items not reached yet.
    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn thresholds(&self) -> &Thresholds {
        &self.thresholds
    }

    pub fn model(&self) -> &ScoreModel {
        &self.model
    }

    /// Next compartment to decode, or `None` once the sweep is complete.
    pub fn frontier(&self) -> Option<usize> {
        (self.frontier < self.design.compartments()).then_some(self.frontier)
    }

    /// `u(i,j)`: source compartments of `F[i+j]` that are neither seed nor committed.
    pub fn unexplained_count(&self, i: usize, j: usize) -> usize {
        self.design
            .sources(self.design.target(i, j))
            .filter(|&r| !self.known[r])
            .count()
    }

    /// `𝒰_x^j`: sum of current residuals over the distinct offset-`j` pools of `x`.
    pub fn unexplained_sum(&self, x: usize, j: usize) -> i64 {
        neighbourhood_sum(self.design, &self.residuals, x, j)
    }

    /// `M_x^j` at the current frontier.
    pub fn expectation_estimate(&self, x: usize, j: usize) -> f64 {
        let i = self.design.item_compartment(x);
        expectation_estimate(self.design, &self.model, x, j, self.unexplained_count(i, j))
    }

    /// `𝒩_x` against the current state.
    pub fn score(&self, x: usize) -> f64 {
        let i = self.design.item_compartment(x);
        let u: Vec<usize> = (0..self.design.window())
            .map(|j| self.unexplained_count(i, j))
            .collect();
        self.score_with(x, &u)
    }

    fn score_with(&self, x: usize, unexplained: &[usize]) -> f64 {
        unexplained
            .iter()
            .enumerate()
            .map(|(j, &u)| {
                let m = expectation_estimate(self.design, &self.model, x, j, u);
                let centred = self.unexplained_sum(x, j) as f64 - m;
                self.model.term(j, centred, u)
            })
            .sum()
    }

    /// Score and classify the frontier compartment against the frozen state,
    /// then commit its labels. Returns the compartment decoded.
    pub fn step(&mut self) -> Option<usize> {
        let c = self.frontier()?;
        let unexplained: Vec<usize> = (0..self.design.window())
            .map(|j| self.unexplained_count(c, j))
            .collect();
        let items = self.design.items(c);
        let scored: Vec<(f64, u8)> = items
            .clone()
            .into_par_iter()
            .map(|x| {
                let score = self.score_with(x, &unexplained);
                (score, self.thresholds.classify(score))
            })
            .collect();
        for (x, (score, label)) in items.zip(scored) {
            self.scores[x] = score;
            self.estimate[x] = label;
            if label > 0 {
                let (pools, mult) = self.design.neighbours(x);
                for (&a, &mu) in pools.iter().zip(mult) {
                    self.residuals[a as usize] -= label as i64 * mu as i64;
                }
            }
        }
        self.known[c] = true;
        self.frontier += 1;
        Some(c)
    }

    pub fn run(mut self) -> Decoded {
        let start = Instant::now();
        while self.step().is_some() {}
        Decoded {
            estimate: self.estimate,
            scores: self.scores,
            runtime: start.elapsed(),
        }
    }
}

/// Sum of `residuals` over the distinct offset-`j` pools of item `x`.
pub fn neighbourhood_sum(design: &PoolingDesign, residuals: &[i64], x: usize, j: usize) -> i64 {
    let i = design.item_compartment(x);
    let (pools, _) = design.neighbours(x);
    let range = design.pools_in(design.target(i, j));
    let lo = pools.partition_point(|&a| (a as usize) < range.start);
    let hi = pools.partition_point(|&a| (a as usize) < range.end);
    pools[lo..hi].iter().map(|&a| residuals[a as usize]).sum()
}

/// `σ̂_a - Σ_{y∈∂a} σ̃_y` for every pool, recomputed from the member lists.
pub fn residuals_from_scratch(
    design: &PoolingDesign,
    measurements: &MeasurementVector,
    estimate: &[u8],
) -> Vec<i64> {
    let explained = pool_sums(design, estimate);
    measurements
        .values()
        .iter()
        .zip(explained)
        .map(|(&y, e)| y as i64 - e as i64)
        .collect()
}

/// Outcome of a full sweep.
#[derive(Debug, Clone)]
pub struct Decoded {
    /// Estimate over all items, seed first.
    pub estimate: Vec<u8>,
    /// `𝒩_x` per item; NaN for seed items.
    pub scores: Vec<f64>,
    pub runtime: Duration,
}

/// Run the whole sweep.
pub fn decode(
    design: &PoolingDesign,
    measurements: &MeasurementVector,
    seed_labels: &[u8],
    model: ScoreModel,
    thresholds: Thresholds,
) -> Result<Decoded> {
    Ok(Decoder::new(design, measurements, seed_labels, model, thresholds)?.run())
}
