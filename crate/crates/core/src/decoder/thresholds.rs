use serde::{Deserialize, Serialize};

use crate::design::DerivedParams;

/// Score cutpoints `T^{0,1} < T^{1,2} < … < T^{d-1,d}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// `T^{0,1} = (1-α)·base`.
    pub t01: f64,
    /// `T^{i,i+1} = (i+½)·base` for `i = 1..d-1`.
    pub steps: Vec<f64>,
    /// `√(2c(1-θ)/θ)·ln s`.
    pub base: f64,
}

impl Thresholds {
    pub fn new(derived: &DerivedParams, d: usize) -> Self {
        Self::from_parts(
            derived.theta,
            derived.c,
            (derived.s as f64).ln(),
            derived.alpha,
            d,
        )
    }

    pub fn from_parts(theta: f64, c: f64, ln_s: f64, alpha: f64, d: usize) -> Self {
        let base = (2.0 * c * (1.0 - theta) / theta).sqrt() * ln_s;
        Self {
            t01: (1.0 - alpha) * base,
            steps: (1..d).map(|i| (i as f64 + 0.5) * base).collect(),
            base,
        }
    }

    /// Largest label.
    pub fn d(&self) -> usize {
        self.steps.len() + 1
    }

    pub fn cutpoints(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(self.t01).chain(self.steps.iter().copied())
    }

    /// Label for a score, with half-open classes `[T^{b-1,b}, T^{b,b+1})`.
    /// NaN scores map to 0.
    pub fn classify(&self, score: f64) -> u8 {
        self.cutpoints().take_while(|&t| t <= score).count() as u8
    }
}
