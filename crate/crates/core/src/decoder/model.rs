use crate::design::{DerivedParams, DesignParams, PoolingDesign};

/// Constants the score needs from the problem: the prior weight density, the
/// per-source slot count and the variance unit `k^{2ε}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreModel {
    /// `Σ_w w·k_w/n`.
    pub weight_density: f64,
    /// `Γ/s`.
    pub slots_per_source: f64,
    /// `k^{2ε}`, with `k` floored at 1.
    pub variance_unit: f64,
}

impl ScoreModel {
    pub fn new(params: &DesignParams, derived: &DerivedParams) -> Self {
        Self::from_parts(
            params.n,
            params.total_weight(),
            params.k(),
            params.eps_design,
            derived.slots_per_source(),
        )
    }

    pub fn from_parts(n: usize, total_weight: usize, k: usize, eps: f64, slots: usize) -> Self {
        Self {
            weight_density: total_weight as f64 / n as f64,
            slots_per_source: slots as f64,
            variance_unit: (k.max(1) as f64).powf(2.0 * eps),
        }
    }

    /// `M = Σ_w w·(k_w/n)·(u·Δ*·Γ/s - Δ)`.
    pub fn expectation(&self, distinct_degree: u32, degree: u32, unexplained: usize) -> f64 {
        self.weight_density
            * (unexplained as f64 * distinct_degree as f64 * self.slots_per_source - degree as f64)
    }

    /// Contribution of one offset to the weighted normalised score:
    /// `(j+1)^{-1/2}·(U - M)/√(u·k^{2ε})`.
    pub fn term(&self, offset: usize, centred: f64, unexplained: usize) -> f64 {
        centred / ((offset + 1) as f64).sqrt() / (unexplained as f64 * self.variance_unit).sqrt()
    }
}

/// `M_x^j` for item `x` at offset `j` with `unexplained` open source compartments.
pub fn expectation_estimate(
    design: &PoolingDesign,
    model: &ScoreModel,
    x: usize,
    j: usize,
    unexplained: usize,
) -> f64 {
    model.expectation(design.distinct_degree(x, j), design.degree(x, j), unexplained)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_evaluated_expectation() {
        // k/n = 1/8, u = 1, Δ*·Γ/s = 20 (Δ* = 4, Γ/s = 5), Δ = 2 -> 18/8
        let m = ScoreModel { weight_density: 0.125, slots_per_source: 5.0, variance_unit: 1.0 };
        assert!((m.expectation(4, 2, 1) - 2.25).abs() < 1e-12);
    }

    #[test]
    fn zero_weight_zero_expectation() {
        let m = ScoreModel::from_parts(100, 0, 0, 0.05, 7);
        assert_eq!(m.expectation(9, 11, 3), 0.0);
        assert_eq!(m.variance_unit, 1.0);
    }

    #[test]
    fn single_offset_term() {
        // s = 1 analogue: (U - M)/k^ε
        let m = ScoreModel::from_parts(1000, 10, 10, 0.1, 3);
        let k_eps = 10f64.powf(0.1);
        assert!((m.term(0, 5.0, 1) - 5.0 / k_eps).abs() < 1e-12);
    }
}
