//! Textbook tail bounds used to size test tolerances.

/// Upper tail `P(X >= (1+t)μ) <= exp(-t²μ/(2+t))` for `X ~ Bin` with mean `μ`.
pub fn chernoff_upper(mean: f64, t: f64) -> f64 {
    (-t * t * mean / (2.0 + t)).exp().min(1.0)
}

/// Lower tail `P(X <= (1-t)μ) <= exp(-t²μ/2)`.
pub fn chernoff_lower(mean: f64, t: f64) -> f64 {
    (-t * t * mean / 2.0).exp().min(1.0)
}

/// Hypergeometric `Hyp(N, M, K)` deviation bounds `(upper, lower)` at distance `t`.
pub fn hypergeometric_tails(population: usize, marked: usize, draws: usize, t: f64) -> (f64, f64) {
    let mean = draws as f64 * marked as f64 / population as f64;
    let upper = (-t * t / (2.0 * (mean + t / 3.0))).exp().min(1.0);
    let lower = if mean > 0.0 { (-t * t / (2.0 * mean)).exp().min(1.0) } else { 0.0 };
    (upper, lower)
}

/// Bernstein: `P(Σ X_i >= t) <= exp(-t²/(2V + 2zt/3))` for centred summands
/// bounded by `z` with total variance `V`.
pub fn bernstein(total_variance: f64, bound: f64, t: f64) -> f64 {
    (-t * t / (2.0 * total_variance + 2.0 * bound * t / 3.0)).exp().min(1.0)
}
