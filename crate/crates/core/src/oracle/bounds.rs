//! Closed-form pool-count bounds.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::design::{DerivedParams, DesignParams, Rate};

fn coupling_ratio(theta: f64) -> f64 {
    let r = theta.sqrt();
    (1.0 + r) / (1.0 - r)
}

/// `ln( n! / (k_0! k_1! … k_d!) )` with `k_0 = n - k`.
pub fn ln_multinomial(n: usize, counts: &[usize]) -> f64 {
    let k: usize = counts.iter().sum();
    let ln_fact = |v: usize| ln_gamma(v as f64 + 1.0);
    ln_fact(n) - ln_fact(n - k) - counts.iter().map(|&c| ln_fact(c)).sum::<f64>()
}

/// Counting bound `⌈ln multinomial / ln(W+1)⌉`; `None` when `W = 0`.
pub fn m_count(n: usize, counts: &[usize]) -> Option<u64> {
    let w: usize = counts.iter().enumerate().map(|(i, &c)| (i + 1) * c).sum();
    if w == 0 {
        return None;
    }
    let ratio = ln_multinomial(n, counts) / ((w + 1) as f64).ln();
    // absorb log-gamma rounding so exact integers are not bumped up
    Some((ratio - 1e-9).ceil().max(0.0) as u64)
}

/// Information-theoretic pool count for the binary case, `2(1-θ)k/θ`.
pub fn m_qgt(theta: f64, k: usize) -> f64 {
    2.0 * (1.0 - theta) * k as f64 / theta
}

/// The alternative exponential rendering `2^{(1-θ)/θ}·k`.
pub fn m_qgt_exponential(theta: f64, k: usize) -> f64 {
    2f64.powf((1.0 - theta) / theta) * k as f64
}

/// `4W ln(n/W + 1)/ln W`; undefined for `W < 2`.
pub fn m_gk(n: usize, total_weight: usize) -> Option<f64> {
    (total_weight >= 2).then(|| {
        let w = total_weight as f64;
        4.0 * w * (n as f64 / w + 1.0).ln() / w.ln()
    })
}

/// Pools sufficient for the threshold decoder with slack `δ`.
pub fn m_pd(theta: f64, delta: f64, second_moment: f64, k: usize) -> f64 {
    (8.0 + delta) * coupling_ratio(theta) * second_moment * (1.0 - theta) / theta * k as f64
}

/// Binary specialisation of [`m_pd`].
pub fn m_sc(theta: f64, delta: f64, k: usize) -> f64 {
    m_pd(theta, delta, 1.0, k)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub n: usize,
    pub counts: Vec<usize>,
    pub k: usize,
    pub theta: f64,
    pub delta: f64,
    pub total_weight: usize,
    pub m: usize,
    pub m_count: Option<u64>,
    pub m_qgt: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_qgt_exponential: Option<f64>,
    pub m_gk: Option<f64>,
    pub m_pd: f64,
    pub m_sc: f64,
}

/// All bounds for an instance. `δ` is taken from the rate when it is given as
/// a slack and is 0 otherwise.
pub fn bounds(params: &DesignParams, derived: &DerivedParams, exponential_qgt: bool) -> BoundsReport {
    let delta = match params.rate {
        Rate::Delta(d) => d,
        Rate::C(_) => 0.0,
    };
    let k = params.k();
    let theta = derived.theta;
    BoundsReport {
        n: params.n,
        counts: params.counts.clone(),
        k,
        theta,
        delta,
        total_weight: params.total_weight(),
        m: derived.m,
        m_count: m_count(params.n, &params.counts),
        m_qgt: m_qgt(theta, k),
        m_qgt_exponential: exponential_qgt.then(|| m_qgt_exponential(theta, k)),
        m_gk: m_gk(params.n, params.total_weight()),
        m_pd: m_pd(theta, delta, params.second_moment(), k),
        m_sc: m_sc(theta, delta, k),
    }
}
