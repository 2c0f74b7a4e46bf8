//! Problem inputs and the quantities derived from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the number of pools is specified.
///
/// `C` gives the rate constant directly, so that `m = 2c(1-θ)k/θ`. `Delta` gives
/// the slack over the recovery guarantee, `c = (4+δ)(1+√θ)/(1-√θ)·Σ w²ε_w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rate {
    C(f64),
    Delta(f64),
}

/// Explicit parameter values for tiny or hand-tuned instances.
///
/// Any field that is set replaces the derived value verbatim, and supplying any
/// override lifts the `2 <= k < n` restriction of the asymptotic formulas.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Overrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<usize>,
}

impl Overrides {
    pub fn is_empty(&self) -> bool {
        self.ell.is_none() && self.s.is_none() && self.m.is_none() && self.gamma.is_none()
    }
}

/// Problem inputs: item count, per-weight counts, design exponent, rate and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignParams {
    /// Number of real (bulk) items.
    pub n: usize,
    /// `counts[w-1]` is the number of items carrying weight `w`.
    pub counts: Vec<usize>,
    /// Design exponent ε in (0, 1/4).
    pub eps_design: f64,
    pub rate: Rate,
    pub rng_seed: u64,
    #[serde(default, skip_serializing_if = "Overrides::is_empty")]
    pub overrides: Overrides,
}

impl DesignParams {
    pub fn new(n: usize, counts: Vec<usize>, eps_design: f64, rate: Rate, rng_seed: u64) -> Self {
        Self {
            n,
            counts,
            eps_design,
            rate,
            rng_seed,
            overrides: Overrides::default(),
        }
    }

    pub fn with_overrides(mut self, overrides: Overrides) -> Self {
        self.overrides = overrides;
        self
    }

    pub fn with_seed(mut self, rng_seed: u64) -> Self {
        self.rng_seed = rng_seed;
        self
    }

    /// Largest label `d`.
    pub fn d(&self) -> usize {
        self.counts.len()
    }

    /// Number of non-zero items `k`.
    pub fn k(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Total weight `W = Σ w·k_w`.
    pub fn total_weight(&self) -> usize {
        self.counts.iter().enumerate().map(|(i, &c)| (i + 1) * c).sum()
    }

    /// Weight fractions `ε_w = k_w / k`; all zero when `k = 0`.
    pub fn weight_fractions(&self) -> Vec<f64> {
        let k = self.k();
        if k == 0 {
            return vec![0.0; self.d()];
        }
        self.counts.iter().map(|&c| c as f64 / k as f64).collect()
    }

    /// `Σ w² ε_w`.
    pub fn second_moment(&self) -> f64 {
        weighted_sum(&self.weight_fractions(), |w, e| w * w * e)
    }

    /// `Σ w √ε_w`.
    pub fn root_moment(&self) -> f64 {
        weighted_sum(&self.weight_fractions(), |w, e| w * e.sqrt())
    }
}

fn weighted_sum(fractions: &[f64], f: impl Fn(f64, f64) -> f64) -> f64 {
    fractions
        .iter()
        .enumerate()
        .map(|(i, &e)| f((i + 1) as f64, e))
        .sum()
}

/// Parameters of the spatially coupled design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    /// Sparsity exponent `θ = ln k / ln n`.
    pub theta: f64,
    /// Number of bulk compartments `ℓ`.
    pub ell: usize,
    /// Sliding window `s`.
    pub s: usize,
    /// Number of pools, a multiple of `ℓ + s - 1`.
    pub m: usize,
    /// Pool size `Γ`, a multiple of `s`.
    pub gamma: usize,
    /// Skew of the first threshold.
    pub alpha: f64,
    /// Effective rate constant `m θ / (2(1-θ)k)`.
    pub c: f64,
    /// Total signal weight `W`.
    pub total_weight: usize,
}

impl DerivedParams {
    /// Number of item (and pool) compartments, `ℓ + s - 1`.
    pub fn compartments(&self) -> usize {
        self.ell + self.s - 1
    }

    pub fn pools_per_compartment(&self) -> usize {
        self.m / self.compartments()
    }

    /// Slots each pool draws from each compartment in its window, `Γ/s`.
    pub fn slots_per_source(&self) -> usize {
        self.gamma / self.s
    }

    /// Asymptotic item degree `Δ = √m·s/ℓ`.
    pub fn nominal_degree(&self) -> f64 {
        (self.m as f64).sqrt() * self.s as f64 / self.ell as f64
    }

    /// `√(2c(1-θ)/θ)`, the per-unit-weight signal scale of the score.
    pub fn signal_scale(&self) -> f64 {
        (2.0 * self.c * (1.0 - self.theta) / self.theta).sqrt()
    }
}

/// First-threshold skew `α = √θ/(1+√θ)`.
pub fn skew_alpha(theta: f64) -> f64 {
    let r = theta.sqrt();
    r / (1.0 + r)
}

fn coupling_ratio(theta: f64) -> f64 {
    let r = theta.sqrt();
    (1.0 + r) / (1.0 - r)
}

/// Rate constant guaranteed to suffice with slack `δ`.
pub fn rate_for_slack(theta: f64, delta: f64, second_moment: f64) -> f64 {
    (4.0 + delta) * coupling_ratio(theta) * second_moment
}

/// Smallest rate constant for which an admissible first-threshold skew exists.
pub fn c_min(theta: f64, eps_design: f64, second_moment: f64) -> f64 {
    coupling_ratio(theta) * second_moment / (0.25 - eps_design)
}

/// Error exponent `f`; recovery needs `f > 1`, and `f = 1` exactly at `c_min`.
pub fn exponent_f(c: f64, theta: f64, eps_design: f64, second_moment: f64) -> f64 {
    c * (0.25 - eps_design) / (coupling_ratio(theta) * second_moment)
}

/// Derive `θ, ℓ, s, m, Γ, α, c` from the problem inputs.
pub fn derive_params(params: &DesignParams) -> Result<DerivedParams> {
    if params.counts.is_empty() {
        return Err(Error::NoWeights);
    }
    let eps = params.eps_design;
    if !(eps > 0.0 && eps < 0.25) {
        return Err(Error::EpsOutOfRange(eps));
    }
    let n = params.n;
    let k = params.k();
    let o = params.overrides;
    if o.is_empty() {
        if k < 2 {
            return Err(Error::KTooSmall(k));
        }
        if k >= n {
            return Err(Error::KTooLarge { k, n });
        }
    } else if k > n {
        return Err(Error::KTooLarge { k, n });
    }

    // Tiny override instances may have k < 2; the logarithm is floored at k = 2.
    let theta = (k.max(2) as f64).ln() / (n as f64).ln();
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::ThetaOutOfRange(theta));
    }

    let second = params.second_moment();
    let requested_c = match params.rate {
        Rate::C(c) if c.is_finite() && c > 0.0 => c,
        Rate::Delta(delta) if delta.is_finite() && delta > 0.0 => {
            rate_for_slack(theta, delta, second)
        }
        other => return Err(Error::InvalidRate(format!("{other:?} must be finite and positive"))),
    };

    let kf = k as f64;
    let ell = match o.ell {
        Some(ell) => ell,
        None => (kf.powf(0.5 - eps).ceil() as usize).max(1),
    };
    let s = match o.s {
        Some(s) => s,
        None => (kf.powf(0.25 - eps).ceil() as usize).max(2),
    };
    if ell == 0 || ell > n {
        return Err(Error::InvalidOverride(format!(
            "ell = {ell} must lie in 1..={n}"
        )));
    }
    if s < 2 {
        return Err(Error::InvalidOverride(format!("s = {s} must be at least 2")));
    }
    let compartments = ell + s - 1;

    let m = match o.m {
        Some(m) if m > 0 && m % compartments == 0 => m,
        Some(m) => {
            return Err(Error::InvalidOverride(format!(
                "m = {m} must be a positive multiple of ell + s - 1 = {compartments}"
            )))
        }
        None => {
            let raw = (2.0 * requested_c * (1.0 - theta) * kf / theta).ceil() as usize;
            raw.div_ceil(compartments).max(1) * compartments
        }
    };

    let gamma = match o.gamma {
        Some(g) if g >= s && g % s == 0 => g,
        Some(g) => {
            return Err(Error::InvalidOverride(format!(
                "gamma = {g} must be a positive multiple of s = {s}"
            )))
        }
        None => {
            let per_source = (n as f64 / ((m as f64).sqrt() * compartments as f64)).round();
            s * (per_source as usize).max(1)
        }
    };

    let c = m as f64 * theta / (2.0 * (1.0 - theta) * k.max(1) as f64);

    Ok(DerivedParams {
        theta,
        ell,
        s,
        m,
        gamma,
        alpha: skew_alpha(theta),
        c,
        total_weight: params.total_weight(),
    })
}

/// Feasibility of a parameter set against the recovery and density conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub c: f64,
    pub c_min: f64,
    pub c_feasible: bool,
    /// Exponent `f`; feasible when `f > 1`.
    pub f: f64,
    pub f_feasible: bool,
    /// `Δ/s = √m/ℓ`, which must grow polynomially in `n`.
    pub degree_ratio: f64,
    pub degree_ratio_exponent: f64,
    pub degree_ratio_ok: bool,
    /// `Δ²ℓ/m = s²/ℓ`, which must decay polynomially in `n`.
    pub window_ratio: f64,
    pub window_ratio_exponent: f64,
    pub window_ratio_ok: bool,
}

/// Minimum base-`n` exponent margin for the two density ratios.
pub const DENSITY_EXPONENT_MARGIN: f64 = 0.01;

pub fn feasibility_report(derived: &DerivedParams, params: &DesignParams) -> FeasibilityReport {
    let second = params.second_moment();
    let c_min = c_min(derived.theta, params.eps_design, second);
    let f = exponent_f(derived.c, derived.theta, params.eps_design, second);
    let ln_n = (params.n as f64).ln();
    let degree_ratio = (derived.m as f64).sqrt() / derived.ell as f64;
    let window_ratio = (derived.s * derived.s) as f64 / derived.ell as f64;
    let degree_ratio_exponent = degree_ratio.ln() / ln_n;
    let window_ratio_exponent = window_ratio.ln() / ln_n;
    FeasibilityReport {
        c: derived.c,
        c_min,
        c_feasible: derived.c >= c_min,
        f,
        f_feasible: f > 1.0,
        degree_ratio,
        degree_ratio_exponent,
        degree_ratio_ok: degree_ratio_exponent > DENSITY_EXPONENT_MARGIN,
        window_ratio,
        window_ratio_exponent,
        window_ratio_ok: window_ratio_exponent < -DENSITY_EXPONENT_MARGIN,
    }
}
