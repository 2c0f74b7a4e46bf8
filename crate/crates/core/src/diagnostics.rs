//! Finite-size band checks on a built design, a sampled signal and the score.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::decoder::{Decoder, ScoreModel, Thresholds};
use crate::design::{feasibility_report, DerivedParams, DesignParams, PoolingDesign, DENSITY_EXPONENT_MARGIN};
use crate::error::Result;
use crate::oracle::idealized_scores;
use crate::signal::{MeasurementVector, Signal};

/// Concentration bands are not checked below this mean.
pub const SMALL_MEAN: f64 = 4.0;
/// Required fraction of items within the residual bound.
pub const RESIDUAL_PASS_FRACTION: f64 = 0.99;
/// `√(s²/ℓ)·ln n` must not exceed this multiple of `ln s`.
pub const RESIDUAL_SCALE_TOLERANCE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Property of the construction the check is tied to.
    pub anchor: String,
    pub statistic: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub pass: bool,
    pub skipped: bool,
    pub sample_size: usize,
    pub detail: String,
}

impl Check {
    fn band(name: &str, anchor: &str, statistic: f64, lower: Option<f64>, upper: Option<f64>, sample_size: usize) -> Self {
        let pass = lower.is_none_or(|l| statistic >= l) && upper.is_none_or(|u| statistic <= u);
        Self {
            name: name.into(),
            anchor: anchor.into(),
            statistic,
            lower,
            upper,
            pass,
            skipped: false,
            sample_size,
            detail: String::new(),
        }
    }

    fn skipped(name: &str, anchor: &str, detail: String) -> Self {
        Self {
            name: name.into(),
            anchor: anchor.into(),
            statistic: f64::NAN,
            lower: None,
            upper: None,
            pass: true,
            skipped: true,
            sample_size: 0,
            detail,
        }
    }

    fn with_detail(mut self, detail: String) -> Self {
        self.detail = detail;
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub checks: Vec<Check>,
}

impl DiagnosticsReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn merge(mut self, other: DiagnosticsReport) -> Self {
        self.checks.extend(other.checks);
        self
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, self)?;
        Ok(())
    }
}

fn fmt_bound(b: Option<f64>) -> String {
    b.map_or_else(|| "-".into(), |v| format!("{v:.4}"))
}

impl fmt::Display for DiagnosticsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<28} {:>12} {:>12} {:>12} {:>8} {:>6}  anchor", "check", "statistic", "lower", "upper", "n", "result")?;
        for c in &self.checks {
            let result = if c.skipped { "skip" } else if c.pass { "pass" } else { "FAIL" };
            writeln!(
                f,
                "{:<28} {:>12.4} {:>12} {:>12} {:>8} {:>6}  {}",
                c.name,
                c.statistic,
                fmt_bound(c.lower),
                fmt_bound(c.upper),
                c.sample_size,
                result,
                c.anchor
            )?;
            if !c.detail.is_empty() {
                writeln!(f, "    {}", c.detail)?;
            }
        }
        Ok(())
    }
}

/// Exact per-compartment expectations of `Δ_x[j]` and `Δ*_x[j]` for items of
/// compartment `i`: every one of `P` pools draws `Γ/s` uniform slots from `V[i]`.
fn degree_expectations(design: &PoolingDesign, i: usize, j: usize, slots: usize) -> (f64, f64) {
    let pools = design.pools_in(design.target(i, j)).len() as f64;
    let size = design.items(i).len() as f64;
    let slots = slots as f64;
    let with = pools * slots / size;
    let distinct = pools * (1.0 - (1.0 - 1.0 / size).powf(slots));
    (with, distinct)
}

/// Every `Δ_x[j]` and `Δ*_x[j]` within `2 ln n` standard deviations of its mean,
/// and `Δ*/Δ` close to one.
pub fn check_degrees(design: &PoolingDesign) -> DiagnosticsReport {
    const ANCHOR: &str = "item degree concentration";
    let n = design.n_bulk().max(2) as f64;
    let ln_n = n.ln();
    let mut checks = Vec::new();
    let Some(slots) = design.slots_per_source() else {
        checks.push(Check::skipped("degree_band", ANCHOR, "irregular design".into()));
        return DiagnosticsReport { checks };
    };

    for (name, distinct) in [("degree_band", false), ("distinct_degree_band", true)] {
        let mut worst = 0.0f64;
        let mut worst_at = (0, 0, 0u32, 0.0);
        let mut count = 0usize;
        let mut smallest_mean = f64::INFINITY;
        for i in design.bulk_compartments() {
            for j in 0..design.window() {
                let (with, without) = degree_expectations(design, i, j, slots);
                let mean = if distinct { without } else { with };
                smallest_mean = smallest_mean.min(mean);
                if mean < SMALL_MEAN {
                    continue;
                }
                for x in design.items(i) {
                    let v = if distinct { design.distinct_degree(x, j) } else { design.degree(x, j) };
                    let z = (v as f64 - mean).abs() / mean.sqrt();
                    count += 1;
                    if z > worst {
                        worst = z;
                        worst_at = (x, j, v, mean);
                    }
                }
            }
        }
        if count == 0 {
            checks.push(Check::skipped(
                name,
                ANCHOR,
                format!("mean degree {smallest_mean:.3} below {SMALL_MEAN}"),
            ));
            continue;
        }
        let (x, j, v, mean) = worst_at;
        checks.push(
            Check::band(name, ANCHOR, worst, None, Some(2.0 * ln_n), count)
                .with_detail(format!("max |deg - mean|/sqrt(mean); worst item {x} offset {j}: {v} vs {mean:.3}")),
        );
    }

    let ratios: Vec<f64> = (design.n_seed()..design.n_items())
        .filter(|&x| design.total_degree(x) > 0)
        .map(|x| design.total_distinct_degree(x) as f64 / design.total_degree(x) as f64)
        .collect();
    if ratios.is_empty() {
        checks.push(Check::skipped("distinct_ratio", "distinct and total degree agree", "no incidences".into()));
    } else {
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let floor = 1.0 - 3.0 / (design.num_pools() as f64).sqrt();
        checks.push(Check::band("distinct_ratio", "distinct and total degree agree", mean, Some(floor), None, ratios.len()));
    }
    DiagnosticsReport { checks }
}

/// Every bulk `k_w^{(j)}` within `2 ln n` standard deviations of `k_w/ℓ`.
pub fn check_counts(signal: &Signal, design: &PoolingDesign) -> DiagnosticsReport {
    const ANCHOR: &str = "per-compartment weight counts";
    let n = design.n_bulk().max(2) as f64;
    let ln_n = n.ln();
    let ell = design.bulk_compartments().len() as f64;
    let totals = signal.bulk_histogram();
    let mut checks = Vec::new();
    for w in 1..=signal.d() {
        let name = format!("count_band_w{w}");
        let mean = totals[w] as f64 / ell;
        if mean < SMALL_MEAN {
            checks.push(Check::skipped(&name, ANCHOR, format!("k_w/ell = {mean:.3} below {SMALL_MEAN}")));
            continue;
        }
        let (worst, at) = design
            .bulk_compartments()
            .map(|c| ((signal.count(c, w) as f64 - mean).abs() / mean.sqrt(), c))
            .fold((0.0f64, 0), |acc, v| if v.0 > acc.0 { v } else { acc });
        checks.push(
            Check::band(&name, ANCHOR, worst, None, Some(2.0 * ln_n), design.bulk_compartments().len())
                .with_detail(format!("worst compartment {at}: {} vs {mean:.3}", signal.count(at, w))),
        );
    }
    DiagnosticsReport { checks }
}

/// Density exponents of the parametrisation (base `n`) and the residual scale.
pub fn check_density(derived: &DerivedParams, params: &DesignParams) -> DiagnosticsReport {
    let feas = feasibility_report(derived, params);
    let ln_n = (params.n as f64).ln();
    let ell_exponent = (derived.ell as f64).ln() / ln_n;
    let window_exponent_bound = -DENSITY_EXPONENT_MARGIN;
    let asymptotic = params.eps_design * derived.theta;
    let residual_scale = (feas.window_ratio).sqrt() * ln_n;
    let signal_scale = (derived.s as f64).ln();
    let checks = vec![
        Check::band(
            "bulk_compartments_exponent",
            "compartment count below square root of k",
            ell_exponent,
            None,
            Some(derived.theta / 2.0 - DENSITY_EXPONENT_MARGIN),
            1,
        )
        .with_detail(format!("ln ell / ln n with ell = {}", derived.ell)),
        Check::band("window_ratio_exponent", "s^2/ell decays polynomially", feas.window_ratio_exponent, None, Some(window_exponent_bound), 1)
            .with_detail(format!("s^2/ell = {:.4}; asymptotic exponent {:.4}", feas.window_ratio, -asymptotic)),
        Check::band("degree_ratio_exponent", "Delta/s grows polynomially", feas.degree_ratio_exponent, Some(DENSITY_EXPONENT_MARGIN), None, 1)
            .with_detail(format!("Delta/s = {:.4}; asymptotic exponent {:.4}", feas.degree_ratio, asymptotic)),
        Check::band("residual_scale", "residual small against ln s", residual_scale, None, Some(RESIDUAL_SCALE_TOLERANCE * signal_scale), 1)
            .with_detail(format!("sqrt(s^2/ell)*ln n vs ln s = {signal_scale:.4}")),
    ];
    DiagnosticsReport { checks }
}

/// `20·Σ_w w√ε_w·k^{-ε/2}·ln n`.
pub fn residual_bound(params: &DesignParams) -> f64 {
    20.0 * params.root_moment() * (params.k().max(1) as f64).powf(-params.eps_design / 2.0) * (params.n as f64).ln()
}

/// `R_x = 𝒩_x - N_x` on the first bulk compartment, where the decoder state is
/// exactly the truth prefix.
pub fn residual_gaps(
    design: &PoolingDesign,
    measurements: &MeasurementVector,
    signal: &Signal,
    params: &DesignParams,
    derived: &DerivedParams,
) -> Result<Vec<f64>> {
    let model = ScoreModel::new(params, derived);
    let decoder = Decoder::new(design, measurements, signal.seed_labels(), model, Thresholds::new(derived, params.d()))?;
    let first = design.bulk_compartments().start;
    let ideal = idealized_scores(design, measurements, signal, &model, first)?;
    Ok(design.items(first).zip(ideal).map(|(x, n)| decoder.score(x) - n).collect())
}

pub fn check_residuals(
    design: &PoolingDesign,
    measurements: &MeasurementVector,
    signal: &Signal,
    params: &DesignParams,
    derived: &DerivedParams,
) -> Result<DiagnosticsReport> {
    let gaps = residual_gaps(design, measurements, signal, params, derived)?;
    let bound = residual_bound(params);
    let within = gaps.iter().filter(|r| r.abs() <= bound).count();
    let fraction = within as f64 / gaps.len().max(1) as f64;
    let mut abs: Vec<f64> = gaps.iter().map(|r| r.abs()).collect();
    abs.sort_by(f64::total_cmp);
    let median = abs.get(abs.len() / 2).copied().unwrap_or(0.0);
    let max = abs.last().copied().unwrap_or(0.0);
    let check = Check::band("residual_bound", "decoder score tracks idealised score", fraction, Some(RESIDUAL_PASS_FRACTION), None, gaps.len())
        .with_detail(format!("bound {bound:.3}; median |R| {median:.4}; max |R| {max:.4}"));
    Ok(DiagnosticsReport { checks: vec![check] })
}

/// Joint concentration of degrees and weight counts.
pub fn concentration_event(design: &PoolingDesign, signal: &Signal) -> bool {
    check_degrees(design).pass() && check_counts(signal, design).pass()
}
