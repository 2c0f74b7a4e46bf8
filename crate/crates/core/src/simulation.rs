//! End-to-end trials and parameter sweeps.

use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decoder::{decode, DecodeReport, Decoded, ScoreModel, Thresholds};
use crate::design::{build_design, c_min, derive_params, DerivedParams, DesignParams, PoolingDesign, Rate};
use crate::error::{Error, Result};
use crate::rng::{stream_rng, trial_seed, Domain};
use crate::signal::{measure, sample_signal, MeasurementVector, Signal};

/// A design, a signal drawn on it and the resulting measurements.
#[derive(Debug, Clone)]
pub struct Instance {
    pub params: DesignParams,
    pub derived: DerivedParams,
    pub design: PoolingDesign,
    pub signal: Signal,
    pub measurements: MeasurementVector,
}

impl Instance {
    /// Everything is drawn from streams keyed by `params.rng_seed`.
    pub fn generate(params: &DesignParams) -> Result<Self> {
        let derived = derive_params(params)?;
        let design = build_design(params, &derived)?;
        let mut rng = stream_rng(params.rng_seed, Domain::Signal, 0);
        let signal = sample_signal(params, &design, &mut rng)?;
        let measurements = measure(&design, &signal);
        Ok(Self { params: params.clone(), derived, design, signal, measurements })
    }

    pub fn model(&self) -> ScoreModel {
        ScoreModel::new(&self.params, &self.derived)
    }

    pub fn thresholds(&self) -> Thresholds {
        Thresholds::new(&self.derived, self.params.d())
    }

    pub fn decode(&self) -> Result<Decoded> {
        decode(&self.design, &self.measurements, self.signal.seed_labels(), self.model(), self.thresholds())
    }

    pub fn report(&self, decoded: &Decoded) -> Result<DecodeReport> {
        DecodeReport::new(&self.design, decoded, self.params.d(), Some(&self.signal))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub errors: usize,
    pub runtime_ms: f64,
}

impl TrialOutcome {
    pub fn exact(&self) -> bool {
        self.errors == 0
    }
}

pub fn run_trial(params: &DesignParams) -> Result<TrialOutcome> {
    let instance = Instance::generate(params)?;
    let decoded = instance.decode()?;
    let report = instance.report(&decoded)?;
    Ok(TrialOutcome { errors: report.total_errors.unwrap_or(0), runtime_ms: report.runtime_ms })
}

/// `c_min` for the sparsity and weight profile of `params`.
pub fn c_min_for(params: &DesignParams) -> Result<f64> {
    let derived = derive_params(params)?;
    Ok(c_min(derived.theta, params.eps_design, params.second_moment()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    C,
    N,
    Theta,
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "c" => Ok(Self::C),
            "n" => Ok(Self::N),
            "theta" => Ok(Self::Theta),
            other => Err(Error::InvalidOverride(format!("unknown sweep axis {other:?}; expected c, n or theta"))),
        }
    }
}

/// Split `k` over the weight profile of `counts` by largest remainders.
pub fn rescale_counts(counts: &[usize], k: usize) -> Vec<usize> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        let mut out = vec![0; counts.len()];
        if let Some(first) = out.first_mut() {
            *first = k;
        }
        return out;
    }
    let exact: Vec<f64> = counts.iter().map(|&c| c as f64 * k as f64 / total as f64).collect();
    let mut out: Vec<usize> = exact.iter().map(|v| v.floor() as usize).collect();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())));
    let short = k - out.iter().sum::<usize>();
    for &i in order.iter().take(short) {
        out[i] += 1;
    }
    out
}

/// Parameters for one sweep point. `n` and `theta` keep the weight profile and
/// set `k = round(n^θ)`; `c` sets the rate constant.
pub fn sweep_point(base: &DesignParams, axis: SweepAxis, value: f64) -> Result<DesignParams> {
    let mut p = base.clone();
    match axis {
        SweepAxis::C => p.rate = Rate::C(value),
        SweepAxis::N => {
            if !(value >= 2.0) {
                return Err(Error::Dimension(format!("n = {value} must be at least 2")));
            }
            let theta = (base.k().max(2) as f64).ln() / (base.n as f64).ln();
            p.n = value.round() as usize;
            p.counts = rescale_counts(&base.counts, (p.n as f64).powf(theta).round() as usize);
        }
        SweepAxis::Theta => {
            if !(value > 0.0 && value < 1.0) {
                return Err(Error::ThetaOutOfRange(value));
            }
            p.counts = rescale_counts(&base.counts, (base.n as f64).powf(value).round() as usize);
        }
    }
    Ok(p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub trials: usize,
    pub successes: usize,
    pub mean_errors: f64,
    pub mean_runtime_ms: f64,
}

/// `trials` independent trials per value. Trial `t` uses seed
/// `trial_seed(master, t)` at every value, so points differ only in the axis.
pub fn sweep(base: &DesignParams, axis: SweepAxis, values: &[f64], trials: usize, master_seed: u64) -> Result<Vec<SweepRow>> {
    if trials == 0 {
        return Err(Error::Dimension("trials must be at least 1".into()));
    }
    values
        .iter()
        .map(|&value| {
            let point = sweep_point(base, axis, value)?;
            let outcomes = (0..trials)
                .into_par_iter()
                .map(|t| run_trial(&point.clone().with_seed(trial_seed(master_seed, t as u64))))
                .collect::<Result<Vec<_>>>()?;
            let n = trials as f64;
            Ok(SweepRow {
                axis_value: value,
                trials,
                successes: outcomes.iter().filter(|o| o.exact()).count(),
                mean_errors: outcomes.iter().map(|o| o.errors as f64).sum::<f64>() / n,
                mean_runtime_ms: outcomes.iter().map(|o| o.runtime_ms).sum::<f64>() / n,
            })
        })
        .collect()
}

/// CSV `axis_value,trials,successes,mean_errors,mean_runtime_ms`.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
