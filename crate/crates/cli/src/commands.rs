use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use pooled_core::decoder::write_trace;
use pooled_core::design::{feasibility_report, FeasibilityReport};
use pooled_core::diagnostics::{check_counts, check_degrees, check_density, check_residuals, DiagnosticsReport};
use pooled_core::oracle::exponents::error_exponents;
use pooled_core::oracle::{
    bounds as bounds_report, exhaustive_decode, ks_two_sample, write_summaries, BoundsReport, ErrorExponents, McSummary,
    SamplerMode, UnexplainedSampler,
};
use pooled_core::simulation::{c_min_for, sweep as run_sweep, write_sweep_csv, Instance, SweepAxis};
use pooled_core::derive_params;
use serde::Serialize;

use crate::config::RunConfig;

/// Process outcome: exit 0, or 2 for a run that completed without success.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    Mismatch,
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> Self {
        match s {
            Status::Success => ExitCode::SUCCESS,
            Status::Mismatch => ExitCode::from(2),
        }
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let mut w = output(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Print failed checks to stderr; under `--strict` they fail the run.
fn screen(report: &DiagnosticsReport, strict: bool) -> Status {
    for c in report.checks.iter().filter(|c| !c.pass) {
        eprintln!("warning: diagnostic {} failed ({:.4}; {})", c.name, c.statistic, c.detail);
    }
    if strict && !report.pass() {
        Status::Mismatch
    } else {
        Status::Success
    }
}

pub fn simulate(run: RunConfig, trace: Option<PathBuf>) -> Result<Status> {
    let instance = Instance::generate(&run.params()?)?;
    let screened = screen(
        &check_degrees(&instance.design).merge(check_counts(&instance.signal, &instance.design)),
        run.strict,
    );
    let decoded = instance.decode()?;
    let report = instance.report(&decoded)?;
    write_json(&report, run.out.as_deref())?;
    if let Some(path) = trace {
        let w = output(Some(&path))?;
        write_trace(&instance.design, &decoded, &instance.signal, w)?;
    }
    Ok(if report.exact() == Some(true) && screened == Status::Success { Status::Success } else { Status::Mismatch })
}

pub fn sweep(run: RunConfig, axis: &str, values: &[f64], relative: bool) -> Result<Status> {
    let axis: SweepAxis = axis.parse()?;
    let base = run.params()?;
    let values: Vec<f64> = if relative {
        anyhow::ensure!(axis == SweepAxis::C, "--relative applies to the c axis only");
        let c_min = c_min_for(&base)?;
        values.iter().map(|v| v * c_min).collect()
    } else {
        values.to_vec()
    };
    let rows = run_sweep(&base, axis, &values, run.trials(), run.seed())?;
    let mut w = output(run.out.as_deref())?;
    write_sweep_csv(&rows, &mut w)?;
    w.flush()?;
    Ok(Status::Success)
}

#[derive(Debug, Serialize)]
struct OracleOutput {
    feasible_count: usize,
    truth_feasible: bool,
    unique: bool,
    decoder_exact: bool,
    decoder_matches_enumeration: bool,
    bounds: BoundsReport,
}

pub fn oracle(run: RunConfig, cap: u64, exponential_qgt: bool) -> Result<Status> {
    let params = run.params()?;
    let instance = Instance::generate(&params)?;
    let feasible = exhaustive_decode(
        &instance.design,
        &instance.measurements,
        instance.signal.seed_labels(),
        &params.counts,
        cap,
    )?;
    let truth = instance.signal.bulk_labels();
    let decoded = instance.decode()?;
    let estimate = &decoded.estimate[instance.design.n_seed()..];
    let out = OracleOutput {
        feasible_count: feasible.len(),
        truth_feasible: feasible.iter().any(|f| f == truth),
        unique: feasible.len() == 1,
        decoder_exact: estimate == truth,
        decoder_matches_enumeration: feasible.len() == 1 && feasible[0] == estimate,
        bounds: bounds_report(&params, &instance.derived, exponential_qgt),
    };
    if out.unique && out.truth_feasible {
        eprintln!("unique feasible; truth recovered by enumeration");
    } else {
        eprintln!("feasible set size {}; truth feasible: {}", out.feasible_count, out.truth_feasible);
    }
    eprintln!(
        "threshold decoder {} the truth",
        if out.decoder_exact { "recovers" } else { "misses" }
    );
    write_json(&out, run.out.as_deref())?;
    Ok(Status::Success)
}

pub fn diagnostics(run: RunConfig) -> Result<Status> {
    let instance = Instance::generate(&run.params()?)?;
    let report = check_degrees(&instance.design)
        .merge(check_counts(&instance.signal, &instance.design))
        .merge(check_density(&instance.derived, &instance.params))
        .merge(check_residuals(
            &instance.design,
            &instance.measurements,
            &instance.signal,
            &instance.params,
            &instance.derived,
        )?);
    match run.out.as_deref() {
        Some(path) => {
            print!("{report}");
            write_json(&report, Some(path))?;
        }
        None => print!("{report}"),
    }
    Ok(if run.strict && !report.pass() { Status::Mismatch } else { Status::Success })
}

#[derive(Debug, Serialize)]
struct BoundsOutput {
    bounds: BoundsReport,
    feasibility: FeasibilityReport,
    exponents: ErrorExponents,
}

pub fn bounds(run: RunConfig, exponential_qgt: bool) -> Result<Status> {
    let params = run.params()?;
    let derived = derive_params(&params)?;
    let out = BoundsOutput {
        bounds: bounds_report(&params, &derived, exponential_qgt),
        feasibility: feasibility_report(&derived, &params),
        exponents: error_exponents(&params, &derived, derived.alpha),
    };
    write_json(&out, run.out.as_deref())?;
    Ok(Status::Success)
}

pub fn moments(run: RunConfig, item: usize, offset: usize, samples: usize) -> Result<Status> {
    let instance = Instance::generate(&run.params()?)?;
    let design = &instance.design;
    let first = design.items(design.bulk_compartments().start);
    anyhow::ensure!(item < first.len(), "--item must be below {}", first.len());
    let x = first.start + item;
    let sampler = UnexplainedSampler::new(x, offset, design, &instance.signal)?;
    let m = sampler.moments().clone();
    let direct = sampler.sample_many(samples, run.seed(), SamplerMode::Direct);
    let multi = sampler.sample_many(samples, run.seed() ^ 1, SamplerMode::Multinomial);
    let ks = ks_two_sample(&direct, &multi);
    let rows = vec![
        McSummary::from_samples("u_direct", &direct, m.mean),
        McSummary::from_samples("u_multinomial", &multi, m.mean),
        variance_row("u_direct_variance", &direct, m.variance),
        variance_row("u_multinomial_variance", &multi, m.variance),
    ];
    eprintln!("ks statistic {:.5}, p-value {:.4}", ks.statistic, ks.p_value);
    let mut w = output(run.out.as_deref())?;
    write_summaries(&rows, &mut w)?;
    w.flush()?;
    Ok(Status::Success)
}

/// Sample variance with its normal-theory standard error.
fn variance_row(quantity: &str, samples: &[f64], reference: f64) -> McSummary {
    let (_, var) = pooled_core::oracle::mean_variance(samples);
    McSummary {
        quantity: quantity.into(),
        n_samples: samples.len(),
        mean: var,
        stderr: var * (2.0 / (samples.len() as f64 - 1.0)).sqrt(),
        reference,
    }
}
