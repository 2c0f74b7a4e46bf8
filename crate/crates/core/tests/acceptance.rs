//! Acceptance suite: one pass/fail line per criterion.
//!
//! Run with `cargo test -p pooled-core --test acceptance`.

use std::time::{Duration, Instant};

use pooled_core::decoder::{residuals_from_scratch, Decoder};
use pooled_core::design::{c_min, exponent_f, Overrides};
use pooled_core::diagnostics::{check_counts, check_degrees, check_residuals};
use pooled_core::oracle::bounds::m_pd;
use pooled_core::oracle::exhaustive::{exhaustive_decode, ENUMERATION_CAP};
use pooled_core::oracle::{conditional_moments, ks_two_sample, mean_variance, McSummary, SamplerMode, UnexplainedSampler};
use pooled_core::rng::{stream_rng, trial_seed, Domain};
use pooled_core::simulation::{c_min_for, run_trial, sweep, Instance, SweepAxis};
use pooled_core::{DesignParams, Rate, Thresholds};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn formula_suite() -> Outcome {
    let k = 1000;
    let a = rel(m_pd(0.5, 0.0, 1.0, k), 8.0 * (3.0 + 2.0 * 2f64.sqrt()) * k as f64);
    let b = rel(m_pd(0.25, 0.0, 1.0, k), 72.0 * k as f64);
    let t = Thresholds::from_parts(0.25, 6.0, 1.0, pooled_core::design::skew_alpha(0.25), 2);
    let thr = (t.t01 - 4.0).abs().max((t.steps[0] - 9.0).abs());
    let cm = c_min(0.5, 0.05, 1.0);
    let f = (exponent_f(cm, 0.5, 0.05, 1.0) - 1.0).abs();
    let pass = a < 1e-9 && b < 1e-9 && thr < 1e-9 && (cm - 29.14).abs() <= 0.01 && f < 1e-9;
    outcome(
        pass,
        format!("m_pd rel err {a:.1e}/{b:.1e}; thresholds ({:.6}, {:.6}); c_min {cm:.4}; |f-1| {f:.1e}", t.t01, t.steps[0]),
    )
}

/// Small instance for the distributional checks, `n = 2000`, `k = 45`.
fn small_instance(seed: u64) -> Instance {
    let params = DesignParams::new(2000, vec![30, 15], 0.05, Rate::C(20.0), seed);
    Instance::generate(&params).unwrap()
}

/// Bulk items covering both labels and several offsets.
fn probe_pairs(inst: &Instance) -> Vec<(usize, usize)> {
    let d = &inst.design;
    let first = d.bulk_compartments().start;
    let mid = first + d.bulk_compartments().len() / 2;
    let pick = |c: usize, nonzero: bool| d.items(c).find(|&x| (inst.signal.label(x) > 0) == nonzero).unwrap();
    let s = d.window();
    vec![
        (pick(first, true), 0),
        (pick(first, false), s - 1),
        (pick(mid, true), s - 1),
        (pick(mid, false), 1.min(s - 1)),
        (pick(d.bulk_compartments().end - 1, true), 1.min(s - 1)),
    ]
}

fn sampler_agreement() -> Outcome {
    let inst = small_instance(21);
    let mut passed = 0;
    let mut ps = Vec::new();
    for (idx, (x, j)) in probe_pairs(&inst).into_iter().enumerate() {
        let sampler = UnexplainedSampler::new(x, j, &inst.design, &inst.signal).unwrap();
        let direct = sampler.sample_many(100_000, 1000 + idx as u64, SamplerMode::Direct);
        let multi = sampler.sample_many(100_000, 2000 + idx as u64, SamplerMode::Multinomial);
        let ks = ks_two_sample(&direct, &multi);
        passed += (ks.p_value > 0.01) as usize;
        ps.push(format!("{:.3}", ks.p_value));
    }
    outcome(passed >= 4, format!("{passed}/5 pairs with p > 0.01; p = [{}]", ps.join(", ")))
}

fn moment_check() -> Outcome {
    // dense overrides so the conditional variance is at least 10
    let o = Overrides { ell: Some(4), s: Some(2), m: Some(5 * 40), gamma: Some(2 * 60) };
    let params = DesignParams::new(2000, vec![40, 20], 0.05, Rate::C(1.0), 31).with_overrides(o);
    let inst = Instance::generate(&params).unwrap();
    let d = &inst.design;
    let (x, j) = d
        .bulk_compartments()
        .flat_map(|c| d.items(c).take(20).flat_map(|x| (0..d.window()).map(move |j| (x, j))))
        .max_by(|a, b| {
            let va = conditional_moments(a.0, a.1, d, &inst.signal).unwrap().variance;
            let vb = conditional_moments(b.0, b.1, d, &inst.signal).unwrap().variance;
            va.total_cmp(&vb)
        })
        .unwrap();
    let sampler = UnexplainedSampler::new(x, j, d, &inst.signal).unwrap();
    let m = sampler.moments().clone();
    let samples = sampler.sample_many(100_000, 77, SamplerMode::Direct);
    let summary = McSummary::from_samples("u_mean", &samples, m.mean);
    let (_, var) = mean_variance(&samples);
    let var_err = rel(var, m.variance);
    let pass = m.variance >= 10.0 && summary.within(3.0) && var_err <= 0.05;
    outcome(
        pass,
        format!(
            "item {x} offset {j}: mean {:.3} vs {:.3} (se {:.3}); variance {var:.3} vs {:.3} ({:.2}%)",
            summary.mean,
            m.mean,
            summary.stderr,
            m.variance,
            100.0 * var_err
        ),
    )
}

fn desk_params(seed: u64) -> DesignParams {
    let base = DesignParams::new(100_000, vec![316], 0.05, Rate::C(1.0), seed);
    let cm = c_min_for(&base).unwrap();
    DesignParams { rate: Rate::C(1.2 * cm), ..base }
}

fn concentration() -> Outcome {
    let mut passes = 0;
    let mut slowest = Duration::ZERO;
    let mut ratio_line = String::new();
    for seed in 0..5 {
        let start = Instant::now();
        let inst = Instance::generate(&desk_params(seed)).unwrap();
        let deg = check_degrees(&inst.design);
        let counts = check_counts(&inst.signal, &inst.design);
        let ratio = deg.get("distinct_ratio").unwrap();
        let ok = deg.pass() && counts.pass() && deg.checks.iter().all(|c| !c.skipped);
        passes += ok as usize;
        slowest = slowest.max(start.elapsed());
        if seed == 0 {
            ratio_line = format!("mean distinct/total {:.4} >= {:.4}", ratio.statistic, ratio.lower.unwrap());
        }
    }
    outcome(
        passes == 5 && slowest < Duration::from_secs(30),
        format!("{passes}/5 seeds pass; {ratio_line}; slowest seed {:.1}s", slowest.as_secs_f64()),
    )
}

fn residual_bound() -> Outcome {
    let start = Instant::now();
    let inst = Instance::generate(&desk_params(5)).unwrap();
    let r = check_residuals(&inst.design, &inst.measurements, &inst.signal, &inst.params, &inst.derived).unwrap();
    let c = &r.checks[0];
    outcome(
        r.pass() && start.elapsed() < Duration::from_secs(60),
        format!("fraction within bound {:.4} over {} items; {}", c.statistic, c.sample_size, c.detail),
    )
}

fn recovery() -> Outcome {
    let base = DesignParams::new(1_000_000, vec![1000], 0.05, Rate::C(1.0), 0);
    let cm = c_min_for(&base).unwrap();
    let params = DesignParams { rate: Rate::C(1.2 * cm), ..base };
    let mut exact = 0;
    let mut errors = Vec::new();
    let mut slowest = Duration::ZERO;
    for t in 0..10 {
        let start = Instant::now();
        let outcome = run_trial(&params.clone().with_seed(trial_seed(600, t))).unwrap();
        slowest = slowest.max(start.elapsed());
        exact += outcome.exact() as usize;
        errors.push(outcome.errors.to_string());
    }
    outcome(
        exact >= 8 && slowest < Duration::from_secs(120),
        format!(
            "{exact}/10 exact at c = {:.2} (1.2 c_min); errors per trial [{}]; slowest trial {:.1}s",
            1.2 * cm,
            errors.join(", "),
            slowest.as_secs_f64()
        ),
    )
}

fn rate_curve() -> Outcome {
    let start = Instant::now();
    let base = desk_params(0);
    let cm = c_min_for(&base).unwrap();
    let factors = [0.5, 0.75, 1.0, 1.25];
    let values: Vec<f64> = factors.iter().map(|f| f * cm).collect();
    let rows = sweep(&base, SweepAxis::C, &values, 30, 700).unwrap();
    let line: Vec<String> = rows
        .iter()
        .zip(factors)
        .map(|(r, f)| format!("{f}: {}/{} (mean errors {:.1})", r.successes, r.trials, r.mean_errors))
        .collect();
    let pass = rows[3].successes > rows[0].successes && start.elapsed() < Duration::from_secs(1800);
    outcome(pass, format!("{}; {:.0}s", line.join("; "), start.elapsed().as_secs_f64()))
}

fn tiny_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = stream_rng(800, Domain::Trial, 0);
    let mut contained = 0;
    let mut singletons = 0;
    let mut singleton_ok = 0;
    for t in 0..100 {
        let n = rng.random_range(8..=14);
        let counts = if rng.random_bool(0.5) { vec![rng.random_range(1..=3)] } else { vec![rng.random_range(1..=2), 1] };
        let ell = rng.random_range(2..=3);
        let s = 2;
        let pools = rng.random_range(3..=5);
        let per_source = rng.random_range(1..=3);
        let o = Overrides { ell: Some(ell), s: Some(s), m: Some((ell + s - 1) * pools), gamma: Some(s * per_source) };
        let params = DesignParams::new(n, counts.clone(), 0.05, Rate::C(1.0), t).with_overrides(o);
        let inst = match Instance::generate(&params) {
            Ok(i) => i,
            Err(e) => panic!("tiny instance {t}: {e}"),
        };
        let set = exhaustive_decode(&inst.design, &inst.measurements, inst.signal.seed_labels(), &counts, ENUMERATION_CAP)
            .unwrap();
        let truth = inst.signal.bulk_labels().to_vec();
        contained += set.contains(&truth) as usize;
        if set.len() == 1 {
            singletons += 1;
            singleton_ok += (set[0] == truth) as usize;
        }
    }
    let pass = contained == 100 && singleton_ok == singletons && start.elapsed() < Duration::from_secs(60);
    outcome(pass, format!("truth feasible in {contained}/100; {singletons} identifiable, all equal to truth: {}", singleton_ok == singletons))
}

fn residual_consistency() -> Outcome {
    let mut rng = stream_rng(900, Domain::Trial, 0);
    let mut consistent = 0;
    let mut commits = 0;
    for t in 0..20 {
        let n = rng.random_range(3_000..20_000);
        let k = rng.random_range(20..120);
        let counts = if t % 2 == 0 { vec![k] } else { vec![k - k / 3, k / 3] };
        let c = rng.random_range(5.0..60.0);
        let inst = Instance::generate(&DesignParams::new(n, counts, 0.05, Rate::C(c), t)).unwrap();
        let mut dec = Decoder::new(&inst.design, &inst.measurements, inst.signal.seed_labels(), inst.model(), inst.thresholds()).unwrap();
        let mut ok = true;
        while dec.step().is_some() {
            commits += 1;
            ok &= dec.residuals() == residuals_from_scratch(&inst.design, &inst.measurements, dec.estimate()).as_slice();
        }
        consistent += ok as usize;
    }
    outcome(consistent == 20, format!("{consistent}/20 instances consistent over {commits} commits"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("formula suite", formula_suite),
        ("sampler agreement (KS)", sampler_agreement),
        ("conditional moments", moment_check),
        ("concentration diagnostics", concentration),
        ("residual bound", residual_bound),
        ("end-to-end recovery n=1e6", recovery),
        ("monotone rate curve", rate_curve),
        ("tiny-instance oracle agreement", tiny_oracle),
        ("residual consistency", residual_consistency),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = format!("{}", i + 1);
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        failed += (!o.pass) as usize;
        println!(
            "criterion {id} {} {name}: {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
