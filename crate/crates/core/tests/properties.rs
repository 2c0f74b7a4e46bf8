//! Structural invariants over randomly drawn parameters.

use pooled_core::decoder::residuals_from_scratch;
use pooled_core::oracle::{bounds, conditional_moments, multinomial_counts};
use pooled_core::rng::{stream_rng, Domain};
use pooled_core::signal::seed_counts;
use pooled_core::{
    build_design, decode, derive_params, measure, sample_signal, DesignParams, Rate, ScoreModel,
    Thresholds,
};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = DesignParams> {
    (300usize..3000, 0.01f64..0.24, 1.0f64..60.0, any::<u64>(), 1usize..4)
        .prop_flat_map(|(n, eps, c, seed, d)| {
            proptest::collection::vec(1usize..(n / 20).max(2), d)
                .prop_map(move |counts| DesignParams::new(n, counts, eps, Rate::C(c), seed))
        })
        .prop_filter("k >= 2 and k < n", |p| p.k() >= 2 && p.k() < p.n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn derived_parameters_are_admissible(p in params()) {
        let dp = derive_params(&p).unwrap();
        prop_assert!(dp.theta > 0.0 && dp.theta < 1.0);
        prop_assert!(dp.ell >= 1 && dp.s >= 2);
        prop_assert_eq!(dp.m % dp.compartments(), 0);
        prop_assert_eq!(dp.gamma % dp.s, 0);
        prop_assert!(dp.gamma >= dp.s);
        prop_assert!(dp.alpha > 0.0 && dp.alpha < 1.0);
    }

    #[test]
    fn design_layout_and_degrees(p in params()) {
        let dp = derive_params(&p).unwrap();
        let design = build_design(&p, &dp).unwrap();
        let slots = dp.slots_per_source();
        for t in 0..design.compartments() {
            for a in design.pools_in(t) {
                let pool = design.pool(a);
                prop_assert_eq!(pool.len(), dp.gamma);
                for r in design.sources(t) {
                    let from = pool.iter().filter(|&&y| design.item_compartment(y as usize) == r).count();
                    prop_assert_eq!(from, slots);
                }
            }
        }
        let total: u64 = (0..design.n_items()).map(|x| design.total_degree(x) as u64).sum();
        prop_assert_eq!(total, (dp.m * dp.gamma) as u64);
        for x in 0..design.n_items() {
            for j in 0..design.window() {
                prop_assert!(design.distinct_degree(x, j) <= design.degree(x, j));
            }
        }
        let (lo, hi) = (p.n / dp.ell, p.n.div_ceil(dp.ell));
        for c in design.bulk_compartments() {
            let size = design.items(c).len();
            prop_assert!(size == lo || size == hi, "{} not in {{{}, {}}}", size, lo, hi);
        }
    }

    #[test]
    fn signal_histograms_and_measurement_range(p in params()) {
        let dp = derive_params(&p).unwrap();
        let design = build_design(&p, &dp).unwrap();
        let mut rng = stream_rng(p.rng_seed, Domain::Signal, 0);
        let signal = sample_signal(&p, &design, &mut rng).unwrap();
        let hist = signal.bulk_histogram();
        prop_assert_eq!(&hist[1..], &p.counts[..]);
        let mut seed_hist = vec![0usize; p.d()];
        for &l in signal.seed_labels() {
            if l > 0 {
                seed_hist[l as usize - 1] += 1;
            }
        }
        prop_assert_eq!(seed_hist, seed_counts(&p.counts, dp.ell, dp.s));
        let cap = (p.d() * dp.gamma) as u64;
        prop_assert!(measure(&design, &signal).values().iter().all(|&v| v <= cap));
    }

    #[test]
    fn conditional_moments_are_proper(p in params(), pick in any::<u64>()) {
        let dp = derive_params(&p).unwrap();
        let design = build_design(&p, &dp).unwrap();
        let mut rng = stream_rng(p.rng_seed, Domain::Signal, 0);
        let signal = sample_signal(&p, &design, &mut rng).unwrap();
        let x = design.n_seed() + (pick % p.n as u64) as usize;
        for j in 0..design.window() {
            let m = conditional_moments(x, j, &design, &signal).unwrap();
            prop_assert!(m.variance >= 0.0 && m.mean >= 0.0);
            for block in &m.blocks {
                prop_assert!(block.probs.iter().all(|&q| (0.0..=1.0).contains(&q)));
                prop_assert!(block.probs.iter().sum::<f64>() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn bounds_are_positive(p in params()) {
        let dp = derive_params(&p).unwrap();
        let b = bounds(&p, &dp, false);
        prop_assert!(b.m_qgt > 0.0 && b.m_pd > 0.0 && b.m_sc > 0.0);
        prop_assert!(b.m_count.is_none_or(|m| m > 0));
        prop_assert!(b.m_gk.is_none_or(|m| m > 0.0));
    }

    #[test]
    fn decoding_is_deterministic_and_residuals_consistent(p in params()) {
        let dp = derive_params(&p).unwrap();
        let design = build_design(&p, &dp).unwrap();
        let mut rng = stream_rng(p.rng_seed, Domain::Signal, 0);
        let signal = sample_signal(&p, &design, &mut rng).unwrap();
        let y = measure(&design, &signal);
        let run = || {
            decode(
                &design,
                &y,
                signal.seed_labels(),
                ScoreModel::new(&p, &dp),
                Thresholds::new(&dp, p.d()),
            )
            .unwrap()
        };
        let (a, b) = (run(), run());
        prop_assert_eq!(&a.estimate, &b.estimate);
        prop_assert!(a.estimate.iter().all(|&l| l as usize <= p.d()));
        prop_assert_eq!(&a.estimate[..design.n_seed()], signal.seed_labels());
        // the truth explains every measurement
        prop_assert!(residuals_from_scratch(&design, &y, signal.labels()).iter().all(|&r| r == 0));
    }

    #[test]
    fn thresholds_increase_and_classify_monotonically(
        theta in 0.05f64..0.95,
        c in 0.1f64..100.0,
        s in 2usize..12,
        alpha in 0.001f64..0.999,
        d in 1usize..8,
        a in -50.0f64..200.0,
        b in -50.0f64..200.0,
    ) {
        let t = Thresholds::from_parts(theta, c, (s as f64).ln(), alpha, d);
        let cuts: Vec<f64> = t.cutpoints().collect();
        prop_assert_eq!(cuts.len(), d);
        prop_assert!(cuts[0] > 0.0);
        prop_assert!(cuts.windows(2).all(|w| w[0] < w[1]));
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(t.classify(lo) <= t.classify(hi));
        prop_assert!(t.classify(hi) as usize <= d);
    }

    #[test]
    fn multinomial_counts_fit_trials(
        trials in 0u64..5000,
        raw in proptest::collection::vec(0.0f64..1.0, 1..5),
        seed in any::<u64>(),
    ) {
        let total: f64 = raw.iter().sum::<f64>() + 0.5;
        let probs: Vec<f64> = raw.iter().map(|p| p / total).collect();
        let mut rng = stream_rng(seed, Domain::Sampler, 0);
        let counts = multinomial_counts(&mut rng, trials, &probs);
        prop_assert_eq!(counts.len(), probs.len());
        prop_assert!(counts.iter().sum::<u64>() <= trials);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    // Cov(N_a, N_b) = -n·p_a·p_b; check the sign within 4 standard errors.
    #[test]
    fn multinomial_categories_are_negatively_associated(
        trials in 20u64..400,
        pa in 0.05f64..0.45,
        pb in 0.05f64..0.45,
        seed in any::<u64>(),
    ) {
        let draws = 4000;
        let mut rng = stream_rng(seed, Domain::Sampler, 1);
        let samples: Vec<(f64, f64)> = (0..draws)
            .map(|_| {
                let c = multinomial_counts(&mut rng, trials, &[pa, pb]);
                (c[0] as f64, c[1] as f64)
            })
            .collect();
        let n = draws as f64;
        let ma = samples.iter().map(|s| s.0).sum::<f64>() / n;
        let mb = samples.iter().map(|s| s.1).sum::<f64>() / n;
        let cov = samples.iter().map(|s| (s.0 - ma) * (s.1 - mb)).sum::<f64>() / (n - 1.0);
        let exact = -(trials as f64) * pa * pb;
        let va = trials as f64 * pa * (1.0 - pa);
        let vb = trials as f64 * pb * (1.0 - pb);
        let se = ((va * vb + exact * exact) / n).sqrt();
        prop_assert!(cov < 0.0 || cov.abs() <= 4.0 * se);
        prop_assert!((cov - exact).abs() <= 4.0 * se, "cov {} vs {} (se {})", cov, exact, se);
    }
}
