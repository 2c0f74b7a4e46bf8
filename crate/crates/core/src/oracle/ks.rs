//! Two-sample Kolmogorov–Smirnov test.

/// Statistic and asymptotic p-value of a two-sample KS test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// `sup |F_a - F_b|` over the pooled sample; ties are stepped together.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Kolmogorov survival function `Q(λ) = 2 Σ (-1)^{j-1} e^{-2 j² λ²}`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let term = sign * (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-12 * sum.abs() {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample KS test with the small-sample corrected asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    let statistic = ks_statistic(a, b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let en = (na * nb / (na + nb)).sqrt();
    let p_value = kolmogorov_q((en + 0.12 + 0.11 / en) * statistic);
    KsResult { statistic, p_value }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identical_samples() {
        let a: Vec<f64> = (0..100).map(f64::from).collect();
        let r = ks_two_sample(&a, &a);
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn disjoint_samples() {
        let a: Vec<f64> = (0..200).map(f64::from).collect();
        let b: Vec<f64> = (1000..1200).map(f64::from).collect();
        let r = ks_two_sample(&a, &b);
        assert_eq!(r.statistic, 1.0);
        assert!(r.p_value < 1e-20);
    }

    #[test]
    fn ties_step_together() {
        // F_a jumps to 1 at 1, F_b to 1/2 at 1 and 1 at 2
        assert_eq!(ks_statistic(&[1.0, 1.0], &[1.0, 2.0]), 0.5);
    }

    #[test]
    fn known_q_values() {
        // Q(1) = 0.26999967..., Q(1.36) ≈ 0.0494
        assert!((kolmogorov_q(1.0) - 0.2699996716).abs() < 1e-8);
        assert!((kolmogorov_q(1.36) - 0.0494).abs() < 1e-3);
    }

    #[test]
    fn same_law_rarely_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rejections = (0..100)
            .filter(|_| {
                let a: Vec<f64> = (0..500).map(|_| rng.random::<f64>()).collect();
                let b: Vec<f64> = (0..500).map(|_| rng.random::<f64>()).collect();
                ks_two_sample(&a, &b).p_value < 0.01
            })
            .count();
        assert!(rejections <= 5, "{rejections}");
    }
}
