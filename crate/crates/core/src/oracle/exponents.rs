//! Tail exponents of the idealised score and the resulting union-bound margins.

use serde::{Deserialize, Serialize};

use crate::design::{DerivedParams, DesignParams};

/// Exponents `e` of the tail bounds `s^{-e}` and the union-bound margins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorExponents {
    /// Misclassification between two non-zero neighbours.
    pub e_mid: f64,
    /// Weight-0 item above the first threshold.
    pub e_zero: f64,
    /// Weight-1 item at or below the first threshold.
    pub e_one: f64,
    /// `n·s^{-e_zero}/ℓ`.
    pub zero_margin: f64,
    /// `k·s^{-e_one}/ℓ`.
    pub one_margin: f64,
}

/// `(e_mid, e_zero, e_one)` for rate `c`, skew `α` and `Σ w²ε_w`.
pub fn exponents(theta: f64, c: f64, alpha: f64, second_moment: f64) -> (f64, f64, f64) {
    let unit = c * (1.0 - theta) / (theta * second_moment);
    (unit / 4.0, (1.0 - alpha).powi(2) * unit, alpha * alpha * unit)
}

pub fn error_exponents(params: &DesignParams, derived: &DerivedParams, alpha: f64) -> ErrorExponents {
    let (e_mid, e_zero, e_one) = exponents(derived.theta, derived.c, alpha, params.second_moment());
    let s = derived.s as f64;
    let ell = derived.ell as f64;
    ErrorExponents {
        e_mid,
        e_zero,
        e_one,
        zero_margin: params.n as f64 * s.powf(-e_zero) / ell,
        one_margin: params.k() as f64 * s.powf(-e_one) / ell,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{derive_params, skew_alpha, Rate};

    #[test]
    fn half_theta_values() {
        let alpha = skew_alpha(0.5);
        let (mid, zero, one) = exponents(0.5, 29.14, alpha, 1.0);
        assert!((one - 5.0).abs() < 0.01, "{one}");
        assert!((zero - 10.0).abs() < 0.01, "{zero}");
        assert!((mid - 29.14 / 4.0).abs() < 1e-12);
    }

    #[test]
    fn no_skew_no_one_exponent() {
        assert_eq!(exponents(0.4, 10.0, 0.0, 1.3).2, 0.0);
    }

    #[test]
    fn linear_in_c() {
        let a = exponents(0.4, 10.0, 0.3, 1.3);
        let b = exponents(0.4, 30.0, 0.3, 1.3);
        assert!((b.0 - 3.0 * a.0).abs() < 1e-12);
        assert!((b.1 - 3.0 * a.1).abs() < 1e-12);
        assert!((b.2 - 3.0 * a.2).abs() < 1e-12);
    }

    #[test]
    fn margins_shrink_with_c() {
        let lo = DesignParams::new(100_000, vec![316], 0.05, Rate::C(10.0), 0);
        let hi = DesignParams::new(100_000, vec![316], 0.05, Rate::C(40.0), 0);
        let e_lo = error_exponents(&lo, &derive_params(&lo).unwrap(), 0.4);
        let e_hi = error_exponents(&hi, &derive_params(&hi).unwrap(), 0.4);
        assert!(e_hi.zero_margin < e_lo.zero_margin);
        assert!(e_hi.one_margin < e_lo.one_margin);
    }
}
