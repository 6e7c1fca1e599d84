//! Normal distribution helpers and the zero-rate Black formula.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Undiscounted put on a lognormal terminal price with the given forward
/// and total standard deviation of the log-price.
pub fn black_put(forward: f64, strike: f64, total_std: f64) -> f64 {
    if strike <= 0.0 {
        return 0.0;
    }
    if total_std <= 0.0 || forward <= 0.0 {
        return (strike - forward).max(0.0);
    }
    let d1 = ((forward / strike).ln() + 0.5 * total_std * total_std) / total_std;
    let d2 = d1 - total_std;
    strike * norm_cdf(-d2) - forward * norm_cdf(-d1)
}

pub fn black_call(forward: f64, strike: f64, total_std: f64) -> f64 {
    if strike <= 0.0 {
        return forward - strike;
    }
    if total_std <= 0.0 || forward <= 0.0 {
        return (forward - strike).max(0.0);
    }
    let d1 = ((forward / strike).ln() + 0.5 * total_std * total_std) / total_std;
    let d2 = d1 - total_std;
    forward * norm_cdf(d1) - strike * norm_cdf(d2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_symmetry_and_known_values() {
        assert!((norm_cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((norm_cdf(1.0) + norm_cdf(-1.0) - 1.0).abs() < 1e-15);
        // Phi(1.96)
        assert!((norm_cdf(1.959_963_984_540_054) - 0.975).abs() < 1e-15);
    }

    #[test]
    fn black_parity() {
        let (f, k, s) = (1.3, 1.1, 0.4);
        assert!((black_call(f, k, s) - black_put(f, k, s) - (f - k)).abs() < 1e-15);
    }
}
