//! Closed-form 1-D results via the transfer matrix, used as independent
//! oracles for the series engine and the exact enumerator.
//!
//! On a free-boundary chain the bond variables ω(t)ω(t+1) are independent
//! under the Gibbs measure, each with mean tanh λ, so the pair correlation is
//! exactly tanh(λ)^d at separation d — for every chain length and position.
//! Summing over all separations gives the limiting block variance
//! V(λ) = 1 + 2·Σ_{d≥1} tanh(λ)^d = e^{2λ}, whose Taylor coefficients are
//! Vₙ = 2ⁿ/n!.

use crate::Rational;
use num_bigint::BigInt;

/// Exact 1-D pair correlation ⟨ω(s)ω(t)⟩_λ = tanh(λ)^{|s−t|}.
pub fn pair_correlation(lambda: f64, separation: u64) -> f64 {
    libm::pow(libm::tanh(lambda), separation as f64)
}

/// Exact 1-D limiting variance of the normalized block sum: e^{2λ}.
pub fn limiting_variance(lambda: f64) -> f64 {
    libm::exp(2.0 * lambda)
}

/// Exact 1-D variance-series coefficient Vₙ = 2ⁿ/n! (Taylor coefficient of
/// e^{2λ}), derived independently of the cluster enumeration.
pub fn variance_coefficient(n: u64) -> Rational {
    let mut numerator = BigInt::from(1u32);
    let mut denominator = BigInt::from(1u32);
    for j in 1..=n {
        numerator *= 2u32;
        denominator *= j;
    }
    Rational::new(numerator, denominator)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free_field::PointMultiset;
    use crate::gibbs::{exact_moment, GibbsSpec};
    use crate::lattice::Point;

    #[test]
    fn matches_exact_enumeration_everywhere_in_the_chain() {
        // Position- and length-independence of the free-boundary pair
        // correlation, against the exhaustive enumerator.
        for lambda in [0.1, 0.35] {
            for half_side in [2u32, 4] {
                let spec = GibbsSpec::new(1, half_side, lambda).unwrap();
                let n = i64::from(half_side);
                for (s, t) in [(-n, -n + 1), (0i64, 1i64), (n - 2, n), (-n, n)] {
                    let obs = PointMultiset::from_points(&[
                        Point::new(&[s]),
                        Point::new(&[t]),
                    ])
                    .unwrap();
                    let exact = exact_moment(&spec, &obs).unwrap();
                    let oracle = pair_correlation(lambda, t.abs_diff(s));
                    assert!(
                        (exact - oracle).abs() < 1e-13,
                        "separation {} at λ = {lambda}, N = {half_side}",
                        t.abs_diff(s)
                    );
                }
            }
        }
    }

    #[test]
    fn variance_closed_form_consistency() {
        // e^{2λ} = (1 + tanh λ)/(1 − tanh λ): the geometric sum identity.
        for lambda in [0.05, 0.2, 0.7] {
            let th = libm::tanh(lambda);
            let summed = (1.0 + th) / (1.0 - th);
            assert!((limiting_variance(lambda) - summed).abs() < 1e-12);
        }
    }

    #[test]
    fn coefficient_fixed_values() {
        let expect = [(0u64, (1i64, 1i64)), (1, (2, 1)), (2, (2, 1)), (3, (4, 3)), (4, (2, 3))];
        for (n, (num, den)) in expect {
            assert_eq!(
                variance_coefficient(n),
                Rational::new(BigInt::from(num), BigInt::from(den))
            );
        }
    }
}
