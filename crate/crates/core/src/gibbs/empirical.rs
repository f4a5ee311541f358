//! Plug-in estimation of joint cumulants from sampled observable vectors,
//! with delete-block jackknife standard errors.
//!
//! The plug-in estimator substitutes empirical means of monomials for the
//! moments in the partition-sum formula. Standard errors come from deleting
//! contiguous sample blocks (up to 100), which keeps the error bars honest
//! for the weakly autocorrelated output of a thinned Markov chain.

use crate::cumulant::{cumulant, Subset};
use alloc::vec::Vec;
use core::fmt;

/// Highest estimable order: the partition formula is exact at any order, but
/// sampling noise past the fourth cumulant swamps the signal.
pub const MAX_EMPIRICAL_ORDER: usize = 4;

/// Maximum number of jackknife blocks.
const MAX_BLOCKS: usize = 100;

/// Errors from empirical estimation.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum EmpiricalError {
    /// At least two samples are required.
    TooFewSamples { n: usize },
    /// Sample rows must all have the same width.
    RaggedSamples,
    /// No variable indices were given.
    EmptyIndices,
    /// The requested order exceeds [`MAX_EMPIRICAL_ORDER`].
    OrderTooHigh { order: usize, cap: usize },
    /// A variable index is outside the sample width.
    IndexOutOfRange { index: usize, width: usize },
}

impl fmt::Display for EmpiricalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EmpiricalError::TooFewSamples { n } => {
                write!(f, "need at least 2 samples, got {n}")
            }
            EmpiricalError::RaggedSamples => write!(f, "sample rows have differing widths"),
            EmpiricalError::EmptyIndices => write!(f, "at least one variable index is required"),
            EmpiricalError::OrderTooHigh { order, cap } => {
                write!(f, "order {order} exceeds the estimation cap {cap}")
            }
            EmpiricalError::IndexOutOfRange { index, width } => {
                write!(f, "variable index {index} outside sample width {width}")
            }
        }
    }
}

impl core::error::Error for EmpiricalError {}

/// A jointly estimated cumulant with its jackknife standard error.
#[derive(Clone, PartialEq, Debug)]
pub struct CumulantEstimate {
    /// The component index used in each slot (length = order; repeats give
    /// marginal cumulants, mixtures give joint ones).
    pub indices: Vec<usize>,
    /// Plug-in point estimate.
    pub value: f64,
    /// Delete-block jackknife standard error.
    pub std_error: f64,
    /// Number of samples used.
    pub n_samples: usize,
}

/// The plug-in joint cumulant of the components selected by `indices`
/// (e.g. `[0, 0]` = variance of component 0, `[0, 1]` = covariance).
pub fn joint_cumulant_estimate(
    samples: &[Vec<f64>],
    indices: &[usize],
) -> Result<CumulantEstimate, EmpiricalError> {
    let n = samples.len();
    if n < 2 {
        return Err(EmpiricalError::TooFewSamples { n });
    }
    let width = samples[0].len();
    if samples.iter().any(|row| row.len() != width) {
        return Err(EmpiricalError::RaggedSamples);
    }
    let m = indices.len();
    if m == 0 {
        return Err(EmpiricalError::EmptyIndices);
    }
    if m > MAX_EMPIRICAL_ORDER {
        return Err(EmpiricalError::OrderTooHigh {
            order: m,
            cap: MAX_EMPIRICAL_ORDER,
        });
    }
    if let Some(&index) = indices.iter().find(|&&i| i >= width) {
        return Err(EmpiricalError::IndexOutOfRange { index, width });
    }

    // Monomial sums per subset of the index slots, total and per block.
    let n_masks = 1usize << m;
    let n_blocks = n.min(MAX_BLOCKS);
    let mut total = alloc::vec![0.0f64; n_masks];
    let mut per_block = alloc::vec![alloc::vec![0.0f64; n_masks]; n_blocks];
    let mut block_len = alloc::vec![0usize; n_blocks];
    let mut row_vals = alloc::vec![1.0f64; n_masks];
    for (row_idx, row) in samples.iter().enumerate() {
        let block = row_idx * n_blocks / n;
        block_len[block] += 1;
        for mask in 1..n_masks {
            // Build each monomial from the one without its lowest bit.
            let low = mask.trailing_zeros() as usize;
            row_vals[mask] = row_vals[mask & (mask - 1)] * row[indices[low]];
            total[mask] += row_vals[mask];
            per_block[block][mask] += row_vals[mask];
        }
    }

    let estimate_from = |sums: &dyn Fn(usize) -> f64, count: f64| -> f64 {
        cumulant(m, |s: Subset| sums(s.bits() as usize) / count)
            .expect("order was validated above")
    };
    let value = estimate_from(&|mask| total[mask], n as f64);

    // Jackknife replicates: drop one block at a time.
    let mut replicates = Vec::with_capacity(n_blocks);
    for b in 0..n_blocks {
        let kept = (n - block_len[b]) as f64;
        replicates.push(estimate_from(&|mask| total[mask] - per_block[b][mask], kept));
    }
    let mean = replicates.iter().sum::<f64>() / n_blocks as f64;
    let sum_sq: f64 = replicates.iter().map(|r| (r - mean) * (r - mean)).sum();
    let std_error = libm::sqrt(sum_sq * (n_blocks as f64 - 1.0) / n_blocks as f64);

    Ok(CumulantEstimate {
        indices: indices.to_vec(),
        value,
        std_error,
        n_samples: n,
    })
}

/// Marginal cumulants of one component, orders 1..=`max_order`.
pub fn component_cumulants(
    samples: &[Vec<f64>],
    component: usize,
    max_order: usize,
) -> Result<Vec<CumulantEstimate>, EmpiricalError> {
    (1..=max_order)
        .map(|order| joint_cumulant_estimate(samples, &alloc::vec![component; order]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha12Rng;
    use rand_core::{RngCore, SeedableRng};

    fn column(values: &[f64]) -> Vec<Vec<f64>> {
        values.iter().map(|&v| alloc::vec![v]).collect()
    }

    #[test]
    fn mean_jackknife_matches_closed_form() {
        // For the order-1 cumulant (the mean) with delete-1 blocks, the
        // jackknife standard error is exactly s/√n.
        let values = [1.0, 4.0, -2.0, 0.5, 3.25, -1.5, 2.0];
        let n = values.len() as f64;
        let est = joint_cumulant_estimate(&column(&values), &[0]).unwrap();
        let mean = values.iter().sum::<f64>() / n;
        let s2 = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        assert!((est.value - mean).abs() < 1e-14);
        assert!((est.std_error - libm::sqrt(s2 / n)).abs() < 1e-14);
    }

    #[test]
    fn two_sample_variance_closed_form() {
        // Plug-in variance of {a, b} is (a−b)²/4.
        let est = joint_cumulant_estimate(&column(&[3.0, -1.0]), &[0, 0]).unwrap();
        assert!((est.value - 4.0).abs() < 1e-14);
    }

    #[test]
    fn constant_samples_have_zero_variance() {
        let est = joint_cumulant_estimate(&column(&[2.5; 50]), &[0, 0]).unwrap();
        assert_eq!(est.value, 0.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn fair_sign_cumulants_within_error_bars() {
        // iid ±1 synthetic data: κ₁ = 0, κ₂ = 1, κ₃ = 0, κ₄ = −2.
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        let samples: Vec<Vec<f64>> = (0..20_000)
            .map(|_| alloc::vec![if rng.next_u64() & 1 == 0 { 1.0 } else { -1.0 }])
            .collect();
        let estimates = component_cumulants(&samples, 0, 4).unwrap();
        let targets = [0.0, 1.0, 0.0, -2.0];
        for (est, target) in estimates.iter().zip(targets) {
            assert!(
                (est.value - target).abs() <= 4.0 * est.std_error.max(1e-12),
                "order {} estimate {} ± {} vs {target}",
                est.indices.len(),
                est.value,
                est.std_error
            );
        }
    }

    #[test]
    fn independent_components_have_small_covariance() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let mut sign = || if rng.next_u64() & 1 == 0 { 1.0 } else { -1.0 };
        let samples: Vec<Vec<f64>> = (0..20_000).map(|_| alloc::vec![sign(), sign()]).collect();
        let cov = joint_cumulant_estimate(&samples, &[0, 1]).unwrap();
        assert!(cov.value.abs() <= 4.0 * cov.std_error);
        // And the diagonal terms still see variance 1.
        let var = joint_cumulant_estimate(&samples, &[1, 1]).unwrap();
        assert!((var.value - 1.0).abs() <= 4.0 * var.std_error);
    }

    #[test]
    fn validation_errors() {
        let ok = column(&[1.0, 2.0, 3.0]);
        assert_eq!(
            joint_cumulant_estimate(&ok[..1], &[0]).unwrap_err(),
            EmpiricalError::TooFewSamples { n: 1 }
        );
        assert_eq!(
            joint_cumulant_estimate(&ok, &[]).unwrap_err(),
            EmpiricalError::EmptyIndices
        );
        assert_eq!(
            joint_cumulant_estimate(&ok, &[0; 5]).unwrap_err(),
            EmpiricalError::OrderTooHigh { order: 5, cap: 4 }
        );
        assert_eq!(
            joint_cumulant_estimate(&ok, &[1]).unwrap_err(),
            EmpiricalError::IndexOutOfRange { index: 1, width: 1 }
        );
        let mut ragged = ok.clone();
        ragged[1] = alloc::vec![1.0, 2.0];
        assert_eq!(
            joint_cumulant_estimate(&ragged, &[0]).unwrap_err(),
            EmpiricalError::RaggedSamples
        );
    }
}
