//! Assembled experiments: Monte Carlo runs that sample normalized block
//! averages, and least-squares Taylor fits of exact finite-volume
//! semi-invariants in the coupling strength.

use crate::gibbs::block::BlockPlan;
use crate::gibbs::metropolis::{child_seed, MetropolisSampler};
use crate::gibbs::{exact_semi_invariant, GibbsError, GibbsSpec};
use crate::lattice::Point;
use alloc::vec::Vec;

/// Parameters for one block-average sampling run: a Metropolis chain over a
/// centered cube, with every retained configuration mapped to the vector of
/// normalized block sums k^{−α/2} Σ_{t∈block(τ)} ω_t for the requested τ's.
#[derive(Clone, PartialEq, Debug)]
pub struct BlockExperiment {
    /// Lattice dimension ν.
    pub nu: u32,
    /// The volume is the centered cube {−half_side, …, half_side}^ν.
    pub half_side: u32,
    /// Coupling strength λ.
    pub lambda: f64,
    /// Block side length k.
    pub scale: u32,
    /// Normalization exponent α in k^{−α/2}.
    pub alpha: f64,
    /// Coarse lattice points whose blocks are observed.
    pub taus: Vec<Point>,
    /// Master seed; the chain uses a derived child stream.
    pub seed: u64,
    /// Number of retained samples.
    pub samples: u64,
    /// Sweeps discarded before sampling starts.
    pub burn_in: u64,
    /// Sweeps between retained samples (≥ 1).
    pub thin: u64,
}

impl BlockExperiment {
    /// Runs the chain and returns one row of block values per retained
    /// sample, in τ order. Deterministic for a fixed parameter set.
    pub fn run(&self) -> Result<Vec<Vec<f64>>, GibbsError> {
        let spec = GibbsSpec::new(self.nu, self.half_side, self.lambda)?;
        let plan = BlockPlan::new(spec.cube(), self.scale, self.alpha, &self.taus)?;
        let mut sampler = MetropolisSampler::new(&spec, child_seed(self.seed, 0));
        let mut rows = Vec::with_capacity(self.samples as usize);
        sampler.run(self.burn_in, self.thin, self.samples, |config| {
            rows.push(plan.evaluate(config));
        })?;
        Ok(rows)
    }
}

/// Fits the Taylor polynomial of λ ↦ ⟨ω_{b₁}, …, ω_{b_m}⟩_λ (the exact
/// finite-volume semi-invariant) by least squares on the symmetric grid
/// λ = −p·step, …, −step, 0, step, …, p·step with p = `points_per_side`.
/// Returns the coefficients c₀, …, c_degree.
pub fn taylor_fit_semi_invariant(
    nu: u32,
    half_side: u32,
    b: &[Point],
    degree: usize,
    lambda_step: f64,
    points_per_side: usize,
) -> Result<Vec<f64>, GibbsError> {
    if !(lambda_step.is_finite() && lambda_step > 0.0) {
        return Err(GibbsError::InvalidParameter(
            "grid step must be finite and positive",
        ));
    }
    if points_per_side == 0 {
        return Err(GibbsError::InvalidParameter(
            "need at least one grid point per side",
        ));
    }
    if 2 * points_per_side < degree {
        return Err(GibbsError::InvalidParameter(
            "fit degree must be below the number of grid points",
        ));
    }
    let p = points_per_side as i64;
    let lambda_max = lambda_step * p as f64;
    let mut xs = Vec::with_capacity(2 * points_per_side + 1);
    let mut ys = Vec::with_capacity(2 * points_per_side + 1);
    for j in -p..=p {
        let lambda = lambda_step * j as f64;
        let spec = GibbsSpec::new(nu, half_side, lambda)?;
        // Fit against x = λ/λ_max ∈ [−1, 1] so the normal equations stay
        // well conditioned, then undo the rescaling per coefficient.
        xs.push(j as f64 / p as f64);
        ys.push(exact_semi_invariant(&spec, b)?);
    }
    let scaled = fit_polynomial(&xs, &ys, degree)?;
    let mut scale = 1.0;
    Ok(scaled
        .into_iter()
        .map(|c| {
            let coeff = c / scale;
            scale *= lambda_max;
            coeff
        })
        .collect())
}

/// Least-squares polynomial fit via the normal equations with partial
/// pivoting. Inputs must satisfy `xs.len() == ys.len() > degree`.
fn fit_polynomial(xs: &[f64], ys: &[f64], degree: usize) -> Result<Vec<f64>, GibbsError> {
    let m = degree + 1;
    // Normal equations A c = r with A[i][j] = Σ x^{i+j}, r[i] = Σ x^i y.
    let mut power_sums = alloc::vec![0.0f64; 2 * m - 1];
    let mut rhs = alloc::vec![0.0f64; m];
    for (&x, &y) in xs.iter().zip(ys) {
        let mut xp = 1.0;
        for (i, slot) in power_sums.iter_mut().enumerate() {
            *slot += xp;
            if i < m {
                rhs[i] += xp * y;
            }
            xp *= x;
        }
    }
    let mut a: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..m).map(|j| power_sums[i + j]).collect())
        .collect();
    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        if a[pivot][col].abs() < 1e-12 {
            return Err(GibbsError::InvalidParameter(
                "singular least-squares system",
            ));
        }
        a.swap(col, pivot);
        rhs.swap(col, pivot);
        let pivot_row = a[col].clone();
        for row in col + 1..m {
            let factor = a[row][col] / pivot_row[col];
            for (k, &pv) in pivot_row.iter().enumerate().skip(col) {
                a[row][k] -= factor * pv;
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut coeffs = alloc::vec![0.0f64; m];
    for row in (0..m).rev() {
        let mut acc = rhs[row];
        for k in row + 1..m {
            acc -= a[row][k] * coeffs[k];
        }
        coeffs[row] = acc / a[row][row];
    }
    Ok(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::empirical::joint_cumulant_estimate;
    use crate::gibbs::transfer;

    fn point(coords: &[i64]) -> Point {
        Point::new(coords)
    }

    #[test]
    fn fit_recovers_exact_polynomial_data() {
        // y = 2 − x + 0.5x³ sampled without noise is reproduced exactly.
        let xs: Vec<f64> = (-5..=5).map(|j| j as f64 / 5.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - x + 0.5 * x * x * x).collect();
        let c = fit_polynomial(&xs, &ys, 3).unwrap();
        let expect = [2.0, -1.0, 0.0, 0.5];
        for (got, want) in c.iter().zip(expect) {
            assert!((got - want).abs() < 1e-10, "{c:?}");
        }
    }

    #[test]
    fn pair_taylor_matches_hyperbolic_tangent() {
        // In one dimension the exact pair semi-invariant of adjacent sites is
        // tanh λ at any volume, so the fitted Taylor coefficients must be
        // 0, 1, 0, −1/3, 0, 2/15.
        let b = [point(&[0]), point(&[1])];
        let coeffs = taylor_fit_semi_invariant(1, 2, &b, 5, 0.01, 4).unwrap();
        assert!(coeffs[0].abs() < 1e-9);
        assert!((coeffs[1] - 1.0).abs() < 1e-6);
        assert!(coeffs[2].abs() < 1e-6);
        assert!((coeffs[3] + 1.0 / 3.0).abs() < 1e-4);
        assert!(coeffs[4].abs() < 1e-3);
        assert!((coeffs[5] - 2.0 / 15.0).abs() < 2e-2);
    }

    #[test]
    fn fit_guards_reject_bad_grids() {
        let b = [point(&[0])];
        assert!(taylor_fit_semi_invariant(1, 1, &b, 2, 0.0, 3).is_err());
        assert!(taylor_fit_semi_invariant(1, 1, &b, 2, 0.01, 0).is_err());
        assert!(taylor_fit_semi_invariant(1, 1, &b, 7, 0.01, 3).is_err());
    }

    #[test]
    fn experiment_rows_are_deterministic_and_sized() {
        let experiment = BlockExperiment {
            nu: 1,
            half_side: 8,
            lambda: 0.1,
            scale: 4,
            alpha: 1.0,
            taus: alloc::vec![point(&[-1]), point(&[0])],
            seed: 42,
            samples: 64,
            burn_in: 16,
            thin: 2,
        };
        let rows = experiment.run().unwrap();
        assert_eq!(rows.len(), 64);
        assert!(rows.iter().all(|r| r.len() == 2));
        // Every entry is a normalized sum of 4 spins: magnitude ≤ 4/√4 = 2.
        assert!(rows.iter().flatten().all(|v| v.abs() <= 2.0 + 1e-12));
        let again = experiment.run().unwrap();
        assert_eq!(rows, again);
    }

    #[test]
    fn experiment_variance_tracks_limit_at_small_coupling() {
        // ν = 1, λ = 0.05: Var(k^{−1/2} Σ block) should be near e^{2λ} for a
        // reasonably large block inside a larger volume.
        let experiment = BlockExperiment {
            nu: 1,
            half_side: 24,
            lambda: 0.05,
            scale: 16,
            alpha: 1.0,
            taus: alloc::vec![point(&[0])],
            seed: 7,
            samples: 8_000,
            burn_in: 200,
            thin: 2,
        };
        let rows = experiment.run().unwrap();
        let var = joint_cumulant_estimate(&rows, &[0, 0]).unwrap();
        let target = transfer::limiting_variance(0.05);
        assert!(
            (var.value - target).abs() <= 4.0 * var.std_error + 0.05,
            "estimated {} ± {}, want ≈ {target}",
            var.value,
            var.std_error
        );
    }
}
