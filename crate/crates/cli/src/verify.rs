//! Randomized and exact verification suites runnable from the command line.
//!
//! Each suite stresses one layer of the library against an independent
//! prediction: a combinatorial identity, an exact transfer-matrix value, or
//! a proven inequality. Suites are deterministic given `--seed`, and the
//! whole run fails (nonzero exit) if any single check fails.

use std::collections::BTreeSet;

use anyhow::Result;
use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

use blockspin_core::estimation::{
    bound_check_semi_invariant, estimation_check, AbstractFamily, LinkedUniverse,
};
use blockspin_core::family::{connects, enumerate_connected_with_cap, Family};
use blockspin_core::free_field::{free_cumulant, free_moment, PointMultiset};
use blockspin_core::gibbs::empirical::joint_cumulant_estimate;
use blockspin_core::gibbs::experiment::{taylor_fit_semi_invariant, BlockExperiment};
use blockspin_core::gibbs::metropolis::child_seed;
use blockspin_core::gibbs::transfer::{limiting_variance, pair_correlation};
use blockspin_core::lattice::{Edge, Point};
use blockspin_core::Rational;

use num_traits::{One, Zero};

use crate::output::{CheckRow, VerifyReport};

/// The available verification suites.
#[derive(Clone, Copy, PartialEq, Eq, Debug, clap::ValueEnum)]
pub enum Suite {
    /// Parity rules for free moments and cumulants, and the exact vanishing
    /// of disconnected semi-invariants.
    Parity,
    /// The counting inequality on random bounded-degree linked universes.
    Estimation,
    /// The factorial-exponential magnitude bound on enumerated families.
    Bounds,
    /// Structural properties of connected-family enumeration.
    Enumeration,
    /// Coupling-series coefficients recovered from exact volumes by fitting.
    Taylor,
    /// Monte Carlo block averages against exact one-dimensional statistics.
    Clt,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Parity => "parity",
            Suite::Estimation => "estimation",
            Suite::Bounds => "bounds",
            Suite::Enumeration => "enumeration",
            Suite::Taylor => "taylor",
            Suite::Clt => "clt",
        }
    }

    /// Default for `--cases`; what a "case" means varies by suite (random
    /// instances, random bases, or Monte Carlo samples).
    pub fn default_cases(self) -> u64 {
        match self {
            Suite::Parity | Suite::Estimation => 500,
            Suite::Enumeration => 20,
            Suite::Clt => 20_000,
            // Fixed deterministic sweeps; the case count is not used.
            Suite::Bounds | Suite::Taylor => 1,
        }
    }
}

/// Runs one suite and collects per-check results.
pub fn run_suite(suite: Suite, cases: u64, seed: u64) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    match suite {
        Suite::Parity => parity_suite(cases, seed, &mut checks)?,
        Suite::Estimation => estimation_suite(cases, seed, &mut checks)?,
        Suite::Bounds => bounds_suite(&mut checks)?,
        Suite::Enumeration => enumeration_suite(cases, seed, &mut checks)?,
        Suite::Taylor => taylor_suite(&mut checks)?,
        Suite::Clt => clt_suite(cases, seed, &mut checks)?,
    }
    let passed = checks.iter().all(|c| c.ok);
    Ok(VerifyReport {
        suite: suite.name().to_string(),
        cases,
        seed,
        checks,
        passed,
    })
}

fn check(name: &str, ok: bool, detail: String) -> CheckRow {
    CheckRow {
        name: name.to_string(),
        ok,
        detail,
    }
}

fn pick(rng: &mut ChaCha12Rng, n: u64) -> u64 {
    rng.next_u64() % n
}

fn p(coords: &[i64]) -> Point {
    Point::new(coords)
}

/// Free moments are 1 exactly when every site has even multiplicity, joint
/// cumulants of odd total degree vanish exactly, and disconnected
/// base/family semi-invariants vanish exactly.
fn parity_suite(cases: u64, seed: u64, checks: &mut Vec<CheckRow>) -> Result<()> {
    let mut rng = ChaCha12Rng::seed_from_u64(child_seed(seed, 1));

    let mut moment_ok = 0u64;
    for _ in 0..cases {
        let mut ms = PointMultiset::empty();
        for _ in 0..1 + pick(&mut rng, 5) {
            let site = p(&[pick(&mut rng, 9) as i64 - 4, pick(&mut rng, 9) as i64 - 4]);
            ms.insert(site, 1 + pick(&mut rng, 4) as u32)?;
        }
        let expect = if ms.all_even() {
            Rational::one()
        } else {
            Rational::zero()
        };
        if free_moment(&ms) == expect {
            moment_ok += 1;
        }
    }
    checks.push(check(
        "moment-parity-rule",
        moment_ok == cases,
        format!("{moment_ok}/{cases} random multisets matched the even-site rule"),
    ));

    let mut odd_ok = 0u64;
    for _ in 0..cases {
        let m = 1 + pick(&mut rng, 3) as usize;
        let mut vars = Vec::with_capacity(m);
        let mut degree = 0u64;
        for _ in 0..m {
            let mut obs = PointMultiset::empty();
            for _ in 0..1 + pick(&mut rng, 3) {
                let site = p(&[pick(&mut rng, 7) as i64 - 3]);
                let mult = 1 + pick(&mut rng, 3) as u32;
                obs.insert(site, mult)?;
                degree += u64::from(mult);
            }
            vars.push(obs);
        }
        if degree.is_multiple_of(2) {
            let extra = p(&[pick(&mut rng, 7) as i64 - 3]);
            vars.last_mut().unwrap().insert(extra, 1)?;
        }
        if free_cumulant(&vars)?.is_zero() {
            odd_ok += 1;
        }
    }
    checks.push(check(
        "odd-degree-cumulants-vanish",
        odd_ok == cases,
        format!("{odd_ok}/{cases} odd-degree joint cumulants were exactly zero"),
    ));

    let mut disc_ok = 0u64;
    for case in 0..cases {
        // Alternate two ways of being disconnected: all bonds far from the
        // base, or a base point no bond chain can reach.
        let (b, gamma) = if case % 2 == 0 {
            let b = vec![p(&[pick(&mut rng, 5) as i64 - 2])];
            let mut gamma = Family::empty();
            for _ in 0..1 + pick(&mut rng, 3) {
                let lo = 50 + pick(&mut rng, 5) as i64;
                gamma.insert(
                    Edge::new(p(&[lo]), p(&[lo + 1]))?,
                    1 + pick(&mut rng, 2) as u32,
                )?;
            }
            (b, gamma)
        } else {
            let b = vec![p(&[0]), p(&[30 + pick(&mut rng, 5) as i64])];
            let mut gamma = Family::empty();
            for lo in 0..1 + pick(&mut rng, 3) as i64 {
                gamma.insert(
                    Edge::new(p(&[lo]), p(&[lo + 1]))?,
                    1 + pick(&mut rng, 2) as u32,
                )?;
            }
            (b, gamma)
        };
        if !connects(&b, &gamma)?
            && blockspin_core::free_field::free_semi_invariant(&b, &gamma)?.is_zero()
        {
            disc_ok += 1;
        }
    }
    checks.push(check(
        "disconnected-semi-invariants-vanish",
        disc_ok == cases,
        format!("{disc_ok}/{cases} disconnected base/family pairs were exactly zero"),
    ));
    Ok(())
}

/// The counting inequality holds on random reflexive symmetric universes
/// with bounded link degree, for random multiplicity families.
fn estimation_suite(cases: u64, seed: u64, checks: &mut Vec<CheckRow>) -> Result<()> {
    let mut rng = ChaCha12Rng::seed_from_u64(child_seed(seed, 2));
    let mut holds = 0u64;
    let mut worst_margin = f64::INFINITY;
    for _ in 0..cases {
        let l = 2 + pick(&mut rng, 9) as usize;
        let n = 1 + pick(&mut rng, 14) as usize;
        let mut adjacency: Vec<BTreeSet<usize>> = (0..n).map(|i| BTreeSet::from([i])).collect();
        for _ in 0..3 * n {
            let a = pick(&mut rng, n as u64) as usize;
            let b = pick(&mut rng, n as u64) as usize;
            if a != b
                && adjacency[a].len() < l
                && adjacency[b].len() < l
                && !adjacency[a].contains(&b)
            {
                adjacency[a].insert(b);
                adjacency[b].insert(a);
            }
        }
        let universe = LinkedUniverse::new(adjacency, l)?;
        let members = 1 + pick(&mut rng, 8) as usize;
        let pairs: Vec<(usize, u64)> = (0..members)
            .map(|_| (pick(&mut rng, n as u64) as usize, 1 + pick(&mut rng, 20)))
            .collect();
        let family = AbstractFamily::from_pairs(&pairs)?;
        let result = estimation_check(&universe, &family)?;
        if result.holds {
            holds += 1;
        }
        worst_margin = worst_margin.min(result.f - result.g);
    }
    checks.push(check(
        "counting-inequality",
        holds == cases,
        format!("{holds}/{cases} random universes satisfied it (worst margin {worst_margin:.3})"),
    ));
    Ok(())
}

/// The factorial-exponential magnitude bound holds for every enumerated
/// connecting family over small bases.
fn bounds_suite(checks: &mut Vec<CheckRow>) -> Result<()> {
    let bases: Vec<Vec<Point>> = vec![vec![p(&[0])], vec![p(&[0]), p(&[1])]];
    let mut total = 0u64;
    let mut ok = 0u64;
    for b in &bases {
        for n in 0..=5 {
            eprintln!(
                "suite bounds: base size {}, order {n}, enumerating…",
                b.len()
            );
            for gamma in enumerate_connected_with_cap(b, n, 5)? {
                total += 1;
                if bound_check_semi_invariant(b, &gamma)? {
                    ok += 1;
                }
            }
        }
    }
    checks.push(check(
        "magnitude-bound",
        ok == total && total > 0,
        format!("{ok}/{total} enumerated families satisfied the factorial-exponential bound"),
    ));
    Ok(())
}

/// Connected-family enumeration returns exactly the claimed objects: every
/// family connects the base with the right order, counts respect the
/// coordination bound, and the whole enumeration is translation invariant.
fn enumeration_suite(cases: u64, seed: u64, checks: &mut Vec<CheckRow>) -> Result<()> {
    let mut rng = ChaCha12Rng::seed_from_u64(child_seed(seed, 3));
    let (mut valid, mut bounded, mut translated) = (true, true, true);
    let mut enumerated = 0u64;
    for case in 0..cases {
        let nu = 1 + (case % 2) as u32;
        let m = 1 + pick(&mut rng, 2) as usize;
        let b: Vec<Point> = (0..m)
            .map(|_| {
                let coords: Vec<i64> = (0..nu).map(|_| pick(&mut rng, 5) as i64 - 2).collect();
                Point::new(&coords)
            })
            .collect();
        let shift_coords: Vec<i64> = (0..nu).map(|_| pick(&mut rng, 11) as i64 - 5).collect();
        let shift = Point::new(&shift_coords);
        let b_shifted: Vec<Point> = b
            .iter()
            .map(|t| t.translated(&shift))
            .collect::<Result<_, _>>()?;
        let n_top = if nu == 1 { 3 } else { 2 };
        for n in 0..=n_top {
            let families = enumerate_connected_with_cap(&b, n, n_top)?;
            enumerated += families.len() as u64;
            for gamma in &families {
                if gamma.order() != n || !connects(&b, gamma)? {
                    valid = false;
                }
            }
            let cap = u64::from(2 * nu).pow(2 * n as u32);
            if families.len() as u64 > cap {
                bounded = false;
            }
            let shifted = enumerate_connected_with_cap(&b_shifted, n, n_top)?;
            let expect: Vec<Family> = families
                .iter()
                .map(|g| g.translated(&shift))
                .collect::<Result<_, _>>()?;
            if shifted != expect {
                translated = false;
            }
        }
    }
    checks.push(check(
        "families-connect-with-exact-order",
        valid,
        format!("all {enumerated} enumerated families re-validated"),
    ));
    checks.push(check(
        "count-respects-coordination-bound",
        bounded,
        format!("counts stayed within (2ν)^(2n) on {cases} random bases"),
    ));
    checks.push(check(
        "enumeration-translation-invariant",
        translated,
        format!("shifted bases produced exactly the shifted families on {cases} bases"),
    ));
    Ok(())
}

/// Least-squares fits through exact small-volume values recover the known
/// Taylor coefficients of the one-dimensional pair semi-invariant.
fn taylor_suite(checks: &mut Vec<CheckRow>) -> Result<()> {
    eprintln!("suite taylor: fitting exact 5-site volumes…");
    let b = [p(&[0]), p(&[1])];
    let coeffs = taylor_fit_semi_invariant(1, 2, &b, 3, 0.01, 3)?;
    // The finite-volume pair semi-invariant equals tanh λ at every volume in
    // one dimension, so the low-order coefficients are 0, 1, 0, −1/3.
    let targets = [0.0, 1.0, 0.0, -1.0 / 3.0];
    let tols = [1e-9, 1e-5, 1e-9, 1e-2];
    let names = [
        "constant-coefficient",
        "linear-coefficient",
        "quadratic-coefficient",
        "cubic-coefficient",
    ];
    for i in 0..4 {
        let err = (coeffs[i] - targets[i]).abs();
        checks.push(check(
            names[i],
            err <= tols[i],
            format!(
                "fitted {:+.6e}, expected {:+.6e} (|Δ| = {err:.2e}, tolerance {:.0e})",
                coeffs[i], targets[i], tols[i]
            ),
        ));
    }
    Ok(())
}

/// Exact covariance of two normalized block averages of a one-dimensional
/// chain: pair correlations decay exactly as tanh(λ)^distance at any free
/// boundary volume, so the block statistics have closed forms at every
/// finite scale.
fn exact_block_cov(lambda: f64, k: u32, alpha: f64, tau1: i64, tau2: i64) -> f64 {
    let k_i = i64::from(k);
    let scale = f64::powf(f64::from(k), -alpha);
    let mut sum = 0.0;
    for s in tau1 * k_i..(tau1 + 1) * k_i {
        for t in tau2 * k_i..(tau2 + 1) * k_i {
            sum += pair_correlation(lambda, s.abs_diff(t));
        }
    }
    scale * sum
}

/// Monte Carlo block averages against the exact finite-scale statistics and
/// the exact limiting variance trend.
fn clt_suite(samples: u64, seed: u64, checks: &mut Vec<CheckRow>) -> Result<()> {
    let run = |lambda: f64, k: u32, taus: Vec<Point>, index: u64| -> Result<Vec<Vec<f64>>> {
        eprintln!("suite clt: sampling λ = {lambda}, k = {k} ({samples} samples)…");
        let experiment = BlockExperiment {
            nu: 1,
            half_side: 20,
            lambda,
            scale: k,
            alpha: 1.0,
            taus,
            seed: child_seed(seed, 100 + index),
            samples,
            burn_in: 500,
            thin: 4,
        };
        Ok(experiment.run()?)
    };

    // Free spins: the normalized block of 16 independent signs has mean 0
    // and variance exactly 1.
    let rows = run(0.0, 16, vec![p(&[0])], 0)?;
    let mean = joint_cumulant_estimate(&rows, &[0])?;
    let var = joint_cumulant_estimate(&rows, &[0, 0])?;
    checks.push(check(
        "free-block-mean",
        (mean.value).abs() <= 4.0 * mean.std_error,
        format!("{:+.4} ± {:.4}, expected 0", mean.value, mean.std_error),
    ));
    checks.push(check(
        "free-block-variance",
        (var.value - 1.0).abs() <= 4.0 * var.std_error,
        format!("{:.4} ± {:.4}, expected 1", var.value, var.std_error),
    ));

    // Interacting chain, scale 4: variance and neighbor covariance against
    // the exact transfer-matrix values.
    let lambda = 0.1;
    let rows = run(lambda, 4, vec![p(&[-1]), p(&[0])], 1)?;
    let var4_exact = exact_block_cov(lambda, 4, 1.0, 0, 0);
    let cov4_exact = exact_block_cov(lambda, 4, 1.0, -1, 0);
    let var4 = joint_cumulant_estimate(&rows, &[1, 1])?;
    let cov4 = joint_cumulant_estimate(&rows, &[0, 1])?;
    checks.push(check(
        "scale-4-variance-exact",
        (var4.value - var4_exact).abs() <= 4.0 * var4.std_error,
        format!(
            "{:.4} ± {:.4}, exact {var4_exact:.4}",
            var4.value, var4.std_error
        ),
    ));
    checks.push(check(
        "scale-4-neighbor-covariance-exact",
        (cov4.value - cov4_exact).abs() <= 4.0 * cov4.std_error,
        format!(
            "{:.4} ± {:.4}, exact {cov4_exact:.4}",
            cov4.value, cov4.std_error
        ),
    ));

    // Scale 16: still matches its exact value, and the exact values
    // themselves approach the limiting variance as the scale grows.
    let rows = run(lambda, 16, vec![p(&[0])], 2)?;
    let var16_exact = exact_block_cov(lambda, 16, 1.0, 0, 0);
    let var16 = joint_cumulant_estimate(&rows, &[0, 0])?;
    checks.push(check(
        "scale-16-variance-exact",
        (var16.value - var16_exact).abs() <= 4.0 * var16.std_error,
        format!(
            "{:.4} ± {:.4}, exact {var16_exact:.4}",
            var16.value, var16.std_error
        ),
    ));
    let limit = limiting_variance(lambda);
    checks.push(check(
        "variance-approaches-limit",
        (var16_exact - limit).abs() < (var4_exact - limit).abs(),
        format!(
            "|exact(16) − limit| = {:.4} < |exact(4) − limit| = {:.4} (limit {limit:.4})",
            (var16_exact - limit).abs(),
            (var4_exact - limit).abs()
        ),
    ));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_block_cov_matches_hand_sum() {
        // k = 2, block 0 = {0, 1}: variance = (2 + 2·tanh λ)/2.
        let lambda = 0.3_f64;
        let t = lambda.tanh();
        let v = exact_block_cov(lambda, 2, 1.0, 0, 0);
        assert!((v - (1.0 + t)).abs() < 1e-15);
        // Blocks {−2,−1} and {0,1}: distances 1, 2, 2, 3.
        let c = exact_block_cov(lambda, 2, 1.0, -1, 0);
        assert!((c - (t + 2.0 * t * t + t * t * t) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn fast_suites_pass_end_to_end() {
        for suite in [
            Suite::Parity,
            Suite::Estimation,
            Suite::Bounds,
            Suite::Enumeration,
            Suite::Taylor,
        ] {
            let cases = match suite {
                Suite::Parity | Suite::Estimation => 50,
                Suite::Enumeration => 4,
                _ => 1,
            };
            let report = run_suite(suite, cases, 0).unwrap();
            assert!(report.passed, "suite {} failed: {report:?}", suite.name());
        }
    }
}
