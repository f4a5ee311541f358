//! Single-site Metropolis dynamics for the finite-volume Gibbs measure, with
//! a named, seedable, splittable random stream so that every experiment is
//! exactly reproducible.

use super::{GibbsError, GibbsSpec, SpinConfig};
use alloc::vec::Vec;
use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

/// Derives an independent child seed from a master seed, splitmix64-style;
/// index 0, 1, … give decorrelated streams for parallel or sequential chains.
pub fn child_seed(master: u64, index: u64) -> u64 {
    let state = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut z = state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A random-scan Metropolis sampler for one Gibbs ensemble.
///
/// Each sweep makes one proposal per site, each at a uniformly random site;
/// a flip changing the energy by ΔU is accepted with probability
/// min(1, e^{−ΔU}) where ΔU = 2λ·ω(i)·Σ_{j∼i} ω(j). Sites must be chosen at
/// random rather than swept in order: at λ = 0 every proposal is accepted,
/// so a deterministic scan would make each sweep the exact global flip and
/// freeze the chain on a 2-cycle. Exactly one site draw and one uniform
/// variate are consumed per proposal, so the random stream consumption is
/// fixed and runs are bit-reproducible.
pub struct MetropolisSampler {
    lambda: f64,
    neighbors: Vec<Vec<u32>>,
    config: SpinConfig,
    rng: ChaCha12Rng,
    sweeps_done: u64,
}

impl MetropolisSampler {
    /// A sampler started from the all-up configuration with its own
    /// deterministic stream.
    pub fn new(spec: &GibbsSpec, seed: u64) -> MetropolisSampler {
        MetropolisSampler {
            lambda: spec.lambda(),
            neighbors: spec.neighbor_table(),
            config: SpinConfig::all_up(spec.cube().len()),
            rng: ChaCha12Rng::seed_from_u64(seed),
            sweeps_done: 0,
        }
    }

    pub fn config(&self) -> &SpinConfig {
        &self.config
    }

    pub fn sweeps_done(&self) -> u64 {
        self.sweeps_done
    }

    /// One full sweep: as many Metropolis proposals as there are sites, each
    /// at a uniformly random site.
    pub fn sweep(&mut self) {
        let len = self.config.len() as u64;
        for _ in 0..len {
            let i = (self.rng.next_u64() % len) as usize;
            let spin = f64::from(self.config.spin(i));
            let neighbor_sum: i32 = self.neighbors[i]
                .iter()
                .map(|&j| i32::from(self.config.spin(j as usize)))
                .sum();
            let delta_u = 2.0 * self.lambda * spin * f64::from(neighbor_sum);
            let u = uniform_unit(&mut self.rng);
            if u < libm::exp(-delta_u) {
                self.config.flip(i);
            }
        }
        self.sweeps_done += 1;
    }

    /// Runs `burn_in` discarded sweeps, then emits `samples` configurations
    /// spaced `thin` sweeps apart (thin ≥ 1).
    pub fn run<F: FnMut(&SpinConfig)>(
        &mut self,
        burn_in: u64,
        thin: u64,
        samples: u64,
        mut emit: F,
    ) -> Result<(), GibbsError> {
        if thin == 0 {
            return Err(GibbsError::InvalidParameter("thinning stride must be >= 1"));
        }
        for _ in 0..burn_in {
            self.sweep();
        }
        for _ in 0..samples {
            for _ in 0..thin {
                self.sweep();
            }
            emit(&self.config);
        }
        Ok(())
    }
}

/// A uniform variate in [0, 1) with 53 random bits.
fn uniform_unit(rng: &mut ChaCha12Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
}
