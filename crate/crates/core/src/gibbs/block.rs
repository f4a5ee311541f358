//! The block-averaging (coarse-graining) transform: for a block site τ and
//! scale k, the normalized block sum
//!
//! Y_τ = k^{−α/2} · Σ_{t ∈ G_k⁻¹(τ)} ω(t)
//!
//! over the k^ν sites of the block, with normalization exponent α. α = ν is
//! the central-limit normalization; larger α damps the sum.

use super::{GibbsError, SpinConfig};
use crate::lattice::{block_preimage, Cube, Point};
use alloc::vec::Vec;

/// Precomputed site indices for evaluating block observables on spin
/// configurations of one fixed cube.
#[derive(Clone, Debug)]
pub struct BlockPlan {
    scale: f64,
    blocks: Vec<Vec<u32>>,
}

impl BlockPlan {
    /// Plans the blocks G_k⁻¹(τ) for each τ in `taus` inside `cube`.
    /// Every block must lie entirely inside the cube.
    pub fn new(cube: &Cube, k: u32, alpha: f64, taus: &[Point]) -> Result<BlockPlan, GibbsError> {
        if k == 0 {
            return Err(GibbsError::InvalidParameter("block scale must be >= 1"));
        }
        if !alpha.is_finite() {
            return Err(GibbsError::InvalidParameter("normalization exponent must be finite"));
        }
        let mut blocks = Vec::with_capacity(taus.len());
        for tau in taus {
            if tau.dim() != cube.nu() as usize {
                return Err(GibbsError::InvalidParameter("block site has wrong dimension"));
            }
            let sites = block_preimage(tau, k)?;
            let mut indices = Vec::with_capacity(sites.len());
            for t in sites {
                match cube.index_of(&t) {
                    Some(i) => indices.push(i as u32),
                    None => return Err(GibbsError::BlockOutsideVolume(tau.clone())),
                }
            }
            blocks.push(indices);
        }
        Ok(BlockPlan {
            scale: libm::pow(f64::from(k), -alpha / 2.0),
            blocks,
        })
    }

    /// Number of planned blocks.
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Evaluates every planned block observable on a configuration, in the
    /// order the block sites were given.
    pub fn evaluate(&self, config: &SpinConfig) -> Vec<f64> {
        self.blocks
            .iter()
            .map(|indices| {
                let sum: i64 = indices
                    .iter()
                    .map(|&i| i64::from(config.spin(i as usize)))
                    .sum();
                self.scale * sum as f64
            })
            .collect()
    }
}
