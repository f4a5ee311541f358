//! Finite-volume Gibbs measures of the nearest-neighbour ferromagnet on a
//! centred cube with free boundary: exact expectations by full enumeration
//! in small volumes, a 1-D transfer-matrix oracle, Metropolis sampling,
//! the block-averaging transform, and empirical cumulant estimation.
//!
//! The interaction is U(ω) = −λ Σ_{bonds {r,s} ⊂ Λ_N} ω(r)ω(s) and the
//! measure weights each configuration by e^{−U}/Ξ.

pub mod block;
pub mod empirical;
pub mod experiment;
pub mod metropolis;
pub mod transfer;

use crate::cumulant::{cumulant, CumulantError, Subset};
use crate::free_field::{FreeFieldError, PointMultiset};
use crate::lattice::{Cube, LatticeError, Point};
use alloc::vec::Vec;
use core::fmt;

/// Ceiling on exact enumeration: 2^25 configurations is the largest volume
/// walked exhaustively.
pub const EXACT_SITE_CAP: usize = 25;

/// Errors from Gibbs-measure computations.
#[derive(Clone, PartialEq, Debug)]
pub enum GibbsError {
    Lattice(LatticeError),
    FreeField(FreeFieldError),
    Cumulant(CumulantError),
    /// Exact enumeration refused: too many sites.
    VolumeTooLarge { sites: usize, cap: usize },
    /// An observable touches a site outside the volume.
    PointOutsideVolume(Point),
    /// A requested block does not fit inside the volume.
    BlockOutsideVolume(Point),
    /// A scalar parameter was out of range.
    InvalidParameter(&'static str),
}

impl fmt::Display for GibbsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GibbsError::Lattice(e) => write!(f, "{e}"),
            GibbsError::FreeField(e) => write!(f, "{e}"),
            GibbsError::Cumulant(e) => write!(f, "{e}"),
            GibbsError::VolumeTooLarge { sites, cap } => {
                write!(f, "{sites} sites exceed the exact-enumeration cap {cap}")
            }
            GibbsError::PointOutsideVolume(t) => write!(f, "site {t} lies outside the volume"),
            GibbsError::BlockOutsideVolume(t) => write!(f, "block {t} leaves the volume"),
            GibbsError::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
        }
    }
}

impl core::error::Error for GibbsError {}

impl From<LatticeError> for GibbsError {
    fn from(e: LatticeError) -> GibbsError {
        GibbsError::Lattice(e)
    }
}

impl From<FreeFieldError> for GibbsError {
    fn from(e: FreeFieldError) -> GibbsError {
        GibbsError::FreeField(e)
    }
}

impl From<CumulantError> for GibbsError {
    fn from(e: CumulantError) -> GibbsError {
        GibbsError::Cumulant(e)
    }
}

/// A finite-volume Gibbs ensemble: the cube Λ_N in dimension ν with coupling
/// λ and free boundary conditions.
#[derive(Clone, PartialEq, Debug)]
pub struct GibbsSpec {
    cube: Cube,
    lambda: f64,
}

impl GibbsSpec {
    /// ν ≥ 1, N ≥ 1, λ finite.
    pub fn new(nu: u32, half_side: u32, lambda: f64) -> Result<GibbsSpec, GibbsError> {
        if half_side == 0 {
            return Err(GibbsError::InvalidParameter("half-side must be >= 1"));
        }
        if !lambda.is_finite() {
            return Err(GibbsError::InvalidParameter("coupling must be finite"));
        }
        Ok(GibbsSpec {
            cube: Cube::new(nu, half_side)?,
            lambda,
        })
    }

    pub fn cube(&self) -> &Cube {
        &self.cube
    }

    pub fn nu(&self) -> u32 {
        self.cube.nu()
    }

    pub fn half_side(&self) -> u32 {
        self.cube.half_side()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// The nearest-neighbour bonds inside the volume, as site-index pairs.
    /// Free boundary: bonds crossing the surface simply do not exist.
    pub fn bonds(&self) -> Vec<(u32, u32)> {
        let mut bonds = Vec::new();
        for (i, t) in self.cube.points().into_iter().enumerate() {
            // Only look in the +axis directions so each bond appears once.
            for axis in 0..t.dim() {
                let mut coords = t.coords().to_vec();
                coords[axis] += 1; // stays far from i64 range inside a cube
                if let Some(j) = self.cube.index_of(&Point(coords)) {
                    bonds.push((i as u32, j as u32));
                }
            }
        }
        bonds
    }

    /// For each site, the indices of its neighbours inside the volume.
    pub fn neighbor_table(&self) -> Vec<Vec<u32>> {
        let mut table = alloc::vec![Vec::new(); self.cube.len()];
        for (i, j) in self.bonds() {
            table[i as usize].push(j);
            table[j as usize].push(i);
        }
        table
    }
}

/// A ±1 spin assignment on the sites of a cube, packed one bit per site
/// (bit set ⇔ spin −1; the all-up state is all zero bits).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SpinConfig {
    len: usize,
    words: Vec<u64>,
}

impl SpinConfig {
    /// All spins +1.
    pub fn all_up(len: usize) -> SpinConfig {
        SpinConfig {
            len,
            words: alloc::vec![0; len.div_ceil(64)],
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// The spin at site index `i`: +1 or −1.
    pub fn spin(&self, i: usize) -> i8 {
        debug_assert!(i < self.len);
        if self.words[i >> 6] >> (i & 63) & 1 == 0 {
            1
        } else {
            -1
        }
    }

    /// Reverses the spin at site index `i`.
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i >> 6] ^= 1u64 << (i & 63);
    }

    /// Raw packed words (for cheap equality and hashing in tests).
    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

/// The interaction energy U(ω) = −λ Σ_{bonds} ω(r)ω(s) of a configuration.
pub fn energy(spec: &GibbsSpec, config: &SpinConfig) -> Result<f64, GibbsError> {
    if config.len() != spec.cube.len() {
        return Err(GibbsError::InvalidParameter(
            "configuration size does not match the volume",
        ));
    }
    let mut bond_sum = 0i64;
    for (i, j) in spec.bonds() {
        bond_sum += i64::from(config.spin(i as usize) * config.spin(j as usize));
    }
    Ok(-spec.lambda * bond_sum as f64)
}

/// Exact Gibbs expectation E_{λ,N}(∏ ω(t)^{n_t}) by full enumeration over
/// all 2^{sites} configurations (Gray-code walk with incremental energy).
///
/// Every site of the monomial must lie inside the volume, and the volume must
/// have at most [`EXACT_SITE_CAP`] sites.
pub fn exact_moment(spec: &GibbsSpec, observable: &PointMultiset) -> Result<f64, GibbsError> {
    let sites = spec.cube.len();
    if sites > EXACT_SITE_CAP {
        return Err(GibbsError::VolumeTooLarge {
            sites,
            cap: EXACT_SITE_CAP,
        });
    }
    // Only odd-multiplicity sites matter, since ω(t)² = 1.
    let mut odd_mask = alloc::vec![false; sites];
    for (t, _) in observable.entries() {
        if !spec.cube.contains(t) {
            return Err(GibbsError::PointOutsideVolume(t.clone()));
        }
    }
    for t in observable.odd_sites() {
        odd_mask[spec.cube.index_of(t).expect("checked above")] = true;
    }

    let bonds = spec.bonds();
    let neighbors = spec.neighbor_table();
    // Bond sum Σ ω(r)ω(s) is an integer in [−B, B]; precompute all weights.
    let b = bonds.len() as i64;
    let weight: Vec<f64> = (-b..=b).map(|e| libm::exp(spec.lambda * e as f64)).collect();
    let w = |bond_sum: i64| weight[(bond_sum + b) as usize];

    let mut spins = alloc::vec![1i8; sites];
    let mut bond_sum = b; // all-up state
    let mut sign = 1i8; // ∏ over odd sites (all +1 initially)
    let mut numerator = 0.0f64;
    let mut partition = 0.0f64;
    numerator += w(bond_sum);
    partition += w(bond_sum);
    // Gray-code walk: step g flips the site indexed by the lowest set bit of g.
    for g in 1u64..(1u64 << sites) {
        let i = g.trailing_zeros() as usize;
        let s = i64::from(spins[i]);
        let neighbor_sum: i64 = neighbors[i].iter().map(|&j| i64::from(spins[j as usize])).sum();
        bond_sum -= 2 * s * neighbor_sum;
        spins[i] = -spins[i];
        if odd_mask[i] {
            sign = -sign;
        }
        let wt = w(bond_sum);
        partition += wt;
        numerator += f64::from(sign) * wt;
    }
    Ok(numerator / partition)
}

/// Exact finite-volume joint semi-invariant ⟨Q_{t₁}, …, Q_{t_m}⟩_{λ,N} by the
/// partition sum over exact moments (one enumeration per index subset).
pub fn exact_semi_invariant(spec: &GibbsSpec, b: &[Point]) -> Result<f64, GibbsError> {
    // Surface input errors eagerly (the cumulant oracle cannot return them).
    let sites = spec.cube.len();
    if sites > EXACT_SITE_CAP {
        return Err(GibbsError::VolumeTooLarge {
            sites,
            cap: EXACT_SITE_CAP,
        });
    }
    for t in b {
        if !spec.cube.contains(t) {
            return Err(GibbsError::PointOutsideVolume(t.clone()));
        }
    }
    cumulant(b.len(), |s: Subset| {
        let points: Vec<Point> = s.iter().map(|i| b[i].clone()).collect();
        let observable = PointMultiset::from_points(&points).expect("points are valid");
        exact_moment(spec, &observable).expect("inputs were validated above")
    })
    .map_err(GibbsError::Cumulant)
}
