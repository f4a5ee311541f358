//! The free (uncoupled) spin measure: every site carries an independent fair
//! ±1 spin. Moments obey a parity rule — E(∏ ω(t)^{n_t}) is 1 when every
//! multiplicity n_t is even and 0 otherwise — so joint semi-invariants of
//! spin and bond observables are exact integers, computed here without any
//! floating point.

use crate::cumulant::{cumulant, CumulantError, Subset};
use crate::family::{Family, FamilyError};
use crate::lattice::{Edge, LatticeError, Point};
use crate::Rational;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;
use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Errors from free-measure evaluation.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum FreeFieldError {
    Lattice(LatticeError),
    Cumulant(CumulantError),
    Family(FamilyError),
    /// A multiplicity of zero was supplied.
    ZeroMultiplicity,
    /// Points of different dimensions were mixed.
    MixedDimension,
    /// The variables touch more distinct sites than the parity masks hold.
    TooManySites { count: usize, cap: usize },
}

impl fmt::Display for FreeFieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FreeFieldError::Lattice(e) => write!(f, "{e}"),
            FreeFieldError::Cumulant(e) => write!(f, "{e}"),
            FreeFieldError::Family(e) => write!(f, "{e}"),
            FreeFieldError::ZeroMultiplicity => write!(f, "site multiplicities must be >= 1"),
            FreeFieldError::MixedDimension => write!(f, "mixed lattice dimensions"),
            FreeFieldError::TooManySites { count, cap } => {
                write!(f, "{count} distinct sites exceed the parity-mask capacity {cap}")
            }
        }
    }
}

impl core::error::Error for FreeFieldError {}

impl From<LatticeError> for FreeFieldError {
    fn from(e: LatticeError) -> FreeFieldError {
        FreeFieldError::Lattice(e)
    }
}

impl From<CumulantError> for FreeFieldError {
    fn from(e: CumulantError) -> FreeFieldError {
        FreeFieldError::Cumulant(e)
    }
}

impl From<FamilyError> for FreeFieldError {
    fn from(e: FamilyError) -> FreeFieldError {
        FreeFieldError::Family(e)
    }
}

/// A monomial in the spin variables: finitely many sites with multiplicities
/// ≥ 1, representing ∏ ω(t)^{n_t}.
///
/// Products of spins (Q_t) and bond observables (Φ_{rs} = ω(r)ω(s)) are all
/// monomials of this form.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Default)]
pub struct PointMultiset {
    entries: BTreeMap<Point, u32>,
}

impl PointMultiset {
    /// The empty monomial (the constant 1).
    pub fn empty() -> PointMultiset {
        PointMultiset::default()
    }

    /// The single-spin observable Q_t.
    pub fn spin(t: Point) -> PointMultiset {
        let mut entries = BTreeMap::new();
        entries.insert(t, 1);
        PointMultiset { entries }
    }

    /// The bond observable Φ_e = ω(r)ω(s) for e = {r, s}.
    pub fn bond(e: &Edge) -> PointMultiset {
        let (lo, hi) = e.endpoints();
        let mut entries = BTreeMap::new();
        entries.insert(lo.clone(), 1);
        entries.insert(hi.clone(), 1);
        PointMultiset { entries }
    }

    /// Builds a monomial from (site, multiplicity) pairs; duplicate sites
    /// have their multiplicities added.
    pub fn from_pairs<I: IntoIterator<Item = (Point, u32)>>(
        pairs: I,
    ) -> Result<PointMultiset, FreeFieldError> {
        let mut ms = PointMultiset::empty();
        for (t, mult) in pairs {
            ms.insert(t, mult)?;
        }
        Ok(ms)
    }

    /// The product Q_{t₁} ⋯ Q_{t_m} of the listed sites (repeats allowed).
    pub fn from_points(points: &[Point]) -> Result<PointMultiset, FreeFieldError> {
        PointMultiset::from_pairs(points.iter().map(|t| (t.clone(), 1)))
    }

    /// Multiplies by ω(t)^mult.
    pub fn insert(&mut self, t: Point, mult: u32) -> Result<(), FreeFieldError> {
        if mult == 0 {
            return Err(FreeFieldError::ZeroMultiplicity);
        }
        if let Some((first, _)) = self.entries.iter().next() {
            if first.dim() != t.dim() {
                return Err(FreeFieldError::MixedDimension);
            }
        }
        *self.entries.entry(t).or_insert(0) += mult;
        Ok(())
    }

    /// Sites with multiplicities, in canonical order.
    pub fn entries(&self) -> impl Iterator<Item = (&Point, u32)> {
        self.entries.iter().map(|(t, &m)| (t, m))
    }

    /// Total degree Σ n_t.
    pub fn degree(&self) -> u64 {
        self.entries.values().map(|&m| u64::from(m)).sum()
    }

    pub fn distinct_len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.entries.keys().next().map(Point::dim)
    }

    /// The product of two monomials (multiplicities add).
    pub fn merged(&self, other: &PointMultiset) -> Result<PointMultiset, FreeFieldError> {
        let mut out = self.clone();
        for (t, m) in other.entries() {
            out.insert(t.clone(), m)?;
        }
        Ok(out)
    }

    /// Sites of odd multiplicity. Since ω(t)² = 1, the monomial reduces to
    /// the product over exactly these sites.
    pub fn odd_sites(&self) -> impl Iterator<Item = &Point> {
        self.entries
            .iter()
            .filter(|(_, &m)| m % 2 == 1)
            .map(|(t, _)| t)
    }

    /// Whether every multiplicity is even.
    pub fn all_even(&self) -> bool {
        self.entries.values().all(|&m| m % 2 == 0)
    }

    /// Translates every site by `shift`.
    pub fn translated(&self, shift: &Point) -> Result<PointMultiset, FreeFieldError> {
        PointMultiset::from_pairs(
            self.entries()
                .map(|(t, m)| Ok::<_, FreeFieldError>((t.translated(shift)?, m)))
                .collect::<Result<Vec<_>, _>>()?,
        )
    }
}

/// The free-measure moment E₀(∏ ω(t)^{n_t}): exactly 1 when every
/// multiplicity is even (the monomial is identically 1), exactly 0 otherwise
/// (any odd site averages out by symmetry). The empty monomial has moment 1.
pub fn free_moment(ms: &PointMultiset) -> Rational {
    if ms.all_even() {
        Rational::one()
    } else {
        Rational::zero()
    }
}

/// The joint semi-invariant ⟨M₁, …, M_m⟩₀ of spin monomials under the free
/// measure, as an exact rational (always an integer).
///
/// Internally each variable becomes the parity mask of its odd-multiplicity
/// sites; a subset of variables has moment 1 exactly when the XOR of its
/// masks is zero, and the partition sum runs in exact i128 arithmetic.
pub fn free_cumulant(vars: &[PointMultiset]) -> Result<Rational, FreeFieldError> {
    let m = vars.len();
    if m == 0 {
        return Err(FreeFieldError::Cumulant(CumulantError::OrderZero));
    }
    // Consistent dimensions across all variables (empty monomials are
    // dimensionless and compatible with everything).
    let mut dim = None;
    for v in vars {
        match (dim, v.dim()) {
            (None, d) => dim = d,
            (Some(a), Some(b)) if a != b => return Err(FreeFieldError::MixedDimension),
            _ => {}
        }
    }
    // Index the distinct odd sites across all variables.
    let mut site_bits: BTreeMap<&Point, u32> = BTreeMap::new();
    for v in vars {
        for t in v.odd_sites() {
            let next = site_bits.len() as u32;
            site_bits.entry(t).or_insert(next);
        }
    }
    const MASK_BITS: usize = 128;
    if site_bits.len() > MASK_BITS {
        return Err(FreeFieldError::TooManySites {
            count: site_bits.len(),
            cap: MASK_BITS,
        });
    }
    let masks: Vec<u128> = vars
        .iter()
        .map(|v| {
            v.odd_sites()
                .map(|t| 1u128 << site_bits[t])
                .fold(0u128, |acc, bit| acc ^ bit)
        })
        .collect();
    // xor_of[s] = XOR of the masks of the variables in subset s.
    let mut xor_of = alloc::vec![0u128; 1usize << m];
    for s in 1..(1usize << m) {
        let low = s.trailing_zeros() as usize;
        xor_of[s] = xor_of[s & (s - 1)] ^ masks[low];
    }
    let value = cumulant(m, |s: Subset| {
        if xor_of[s.bits() as usize] == 0 {
            1i128
        } else {
            0
        }
    })?;
    Ok(Rational::from_integer(BigInt::from(value)))
}

/// The mixed semi-invariant ⟨Q_{t₁}, …, Q_{t_m}, Φ_{e₁}, …, Φ_{e_n}⟩₀ of the
/// base spins of `b` and the |γ| bond observables of `gamma` (each bond
/// repeated by multiplicity), under the free measure.
///
/// This is the building block of every cluster-expansion coefficient. At
/// least one variable must be present.
pub fn free_semi_invariant(b: &[Point], gamma: &Family) -> Result<Rational, FreeFieldError> {
    let mut vars: Vec<PointMultiset> = Vec::with_capacity(b.len() + gamma.order() as usize);
    for t in b {
        vars.push(PointMultiset::spin(t.clone()));
    }
    for e in gamma.expanded_bonds() {
        vars.push(PointMultiset::bond(e));
    }
    free_cumulant(&vars)
}
