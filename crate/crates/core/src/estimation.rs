//! A counting inequality for families over a link-bounded universe, and the
//! derived magnitude bound on free semi-invariants of spin/bond observables.
//!
//! The universe is a finite set with a reflexive, symmetric link relation in
//! which no element is linked to more than `L` others (itself included). For
//! any family of distinct elements Tᵢ with multiplicities nᵢ ≥ 1, writing
//! υᵢ = Σ_{j linked to i} n_j, the inequality
//!
//!   (ln L + L²)·Σ nᵢ + Σ nᵢ ln nᵢ > Σ nᵢ ln υᵢ
//!
//! holds strictly. Both sides are evaluated here in double precision so the
//! check can run over large randomized batches.

use crate::family::{Family, FamilyError};
use crate::free_field::{free_semi_invariant, FreeFieldError};
use crate::lattice::Point;
use crate::series::{constants, SeriesError};
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;
use num_traits::{Signed, ToPrimitive, Zero};

/// Errors from universe construction and inequality checks.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum EstimationError {
    /// Every element must be linked to itself.
    NotReflexive { element: usize },
    /// Links must be symmetric.
    NotSymmetric { from: usize, to: usize },
    /// An adjacency entry points outside the universe.
    LinkOutOfRange { from: usize, to: usize },
    /// An element exceeds the per-element link bound.
    DegreeTooHigh {
        element: usize,
        degree: usize,
        bound: usize,
    },
    /// The link bound must be at least 1.
    ZeroLinkBound,
    /// A family element is not an element of the universe.
    UnknownElement { element: usize },
    /// Family multiplicities must be ≥ 1.
    ZeroMultiplicity { element: usize },
    /// The inequality is stated for nonempty families.
    EmptyFamily,
    /// Propagated from the free-measure evaluation.
    FreeField(FreeFieldError),
    /// Propagated from family validation.
    Family(FamilyError),
    /// Propagated from the expansion-constant table.
    Series(SeriesError),
}

impl fmt::Display for EstimationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimationError::NotReflexive { element } => {
                write!(f, "element {element} is not linked to itself")
            }
            EstimationError::NotSymmetric { from, to } => {
                write!(f, "link {from} → {to} has no reverse link")
            }
            EstimationError::LinkOutOfRange { from, to } => {
                write!(f, "link {from} → {to} leaves the universe")
            }
            EstimationError::DegreeTooHigh {
                element,
                degree,
                bound,
            } => write!(
                f,
                "element {element} is linked to {degree} elements, bound is {bound}"
            ),
            EstimationError::ZeroLinkBound => write!(f, "link bound must be >= 1"),
            EstimationError::UnknownElement { element } => {
                write!(f, "family element {element} is not in the universe")
            }
            EstimationError::ZeroMultiplicity { element } => {
                write!(f, "family element {element} has multiplicity 0")
            }
            EstimationError::EmptyFamily => write!(f, "family must be nonempty"),
            EstimationError::FreeField(e) => write!(f, "free-measure evaluation: {e}"),
            EstimationError::Family(e) => write!(f, "family: {e}"),
            EstimationError::Series(e) => write!(f, "expansion constants: {e}"),
        }
    }
}

impl core::error::Error for EstimationError {}

impl From<FreeFieldError> for EstimationError {
    fn from(e: FreeFieldError) -> EstimationError {
        EstimationError::FreeField(e)
    }
}

impl From<FamilyError> for EstimationError {
    fn from(e: FamilyError) -> EstimationError {
        EstimationError::Family(e)
    }
}

impl From<SeriesError> for EstimationError {
    fn from(e: SeriesError) -> EstimationError {
        EstimationError::Series(e)
    }
}

/// A finite set {0, …, n−1} with a validated reflexive symmetric link
/// relation of degree at most `link_bound` (self-links included).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LinkedUniverse {
    adjacency: Vec<BTreeSet<usize>>,
    link_bound: usize,
}

impl LinkedUniverse {
    /// Validates reflexivity, symmetry, range, and the degree bound.
    pub fn new(
        adjacency: Vec<BTreeSet<usize>>,
        link_bound: usize,
    ) -> Result<LinkedUniverse, EstimationError> {
        if link_bound == 0 {
            return Err(EstimationError::ZeroLinkBound);
        }
        let n = adjacency.len();
        for (i, links) in adjacency.iter().enumerate() {
            if !links.contains(&i) {
                return Err(EstimationError::NotReflexive { element: i });
            }
            if links.len() > link_bound {
                return Err(EstimationError::DegreeTooHigh {
                    element: i,
                    degree: links.len(),
                    bound: link_bound,
                });
            }
            for &j in links {
                if j >= n {
                    return Err(EstimationError::LinkOutOfRange { from: i, to: j });
                }
                if !adjacency[j].contains(&i) {
                    return Err(EstimationError::NotSymmetric { from: i, to: j });
                }
            }
        }
        Ok(LinkedUniverse {
            adjacency,
            link_bound,
        })
    }

    /// Number of elements.
    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    /// Whether the universe has no elements.
    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    /// The per-element link bound L.
    pub fn link_bound(&self) -> usize {
        self.link_bound
    }

    /// Elements linked to `element` (always contains `element` itself).
    pub fn links(&self, element: usize) -> Option<&BTreeSet<usize>> {
        self.adjacency.get(element)
    }
}

/// A family of universe elements with positive multiplicities.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct AbstractFamily {
    entries: BTreeMap<usize, u64>,
}

impl AbstractFamily {
    /// Builds a family; repeated elements accumulate multiplicity.
    pub fn from_pairs(pairs: &[(usize, u64)]) -> Result<AbstractFamily, EstimationError> {
        let mut entries = BTreeMap::new();
        for &(element, multiplicity) in pairs {
            if multiplicity == 0 {
                return Err(EstimationError::ZeroMultiplicity { element });
            }
            *entries.entry(element).or_insert(0) += multiplicity;
        }
        Ok(AbstractFamily { entries })
    }

    /// The (element, multiplicity) pairs in element order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.entries.iter().map(|(&e, &n)| (e, n))
    }

    /// Number of distinct elements.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Whether the family has no entries.
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Multiplicity of one element, 0 if absent.
    pub fn multiplicity(&self, element: usize) -> u64 {
        self.entries.get(&element).copied().unwrap_or(0)
    }
}

/// υ(element): the multiplicity of the family entries linked to `element`,
/// including the element's own multiplicity (the relation is reflexive).
pub fn upsilon(
    universe: &LinkedUniverse,
    family: &AbstractFamily,
    element: usize,
) -> Result<u64, EstimationError> {
    if family.multiplicity(element) == 0 {
        return Err(EstimationError::UnknownElement { element });
    }
    let links = universe
        .links(element)
        .ok_or(EstimationError::UnknownElement { element })?;
    Ok(family
        .entries()
        .filter(|(e, _)| links.contains(e))
        .map(|(_, n)| n)
        .sum())
}

/// Both sides of the counting inequality and its verdict.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct EstimationCheck {
    /// Left side: (ln L + L²)·Σ nᵢ + Σ nᵢ ln nᵢ.
    pub f: f64,
    /// Right side: Σ nᵢ ln υᵢ.
    pub g: f64,
    /// Whether f > g, up to 10⁻⁹ relative rounding slack.
    pub holds: bool,
}

/// Evaluates the inequality for one family over one universe.
pub fn estimation_check(
    universe: &LinkedUniverse,
    family: &AbstractFamily,
) -> Result<EstimationCheck, EstimationError> {
    if family.is_empty() {
        return Err(EstimationError::EmptyFamily);
    }
    for (element, _) in family.entries() {
        if universe.links(element).is_none() {
            return Err(EstimationError::UnknownElement { element });
        }
    }
    let l = universe.link_bound() as f64;
    let c_l = libm::log(l) + l * l;
    let mut f = 0.0;
    let mut g = 0.0;
    for (element, n) in family.entries() {
        let n_f = n as f64;
        f += c_l * n_f + n_f * libm::log(n_f);
        let u = upsilon(universe, family, element)? as f64;
        g += n_f * libm::log(u);
    }
    let slack = 1e-9 * libm::fmax(1.0, libm::fabs(f));
    Ok(EstimationCheck {
        f,
        g,
        holds: f - g > -slack,
    })
}

/// Natural log of n! by direct summation (orders here are small).
fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|k| libm::log(k as f64)).sum()
}

/// Checks the magnitude bound |⟨ω over b, bond excess over γ⟩₀| ≤
/// C₃^{m+|γ|} · m! · γ! in log space. Zero values satisfy it trivially.
pub fn bound_check_semi_invariant(b: &[Point], gamma: &Family) -> Result<bool, EstimationError> {
    let value = free_semi_invariant(b, gamma)?;
    if value.is_zero() {
        return Ok(true);
    }
    let nu = b
        .first()
        .map(|p| p.dim() as u32)
        .ok_or(EstimationError::EmptyFamily)?;
    let consts = constants(nu)?;
    let m = b.len() as f64;
    let order = gamma.order() as f64;
    let mut ln_bound = (m + order) * consts.ln_c3 + ln_factorial(b.len() as u64);
    for (_, multiplicity) in gamma.entries() {
        ln_bound += ln_factorial(u64::from(multiplicity));
    }
    let ln_value = libm::log(rational_abs_f64(&value));
    Ok(ln_value <= ln_bound + 1e-9 * libm::fmax(1.0, libm::fabs(ln_bound)))
}

fn rational_abs_f64(r: &crate::Rational) -> f64 {
    r.abs().to_f64().unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::enumerate_connected;
    use proptest::prelude::*;

    fn universe_from_edges(n: usize, edges: &[(usize, usize)], l: usize) -> LinkedUniverse {
        let mut adjacency: Vec<BTreeSet<usize>> =
            (0..n).map(|i| BTreeSet::from([i])).collect();
        for &(a, b) in edges {
            adjacency[a].insert(b);
            adjacency[b].insert(a);
        }
        LinkedUniverse::new(adjacency, l).unwrap()
    }

    #[test]
    fn upsilon_examples() {
        // Singleton with only the self-link.
        let u = universe_from_edges(1, &[], 1);
        let f1 = AbstractFamily::from_pairs(&[(0, 1)]).unwrap();
        assert_eq!(upsilon(&u, &f1, 0).unwrap(), 1);
        let f3 = AbstractFamily::from_pairs(&[(0, 3)]).unwrap();
        assert_eq!(upsilon(&u, &f3, 0).unwrap(), 3);
        // Two mutually linked elements with multiplicities 2 and 5.
        let u2 = universe_from_edges(2, &[(0, 1)], 2);
        let f = AbstractFamily::from_pairs(&[(0, 2), (1, 5)]).unwrap();
        assert_eq!(upsilon(&u2, &f, 0).unwrap(), 7);
        assert_eq!(upsilon(&u2, &f, 1).unwrap(), 7);
        // Unlinked third element does not contribute.
        let u3 = universe_from_edges(3, &[(0, 1)], 2);
        let f = AbstractFamily::from_pairs(&[(0, 2), (1, 5), (2, 11)]).unwrap();
        assert_eq!(upsilon(&u3, &f, 0).unwrap(), 7);
        assert_eq!(upsilon(&u3, &f, 2).unwrap(), 11);
    }

    #[test]
    fn singleton_check_is_the_constant() {
        let u = universe_from_edges(1, &[], 4);
        let fam = AbstractFamily::from_pairs(&[(0, 1)]).unwrap();
        let check = estimation_check(&u, &fam).unwrap();
        // f = ln L + L² with n = 1, g = 1·ln 1 = 0.
        assert!((check.f - (libm::log(4.0) + 16.0)).abs() < 1e-12);
        assert_eq!(check.g, 0.0);
        assert!(check.holds);
    }

    #[test]
    fn unit_multiplicities_hold_with_wide_margin() {
        // A path of 6 elements, all multiplicities 1: g ≤ m ln L ≪ f = m C_L.
        let edges: Vec<(usize, usize)> = (0..5).map(|i| (i, i + 1)).collect();
        let u = universe_from_edges(6, &edges, 3);
        let fam =
            AbstractFamily::from_pairs(&(0..6).map(|i| (i, 1)).collect::<Vec<_>>()).unwrap();
        let check = estimation_check(&u, &fam).unwrap();
        assert!(check.holds);
        assert!(check.g <= 6.0 * libm::log(3.0) + 1e-12);
        assert!(check.f > check.g + 6.0 * 9.0 - 6.0);
    }

    #[test]
    fn invalid_universes_are_rejected()  {
        // Missing self-link.
        let adjacency = alloc::vec![BTreeSet::from([1usize]), BTreeSet::from([0usize, 1])];
        assert_eq!(
            LinkedUniverse::new(adjacency, 3).unwrap_err(),
            EstimationError::NotReflexive { element: 0 }
        );
        // Asymmetric link.
        let adjacency = alloc::vec![BTreeSet::from([0usize, 1]), BTreeSet::from([1usize])];
        assert_eq!(
            LinkedUniverse::new(adjacency, 3).unwrap_err(),
            EstimationError::NotSymmetric { from: 0, to: 1 }
        );
        // Degree above the bound.
        let adjacency = alloc::vec![
            BTreeSet::from([0usize, 1, 2]),
            BTreeSet::from([0usize, 1]),
            BTreeSet::from([0usize, 2]),
        ];
        assert_eq!(
            LinkedUniverse::new(adjacency, 2).unwrap_err(),
            EstimationError::DegreeTooHigh {
                element: 0,
                degree: 3,
                bound: 2
            }
        );
        // Link outside the universe.
        let adjacency = alloc::vec![BTreeSet::from([0usize, 5])];
        assert_eq!(
            LinkedUniverse::new(adjacency, 3).unwrap_err(),
            EstimationError::LinkOutOfRange { from: 0, to: 5 }
        );
        assert_eq!(
            LinkedUniverse::new(alloc::vec![], 0).unwrap_err(),
            EstimationError::ZeroLinkBound
        );
    }

    #[test]
    fn family_and_check_guards() {
        let u = universe_from_edges(2, &[], 2);
        assert_eq!(
            AbstractFamily::from_pairs(&[(0, 0)]).unwrap_err(),
            EstimationError::ZeroMultiplicity { element: 0 }
        );
        let empty = AbstractFamily::from_pairs(&[]).unwrap();
        assert_eq!(
            estimation_check(&u, &empty).unwrap_err(),
            EstimationError::EmptyFamily
        );
        let outside = AbstractFamily::from_pairs(&[(7, 1)]).unwrap();
        assert_eq!(
            estimation_check(&u, &outside).unwrap_err(),
            EstimationError::UnknownElement { element: 7 }
        );
        assert_eq!(
            upsilon(&u, &outside, 7).unwrap_err(),
            EstimationError::UnknownElement { element: 7 }
        );
    }

    #[test]
    fn semi_invariant_bound_examples() {
        let p = |c: i64| Point::new(&[c]);
        let b = [p(0), p(1)];
        let gamma =
            Family::from_pairs([(crate::lattice::Edge::new(p(0), p(1)).unwrap(), 1)]).unwrap();
        assert!(bound_check_semi_invariant(&b, &gamma).unwrap());
        // Disconnected observable: value 0, bound holds trivially.
        let far = [p(0), p(9)];
        assert!(bound_check_semi_invariant(&far, &gamma).unwrap());
    }

    #[test]
    fn semi_invariant_bound_over_enumerated_families() {
        // Exhaustive check in one dimension for modest orders.
        let p = |c: i64| Point::new(&[c]);
        for base in [alloc::vec![p(0)], alloc::vec![p(0), p(1)], alloc::vec![p(0), p(2)]] {
            for n in 1..=4u64 {
                for gamma in enumerate_connected(&base, n).unwrap() {
                    assert!(
                        bound_check_semi_invariant(&base, &gamma).unwrap(),
                        "bound failed for base {base:?}, family {gamma}"
                    );
                }
            }
        }
    }

    // Random bounded-degree universes: build from a shuffled edge pool,
    // inserting an edge only while both endpoints stay within the bound.
    fn arbitrary_universe() -> impl Strategy<Value = (LinkedUniverse, AbstractFamily)> {
        (2usize..=10, 2usize..=12)
            .prop_flat_map(|(l, n)| {
                (
                    Just(l),
                    Just(n),
                    proptest::collection::vec((0..n, 0..n), 0..40),
                    proptest::collection::vec((0..n, 1u64..=20), 1..=8),
                )
            })
            .prop_map(|(l, n, edge_pool, fam_pool)| {
                let mut adjacency: Vec<BTreeSet<usize>> =
                    (0..n).map(|i| BTreeSet::from([i])).collect();
                for (a, b) in edge_pool {
                    if a != b
                        && adjacency[a].len() < l
                        && adjacency[b].len() < l
                        && !adjacency[a].contains(&b)
                    {
                        adjacency[a].insert(b);
                        adjacency[b].insert(a);
                    }
                }
                let universe = LinkedUniverse::new(adjacency, l).unwrap();
                let family = AbstractFamily::from_pairs(&fam_pool).unwrap();
                (universe, family)
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(400))]

        #[test]
        fn inequality_holds_on_random_universes((universe, family) in arbitrary_universe()) {
            let check = estimation_check(&universe, &family).unwrap();
            prop_assert!(check.holds, "f = {}, g = {}", check.f, check.g);
            // Reflexivity gives υᵢ ≥ nᵢ for every member.
            for (element, n) in family.entries() {
                prop_assert!(upsilon(&universe, &family, element).unwrap() >= n);
            }
        }

        #[test]
        fn check_is_invariant_under_relabeling(
            (universe, family) in arbitrary_universe(),
            rotation in 0usize..12,
        ) {
            // Relabel i ↦ (i + rotation) mod n: f and g are unchanged.
            let n = universe.len();
            let shift = |i: usize| (i + rotation) % n;
            let mut adjacency = alloc::vec![BTreeSet::new(); n];
            for i in 0..n {
                for &j in universe.links(i).unwrap() {
                    adjacency[shift(i)].insert(shift(j));
                }
            }
            let relabeled = LinkedUniverse::new(adjacency, universe.link_bound()).unwrap();
            let moved: Vec<(usize, u64)> =
                family.entries().map(|(e, m)| (shift(e), m)).collect();
            let moved = AbstractFamily::from_pairs(&moved).unwrap();
            let a = estimation_check(&universe, &family).unwrap();
            let b = estimation_check(&relabeled, &moved).unwrap();
            prop_assert!((a.f - b.f).abs() < 1e-9 * a.f.abs().max(1.0));
            prop_assert!((a.g - b.g).abs() < 1e-9 * a.g.abs().max(1.0));
        }
    }
}
