//! The integer lattice ℤ^ν: points, nearest-neighbour edges, centred cubes,
//! and the coarse-graining block map used by the renormalization transform.
//!
//! Every operation is dimension-checked and uses checked `i64` arithmetic:
//! coordinate overflow is reported as an error, never wrapped.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

/// A lattice site in ℤ^ν, stored as its coordinate vector.
///
/// Ordering is lexicographic on coordinates, which is the canonical order
/// used everywhere in this crate (cube enumeration, edge endpoints, family
/// serialization).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Point(pub Vec<i64>);

/// Errors from lattice-geometry operations.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum LatticeError {
    /// Two points of different dimension were combined.
    DimensionMismatch { left: usize, right: usize },
    /// An edge was requested between non-adjacent sites.
    NotAdjacent,
    /// A coordinate computation left the `i64` range.
    CoordinateOverflow,
    /// A scale factor or dimension parameter was out of range.
    InvalidParameter(&'static str),
    /// A point could not be parsed from text.
    Parse(String),
}

impl fmt::Display for LatticeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeError::DimensionMismatch { left, right } => {
                write!(f, "dimension mismatch: {left} vs {right}")
            }
            LatticeError::NotAdjacent => write!(f, "points are not nearest neighbours"),
            LatticeError::CoordinateOverflow => write!(f, "coordinate overflow"),
            LatticeError::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            LatticeError::Parse(s) => write!(f, "cannot parse point from {s:?}"),
        }
    }
}

impl core::error::Error for LatticeError {}

impl Point {
    /// Builds a point from a coordinate slice.
    pub fn new(coords: &[i64]) -> Point {
        Point(coords.to_vec())
    }

    /// The ambient dimension ν.
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Coordinate access.
    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    /// The origin of ℤ^ν.
    pub fn origin(nu: u32) -> Point {
        Point(alloc::vec![0; nu as usize])
    }

    /// Coordinatewise translation, with overflow checked.
    pub fn translated(&self, shift: &Point) -> Result<Point, LatticeError> {
        check_dims(self, shift)?;
        let coords = self
            .0
            .iter()
            .zip(&shift.0)
            .map(|(a, b)| a.checked_add(*b).ok_or(LatticeError::CoordinateOverflow))
            .collect::<Result<Vec<i64>, _>>()?;
        Ok(Point(coords))
    }
}

impl fmt::Display for Point {
    /// Comma-separated coordinates, e.g. `-1,0,2`. This is the textual form
    /// used by the CLI and by family serialization.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for Point {
    type Err = LatticeError;

    fn from_str(s: &str) -> Result<Point, LatticeError> {
        let coords = s
            .split(',')
            .map(|part| {
                part.trim()
                    .parse::<i64>()
                    .map_err(|_| LatticeError::Parse(s.to_string()))
            })
            .collect::<Result<Vec<i64>, _>>()?;
        if coords.is_empty() {
            return Err(LatticeError::Parse(s.to_string()));
        }
        Ok(Point(coords))
    }
}

fn check_dims(s: &Point, t: &Point) -> Result<(), LatticeError> {
    if s.dim() != t.dim() {
        return Err(LatticeError::DimensionMismatch {
            left: s.dim(),
            right: t.dim(),
        });
    }
    Ok(())
}

/// ℓ¹ (taxicab) distance ρ(s, t) = Σᵢ |sᵢ − tᵢ|.
pub fn distance(s: &Point, t: &Point) -> Result<u64, LatticeError> {
    check_dims(s, t)?;
    let mut sum: u128 = 0;
    for (a, b) in s.0.iter().zip(&t.0) {
        let diff = a.checked_sub(*b).map(i64::unsigned_abs).or_else(|| {
            // |a - b| fits in u64 even when the signed difference overflows.
            a.unsigned_abs().checked_add(b.unsigned_abs())
        });
        sum += u128::from(diff.ok_or(LatticeError::CoordinateOverflow)?);
    }
    u64::try_from(sum).map_err(|_| LatticeError::CoordinateOverflow)
}

/// An unordered nearest-neighbour bond {r, s} with ρ(r, s) = 1.
///
/// Endpoints are stored sorted, so equality and ordering are those of the
/// unordered pair.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Edge {
    lo: Point,
    hi: Point,
}

impl Edge {
    /// Builds the bond {r, s}; the endpoints must be distinct nearest
    /// neighbours of equal dimension.
    pub fn new(r: Point, s: Point) -> Result<Edge, LatticeError> {
        if distance(&r, &s)? != 1 {
            return Err(LatticeError::NotAdjacent);
        }
        if r <= s {
            Ok(Edge { lo: r, hi: s })
        } else {
            Ok(Edge { lo: s, hi: r })
        }
    }

    /// The two endpoints in canonical (ascending) order.
    pub fn endpoints(&self) -> (&Point, &Point) {
        (&self.lo, &self.hi)
    }

    /// Ambient dimension ν.
    pub fn dim(&self) -> usize {
        self.lo.dim()
    }

    /// Translates both endpoints.
    pub fn translated(&self, shift: &Point) -> Result<Edge, LatticeError> {
        // Translation preserves adjacency and ordering.
        Ok(Edge {
            lo: self.lo.translated(shift)?,
            hi: self.hi.translated(shift)?,
        })
    }
}

impl fmt::Display for Edge {
    /// The two endpoints separated by a space, e.g. `-1,0 0,0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.lo, self.hi)
    }
}

/// All 2ν bonds incident to `t`, in canonical (ascending) order.
pub fn neighbor_edges(t: &Point) -> Result<Vec<Edge>, LatticeError> {
    let nu = t.dim();
    let mut edges = Vec::with_capacity(2 * nu);
    for axis in 0..nu {
        for step in [-1i64, 1i64] {
            let mut coords = t.0.clone();
            coords[axis] = coords[axis]
                .checked_add(step)
                .ok_or(LatticeError::CoordinateOverflow)?;
            edges.push(Edge::new(t.clone(), Point(coords))?);
        }
    }
    edges.sort();
    Ok(edges)
}

/// The centred cube Λ_N = {t ∈ ℤ^ν : |tᵢ| ≤ N}, with (2N+1)^ν sites.
///
/// Sites are ranked in lexicographic order of their coordinate vectors; the
/// rank is the site index used by spin configurations.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Cube {
    nu: u32,
    half_side: u32,
    len: usize,
}

impl Cube {
    /// The cube of half-side N in dimension ν ≥ 1. Fails if ν = 0 or the
    /// site count (2N+1)^ν does not fit in `usize`.
    pub fn new(nu: u32, half_side: u32) -> Result<Cube, LatticeError> {
        if nu == 0 {
            return Err(LatticeError::InvalidParameter("dimension must be >= 1"));
        }
        let side = 2usize * half_side as usize + 1;
        let len = side
            .checked_pow(nu)
            .ok_or(LatticeError::InvalidParameter("cube too large"))?;
        Ok(Cube { nu, half_side, len })
    }

    pub fn nu(&self) -> u32 {
        self.nu
    }

    pub fn half_side(&self) -> u32 {
        self.half_side
    }

    /// Number of sites (2N+1)^ν.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false // a cube always contains at least the origin
    }

    /// Side length 2N+1.
    fn side(&self) -> usize {
        2 * self.half_side as usize + 1
    }

    pub fn contains(&self, t: &Point) -> bool {
        t.dim() == self.nu as usize
            && t.0.iter().all(|c| c.unsigned_abs() <= u64::from(self.half_side))
    }

    /// Lexicographic rank of `t` within the cube, if it lies inside.
    pub fn index_of(&self, t: &Point) -> Option<usize> {
        if !self.contains(t) {
            return None;
        }
        let n = i64::from(self.half_side);
        let mut rank = 0usize;
        for &c in &t.0 {
            rank = rank * self.side() + (c + n) as usize;
        }
        Some(rank)
    }

    /// The site of lexicographic rank `index` (inverse of [`Cube::index_of`]).
    pub fn point_at(&self, index: usize) -> Option<Point> {
        if index >= self.len {
            return None;
        }
        let n = i64::from(self.half_side);
        let side = self.side();
        let mut coords = alloc::vec![0i64; self.nu as usize];
        let mut rest = index;
        for c in coords.iter_mut().rev() {
            *c = (rest % side) as i64 - n;
            rest /= side;
        }
        Some(Point(coords))
    }

    /// All sites in lexicographic order.
    pub fn points(&self) -> Vec<Point> {
        let mut out = Vec::with_capacity(self.len);
        let n = i64::from(self.half_side);
        let mut current = alloc::vec![-n; self.nu as usize];
        loop {
            out.push(Point(current.clone()));
            // Odometer step in lexicographic order.
            let mut axis = self.nu as usize;
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                if current[axis] < n {
                    current[axis] += 1;
                    for c in &mut current[axis + 1..] {
                        *c = -n;
                    }
                    break;
                }
            }
        }
    }
}

/// All sites of Λ_N in lexicographic order ((2N+1)^ν of them).
pub fn cube_points(nu: u32, half_side: u32) -> Result<Vec<Point>, LatticeError> {
    Ok(Cube::new(nu, half_side)?.points())
}

/// The block map G_k: coordinatewise floor division by k, so that the
/// preimage of each coarse site is a translate of {0, …, k−1}^ν.
///
/// Floor (Euclidean) division keeps blocks aligned across the origin:
/// G_2(-1) = -1, not 0.
pub fn block_map(t: &Point, k: u32) -> Result<Point, LatticeError> {
    if k == 0 {
        return Err(LatticeError::InvalidParameter("block scale must be >= 1"));
    }
    let k = i64::from(k);
    Ok(Point(t.0.iter().map(|c| c.div_euclid(k)).collect()))
}

/// The k^ν sites of the block G_k⁻¹(τ), in lexicographic order.
pub fn block_preimage(tau: &Point, k: u32) -> Result<Vec<Point>, LatticeError> {
    if k == 0 {
        return Err(LatticeError::InvalidParameter("block scale must be >= 1"));
    }
    let nu = tau.dim();
    let count = (k as usize)
        .checked_pow(nu as u32)
        .ok_or(LatticeError::InvalidParameter("block too large"))?;
    let base = tau
        .0
        .iter()
        .map(|c| c.checked_mul(i64::from(k)).ok_or(LatticeError::CoordinateOverflow))
        .collect::<Result<Vec<i64>, _>>()?;
    // The far corner must also be representable.
    for b in &base {
        b.checked_add(i64::from(k) - 1)
            .ok_or(LatticeError::CoordinateOverflow)?;
    }
    let mut out = Vec::with_capacity(count);
    let mut offsets = alloc::vec![0i64; nu];
    loop {
        out.push(Point(
            base.iter().zip(&offsets).map(|(b, o)| b + o).collect(),
        ));
        let mut axis = nu;
        loop {
            if axis == 0 {
                return Ok(out);
            }
            axis -= 1;
            if offsets[axis] < i64::from(k) - 1 {
                offsets[axis] += 1;
                for o in &mut offsets[axis + 1..] {
                    *o = 0;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(coords: &[i64]) -> Point {
        Point::new(coords)
    }

    #[test]
    fn distance_is_l1() {
        assert_eq!(distance(&p(&[0, 0]), &p(&[2, -1])).unwrap(), 3);
        assert_eq!(distance(&p(&[5]), &p(&[5])).unwrap(), 0);
        assert_eq!(
            distance(&p(&[0]), &p(&[0, 0])),
            Err(LatticeError::DimensionMismatch { left: 1, right: 2 })
        );
        // Extreme coordinates do not overflow.
        assert_eq!(
            distance(&p(&[i64::MIN]), &p(&[i64::MAX])).unwrap(),
            u64::MAX
        );
    }

    #[test]
    fn edges_require_adjacency() {
        assert!(Edge::new(p(&[0]), p(&[1])).is_ok());
        assert_eq!(Edge::new(p(&[0]), p(&[2])), Err(LatticeError::NotAdjacent));
        assert_eq!(Edge::new(p(&[0]), p(&[0])), Err(LatticeError::NotAdjacent));
        // Endpoint order is canonicalized.
        let e = Edge::new(p(&[1]), p(&[0])).unwrap();
        assert_eq!(e.endpoints(), (&p(&[0]), &p(&[1])));
    }

    #[test]
    fn neighbor_edges_degree_and_order() {
        let edges = neighbor_edges(&p(&[0])).unwrap();
        assert_eq!(edges.len(), 2);
        assert_eq!(edges[0], Edge::new(p(&[-1]), p(&[0])).unwrap());
        assert_eq!(edges[1], Edge::new(p(&[0]), p(&[1])).unwrap());

        let edges = neighbor_edges(&p(&[0, 0, 0])).unwrap();
        assert_eq!(edges.len(), 6);
        let mut sorted = edges.clone();
        sorted.sort();
        assert_eq!(edges, sorted);
    }

    #[test]
    fn cube_enumeration_lex_order() {
        assert_eq!(
            cube_points(1, 1).unwrap(),
            alloc::vec![p(&[-1]), p(&[0]), p(&[1])]
        );
        let pts = cube_points(2, 2).unwrap();
        assert_eq!(pts.len(), 25);
        assert_eq!(pts[0], p(&[-2, -2]));
        assert_eq!(pts[24], p(&[2, 2]));
        let mut sorted = pts.clone();
        sorted.sort();
        assert_eq!(pts, sorted);
    }

    #[test]
    fn cube_indexing_roundtrip() {
        let cube = Cube::new(2, 3).unwrap();
        assert_eq!(cube.len(), 49);
        for (i, pt) in cube.points().into_iter().enumerate() {
            assert_eq!(cube.index_of(&pt), Some(i));
            assert_eq!(cube.point_at(i), Some(pt));
        }
        assert_eq!(cube.index_of(&p(&[4, 0])), None);
        assert_eq!(cube.point_at(49), None);
    }

    #[test]
    fn block_map_floors() {
        assert_eq!(block_map(&p(&[-1]), 2).unwrap(), p(&[-1]));
        assert_eq!(block_map(&p(&[5]), 3).unwrap(), p(&[1]));
        assert_eq!(block_map(&p(&[-3]), 3).unwrap(), p(&[-1]));
        assert_eq!(block_map(&p(&[-4, 7]), 4).unwrap(), p(&[-1, 1]));
        assert!(block_map(&p(&[0]), 0).is_err());
    }

    #[test]
    fn block_preimage_tiles() {
        assert_eq!(
            block_preimage(&p(&[-1]), 3).unwrap(),
            alloc::vec![p(&[-3]), p(&[-2]), p(&[-1])]
        );
        assert_eq!(
            block_preimage(&p(&[0]), 2).unwrap(),
            alloc::vec![p(&[0]), p(&[1])]
        );
        assert_eq!(block_preimage(&p(&[1, -1]), 3).unwrap().len(), 9);
    }

    #[test]
    fn point_text_roundtrip() {
        let t = p(&[-1, 0, 17]);
        assert_eq!(alloc::format!("{t}"), "-1,0,17");
        assert_eq!("-1,0,17".parse::<Point>().unwrap(), t);
        assert!("".parse::<Point>().is_err());
        assert!("1,a".parse::<Point>().is_err());
    }

    proptest! {
        #[test]
        fn distance_is_a_metric(
            (a, b, c) in (1usize..4).prop_flat_map(|nu| {
                let coords = || proptest::collection::vec(-100i64..100, nu);
                (coords(), coords(), coords())
            }),
        ) {
            let (a, b, c) = (Point(a), Point(b), Point(c));
            let ab = distance(&a, &b).unwrap();
            let ba = distance(&b, &a).unwrap();
            prop_assert_eq!(ab, ba);
            prop_assert_eq!(ab == 0, a == b);
            let ac = distance(&a, &c).unwrap();
            let cb = distance(&c, &b).unwrap();
            prop_assert!(ab <= ac + cb);
        }

        #[test]
        fn preimage_points_map_back(
            tau in proptest::collection::vec(-50i64..50, 1..3),
            k in 1u32..6,
        ) {
            let tau = Point(tau);
            let pre = block_preimage(&tau, k).unwrap();
            prop_assert_eq!(pre.len(), (k as usize).pow(tau.dim() as u32));
            for t in &pre {
                prop_assert_eq!(block_map(t, k).unwrap(), tau.clone());
            }
            // Blocks partition the lattice: each point lies in exactly one.
            let mut sorted = pre.clone();
            sorted.sort();
            sorted.dedup();
            prop_assert_eq!(sorted.len(), pre.len());
        }

        #[test]
        fn block_map_section(t in proptest::collection::vec(-1000i64..1000, 1..3), k in 1u32..6) {
            let t = Point(t);
            let tau = block_map(&t, k).unwrap();
            let pre = block_preimage(&tau, k).unwrap();
            prop_assert!(pre.contains(&t));
        }
    }
}
