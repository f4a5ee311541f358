//! Finite families of nearest-neighbour bonds with multiplicities, the
//! connectivity predicate that drives the cluster expansion, and exhaustive
//! enumeration of the families of a given total multiplicity that connect a
//! base sequence of sites.
//!
//! A family γ assigns a multiplicity nᵢ ≥ 1 to each of finitely many distinct
//! bonds; |γ| = Σ nᵢ is its order, γ! = ∏ nᵢ! its multiplicity factorial, and
//! its support γ̃ is the set of all bond endpoints.

use crate::lattice::{distance, Edge, LatticeError, Point};
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
use num_bigint::BigInt;

/// Errors from family construction and enumeration.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum FamilyError {
    Lattice(LatticeError),
    /// A multiplicity of zero was supplied.
    ZeroMultiplicity,
    /// Points or bonds of different dimensions were mixed.
    MixedDimension,
    /// The connectivity predicate needs at least one site or bond.
    NothingToConnect,
    /// Enumeration was requested with an empty base sequence.
    EmptyBase,
    /// The requested order exceeds the enumeration cap.
    OrderCap { order: u64, cap: u64 },
    /// A family could not be parsed from text.
    Parse(String),
}

impl fmt::Display for FamilyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyError::Lattice(e) => write!(f, "{e}"),
            FamilyError::ZeroMultiplicity => write!(f, "bond multiplicities must be >= 1"),
            FamilyError::MixedDimension => write!(f, "mixed lattice dimensions"),
            FamilyError::NothingToConnect => {
                write!(f, "connectivity needs at least one site or bond")
            }
            FamilyError::EmptyBase => write!(f, "enumeration needs a nonempty base sequence"),
            FamilyError::OrderCap { order, cap } => {
                write!(f, "family order {order} exceeds the enumeration cap {cap}")
            }
            FamilyError::Parse(s) => write!(f, "cannot parse family line {s:?}"),
        }
    }
}

impl core::error::Error for FamilyError {}

impl From<LatticeError> for FamilyError {
    fn from(e: LatticeError) -> FamilyError {
        FamilyError::Lattice(e)
    }
}

/// A finite multiset of nearest-neighbour bonds: the index object of the
/// cluster expansion.
///
/// Ordering (and therefore the serialized form) is the lexicographic order of
/// the sorted (bond, multiplicity) entries, so enumeration output and golden
/// files are stable.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Default)]
pub struct Family {
    entries: BTreeMap<Edge, u32>,
}

impl Family {
    /// The empty family (order 0).
    pub fn empty() -> Family {
        Family::default()
    }

    /// Builds a family from (bond, multiplicity) pairs; duplicate bonds have
    /// their multiplicities added.
    pub fn from_pairs<I: IntoIterator<Item = (Edge, u32)>>(pairs: I) -> Result<Family, FamilyError> {
        let mut fam = Family::empty();
        for (e, mult) in pairs {
            fam.insert(e, mult)?;
        }
        Ok(fam)
    }

    /// Adds `mult` copies of a bond.
    pub fn insert(&mut self, e: Edge, mult: u32) -> Result<(), FamilyError> {
        if mult == 0 {
            return Err(FamilyError::ZeroMultiplicity);
        }
        if let Some((first, _)) = self.entries.iter().next() {
            if first.dim() != e.dim() {
                return Err(FamilyError::MixedDimension);
            }
        }
        *self.entries.entry(e).or_insert(0) += mult;
        Ok(())
    }

    /// Distinct bonds with their multiplicities, in canonical order.
    pub fn entries(&self) -> impl Iterator<Item = (&Edge, u32)> {
        self.entries.iter().map(|(e, &m)| (e, m))
    }

    /// Total multiplicity |γ| = Σ nᵢ.
    pub fn order(&self) -> u64 {
        self.entries.values().map(|&m| u64::from(m)).sum()
    }

    /// Number of distinct bonds.
    pub fn distinct_len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// γ! = ∏ᵢ nᵢ! as an exact integer.
    pub fn factorial(&self) -> BigInt {
        let mut acc = BigInt::from(1u32);
        for &m in self.entries.values() {
            for j in 2..=u64::from(m) {
                acc *= j;
            }
        }
        acc
    }

    /// The support γ̃: every endpoint of every bond.
    pub fn support(&self) -> BTreeSet<Point> {
        let mut pts = BTreeSet::new();
        for e in self.entries.keys() {
            let (lo, hi) = e.endpoints();
            pts.insert(lo.clone());
            pts.insert(hi.clone());
        }
        pts
    }

    /// Each bond repeated according to its multiplicity (|γ| items), in
    /// canonical order.
    pub fn expanded_bonds(&self) -> impl Iterator<Item = &Edge> {
        self.entries
            .iter()
            .flat_map(|(e, &m)| core::iter::repeat_n(e, m as usize))
    }

    /// Ambient dimension, if the family is nonempty.
    pub fn dim(&self) -> Option<usize> {
        self.entries.keys().next().map(Edge::dim)
    }

    /// Translates every bond by `shift`.
    pub fn translated(&self, shift: &Point) -> Result<Family, FamilyError> {
        let mut fam = Family::empty();
        for (e, m) in self.entries() {
            fam.insert(e.translated(shift)?, m)?;
        }
        Ok(fam)
    }
}

impl fmt::Display for Family {
    /// Line-oriented form: one `endpoint endpoint multiplicity` line per
    /// distinct bond, in canonical order. The empty family prints nothing.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (e, m) in self.entries() {
            writeln!(f, "{e} {m}")?;
        }
        Ok(())
    }
}

impl FromStr for Family {
    type Err = FamilyError;

    /// Parses the line-oriented form produced by `Display`. Blank lines and
    /// `#` comment lines are ignored.
    fn from_str(s: &str) -> Result<Family, FamilyError> {
        let mut fam = Family::empty();
        for line in s.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split_whitespace();
            let (a, b, m) = match (fields.next(), fields.next(), fields.next(), fields.next()) {
                (Some(a), Some(b), Some(m), None) => (a, b, m),
                _ => return Err(FamilyError::Parse(line.to_string())),
            };
            let a: Point = a.parse()?;
            let b: Point = b.parse()?;
            let m: u32 = m
                .parse()
                .map_err(|_| FamilyError::Parse(line.to_string()))?;
            fam.insert(Edge::new(a, b)?, m)?;
        }
        Ok(fam)
    }
}

fn common_dimension(b: &[Point], gamma: &Family) -> Result<usize, FamilyError> {
    let mut dim = None;
    for t in b {
        match dim {
            None => dim = Some(t.dim()),
            Some(d) if d == t.dim() => {}
            _ => return Err(FamilyError::MixedDimension),
        }
    }
    if let Some(d) = gamma.dim() {
        match dim {
            None => dim = Some(d),
            Some(existing) if existing == d => {}
            _ => return Err(FamilyError::MixedDimension),
        }
    }
    dim.ok_or(FamilyError::NothingToConnect)
}

/// Whether the graph with vertices {b points} ∪ γ̃ and one edge per distinct
/// bond of γ is connected. A single site with no bonds counts as connected.
///
/// This is the admissibility predicate of the cluster expansion: only
/// connecting families contribute to expansion coefficients.
pub fn connects(b: &[Point], gamma: &Family) -> Result<bool, FamilyError> {
    common_dimension(b, gamma)?;
    // Collect the vertex set.
    let mut vertices: BTreeMap<&Point, usize> = BTreeMap::new();
    for t in b {
        let next = vertices.len();
        vertices.entry(t).or_insert(next);
    }
    let support_pairs: Vec<(&Point, &Point)> =
        gamma.entries.keys().map(Edge::endpoints).collect();
    for &(lo, hi) in &support_pairs {
        let next = vertices.len();
        vertices.entry(lo).or_insert(next);
        let next = vertices.len();
        vertices.entry(hi).or_insert(next);
    }
    let n = vertices.len();
    if n <= 1 {
        return Ok(true);
    }
    // Breadth-first search over the distinct bonds.
    let mut adjacency: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
    for (lo, hi) in support_pairs {
        let (i, j) = (vertices[lo], vertices[hi]);
        adjacency[i].push(j);
        adjacency[j].push(i);
    }
    let mut seen = alloc::vec![false; n];
    let mut stack = alloc::vec![0usize];
    seen[0] = true;
    let mut reached = 1;
    while let Some(v) = stack.pop() {
        for &w in &adjacency[v] {
            if !seen[w] {
                seen[w] = true;
                reached += 1;
                stack.push(w);
            }
        }
    }
    Ok(reached == n)
}

/// Default ceiling on the total multiplicity for exhaustive enumeration.
/// The family count grows like (2ν)^{2n}, so the ceiling shrinks with the
/// dimension.
pub fn default_order_cap(nu: u32) -> u64 {
    match nu {
        0 | 1 => 6,
        2 => 4,
        _ => 2,
    }
}

/// All families of order exactly `n` that connect the base sequence `b`,
/// in canonical ascending order.
///
/// `b` must be nonempty; `n` is capped by [`default_order_cap`] for the
/// ambient dimension (see [`enumerate_connected_with_cap`] to override).
/// For `n = 0` the result is the empty family alone when all base points
/// coincide, and no family otherwise.
pub fn enumerate_connected(b: &[Point], n: u64) -> Result<Vec<Family>, FamilyError> {
    let nu = b.first().ok_or(FamilyError::EmptyBase)?.dim() as u32;
    enumerate_connected_with_cap(b, n, default_order_cap(nu))
}

/// [`enumerate_connected`] with an explicit order cap.
///
/// Cost warning: both the candidate bond set (all bonds within ℓ¹ distance
/// `n` of the first base point) and the number of connected supports grow
/// exponentially with `n`; orders much past the defaults take minutes and
/// beyond.
pub fn enumerate_connected_with_cap(
    b: &[Point],
    n: u64,
    cap: u64,
) -> Result<Vec<Family>, FamilyError> {
    if b.is_empty() {
        return Err(FamilyError::EmptyBase);
    }
    common_dimension(b, &Family::empty())?;
    if n > cap {
        return Err(FamilyError::OrderCap { order: n, cap });
    }
    if n == 0 {
        return if connects(b, &Family::empty())? {
            Ok(alloc::vec![Family::empty()])
        } else {
            Ok(Vec::new())
        };
    }
    let root = &b[0];
    // A connecting family of order n has a connected support of at most n
    // bonds containing every base point, so everything lives inside the ℓ¹
    // ball of radius n around the first base point.
    for t in b {
        if distance(root, t)? > n {
            return Ok(Vec::new());
        }
    }
    let ball = l1_ball(root, n)?;
    let ball_index: BTreeMap<&Point, usize> = ball.iter().zip(0..).collect();
    // Candidate bonds: both endpoints inside the ball, canonical order.
    let mut bonds: Vec<(usize, usize)> = Vec::new(); // endpoint indices into `ball`
    {
        let mut seen = BTreeSet::new();
        for (p, &pi) in &ball_index {
            for axis in 0..p.dim() {
                let mut q = (*p).clone();
                q.0[axis] = q.0[axis]
                    .checked_add(1)
                    .ok_or(LatticeError::CoordinateOverflow)?;
                if let Some(&qi) = ball_index.get(&q) {
                    seen.insert((Edge::new((*p).clone(), q.clone())?, pi, qi));
                }
            }
        }
        bonds.extend(seen.iter().map(|&(_, pi, qi)| (pi, qi)));
    }
    let edge_list: Vec<Edge> = {
        // Rebuild in the same canonical order as `bonds`.
        bonds
            .iter()
            .map(|&(pi, qi)| Edge::new(ball[pi].clone(), ball[qi].clone()).unwrap())
            .collect()
    };
    let base_indices: BTreeSet<usize> = b.iter().map(|t| ball_index[t]).collect();
    let root_index = ball_index[root];

    // Enumerate connected bond subsets containing the root vertex, each
    // exactly once: at every level walk the incident unbanned bonds in
    // canonical order, and ban each bond for the subtrees of its successors.
    let mut in_vertex = alloc::vec![false; ball.len()];
    in_vertex[root_index] = true;
    let mut banned = alloc::vec![false; bonds.len()];
    let mut in_support = alloc::vec![false; bonds.len()];
    let mut chosen: Vec<usize> = Vec::new();
    let mut supports: Vec<Vec<usize>> = Vec::new();
    grow_supports(
        &bonds,
        &base_indices,
        n as usize,
        &mut in_vertex,
        &mut banned,
        &mut in_support,
        &mut chosen,
        &mut supports,
    );

    // Distribute the order n over each support as multiplicities ≥ 1.
    let mut out = Vec::new();
    for support in supports {
        let s = support.len();
        let mut mults = alloc::vec![1u32; s];
        distribute((n as usize) - s, 0, &mut mults, &mut |mults| {
            let fam = Family::from_pairs(
                support
                    .iter()
                    .zip(mults)
                    .map(|(&ei, &m)| (edge_list[ei].clone(), m)),
            )
            .expect("enumerated bonds are valid");
            out.push(fam);
        });
    }
    out.sort();
    Ok(out)
}

/// All lattice points within ℓ¹ distance `radius` of `center`, in canonical
/// order.
fn l1_ball(center: &Point, radius: u64) -> Result<Vec<Point>, FamilyError> {
    fn fill(
        center: &[i64],
        axis: usize,
        budget: i64,
        current: &mut Vec<i64>,
        out: &mut Vec<Point>,
    ) -> Result<(), LatticeError> {
        if axis == center.len() {
            out.push(Point(current.clone()));
            return Ok(());
        }
        for offset in -budget..=budget {
            current.push(
                center[axis]
                    .checked_add(offset)
                    .ok_or(LatticeError::CoordinateOverflow)?,
            );
            fill(center, axis + 1, budget - offset.abs(), current, out)?;
            current.pop();
        }
        Ok(())
    }
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(center.dim());
    let radius = i64::try_from(radius).map_err(|_| LatticeError::CoordinateOverflow)?;
    fill(center.coords(), 0, radius, &mut current, &mut out)?;
    out.sort();
    Ok(out)
}

/// Depth-first growth of connected bond subsets (see `enumerate_connected`).
#[allow(clippy::too_many_arguments)]
fn grow_supports(
    bonds: &[(usize, usize)],
    base: &BTreeSet<usize>,
    max_len: usize,
    in_vertex: &mut [bool],
    banned: &mut [bool],
    in_support: &mut [bool],
    chosen: &mut Vec<usize>,
    supports: &mut Vec<Vec<usize>>,
) {
    if !chosen.is_empty() && base.iter().all(|&v| in_vertex[v]) {
        let mut support = chosen.clone();
        support.sort_unstable();
        supports.push(support);
    }
    if chosen.len() == max_len {
        return;
    }
    // Bonds incident to the current vertex set, in canonical order.
    let frontier: Vec<usize> = (0..bonds.len())
        .filter(|&e| {
            !banned[e] && !in_support[e] && (in_vertex[bonds[e].0] || in_vertex[bonds[e].1])
        })
        .collect();
    for (pos, &e) in frontier.iter().enumerate() {
        let (a, b) = bonds[e];
        let (was_a, was_b) = (in_vertex[a], in_vertex[b]);
        in_vertex[a] = true;
        in_vertex[b] = true;
        in_support[e] = true;
        chosen.push(e);
        // Ban the earlier frontier bonds inside this subtree so each subset
        // is produced exactly once.
        for &earlier in &frontier[..pos] {
            banned[earlier] = true;
        }
        grow_supports(bonds, base, max_len, in_vertex, banned, in_support, chosen, supports);
        for &earlier in &frontier[..pos] {
            banned[earlier] = false;
        }
        chosen.pop();
        in_support[e] = false;
        in_vertex[a] = was_a;
        in_vertex[b] = was_b;
    }
}

/// Visits every way of adding `extra` further units onto `mults[from..]`.
fn distribute<F: FnMut(&[u32])>(extra: usize, from: usize, mults: &mut Vec<u32>, f: &mut F) {
    if extra == 0 {
        f(mults);
        return;
    }
    if from == mults.len() {
        return;
    }
    for add in (0..=extra).rev() {
        mults[from] += add as u32;
        distribute(extra - add, from + 1, mults, f);
        mults[from] -= add as u32;
    }
}
