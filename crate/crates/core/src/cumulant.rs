//! Set-partition combinatorics and the moment ↔ semi-invariant (joint
//! cumulant) transforms.
//!
//! For random variables X₁, …, X_m with joint moments E(X_S) = E(∏_{i∈S} Xᵢ),
//! the semi-invariant is the alternating sum over set partitions α = {S₁, …, S_k}
//! of {1, …, m}:
//!
//! ⟨X₁, …, X_m⟩ = Σ_α (−1)^{k−1} (k−1)! · E(X_{S₁}) ⋯ E(X_{S_k})
//!
//! and conversely the moment is recovered from semi-invariants of subsets:
//!
//! E(X₁ ⋯ X_m) = Σ_α ⟨X_{S₁}⟩ ⋯ ⟨X_{S_k}⟩.
//!
//! Both transforms are generic over the value type, so the same code path
//! serves exact rational, big-integer, and floating-point callers.

use alloc::vec::Vec;
use core::fmt;
use core::ops::{Mul, Sub};
use num_traits::{FromPrimitive, One, Zero};

/// Hard ceiling on the number of jointly combined variables. The partition
/// count is the Bell number B(m) (B(12) = 4 213 597), so orders past this cap
/// are refused rather than silently attempted.
pub const DEFAULT_ORDER_CAP: usize = 12;

/// Errors from partition enumeration and cumulant evaluation.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CumulantError {
    /// The variable count must be at least 1.
    OrderZero,
    /// The variable count exceeds the enumeration cap.
    OrderCap { order: usize, cap: usize },
}

impl fmt::Display for CumulantError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CumulantError::OrderZero => write!(f, "at least one variable is required"),
            CumulantError::OrderCap { order, cap } => {
                write!(f, "order {order} exceeds the partition enumeration cap {cap}")
            }
        }
    }
}

impl core::error::Error for CumulantError {}

/// A subset of variable indices {0, …, m−1}, m ≤ 32, as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Subset(u32);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    pub fn from_bits(bits: u32) -> Subset {
        Subset(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    /// The full set {0, …, m−1}.
    pub fn full(m: usize) -> Subset {
        debug_assert!(m <= 32);
        if m == 32 {
            Subset(u32::MAX)
        } else {
            Subset((1u32 << m) - 1)
        }
    }

    pub fn singleton(i: usize) -> Subset {
        Subset(1u32 << i)
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 & (1u32 << i) != 0
    }

    pub fn insert(&mut self, i: usize) {
        self.0 |= 1u32 << i;
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Indices in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        core::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }
}

/// A set partition of {0, …, m−1} into nonempty disjoint blocks.
///
/// Blocks are ordered by their smallest element, which matches the
/// restricted-growth-string convention used by [`partitions`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SetPartition {
    blocks: Vec<Subset>,
}

impl SetPartition {
    pub fn blocks(&self) -> &[Subset] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }
}

/// Iterator over all set partitions of {0, …, m−1} in restricted-growth-string
/// lexicographic order: the all-in-one-block partition first, all singletons
/// last.
#[derive(Debug)]
pub struct Partitions {
    /// rgs[i] = index of the block containing element i; rgs[0] = 0.
    rgs: Vec<u8>,
    /// prefix_max[i] = max(rgs[0..=i]).
    prefix_max: Vec<u8>,
    started: bool,
    done: bool,
}

/// Enumerates the set partitions of {0, …, m−1} (Bell(m) of them) with the
/// default order cap.
pub fn partitions(m: usize) -> Result<Partitions, CumulantError> {
    partitions_with_cap(m, DEFAULT_ORDER_CAP)
}

/// [`partitions`] with an explicit cap. Raising the cap is exponentially
/// expensive: B(m) grows faster than 2^m.
pub fn partitions_with_cap(m: usize, cap: usize) -> Result<Partitions, CumulantError> {
    if m == 0 {
        return Err(CumulantError::OrderZero);
    }
    if m > cap || m > 32 {
        return Err(CumulantError::OrderCap { order: m, cap: cap.min(32) });
    }
    Ok(Partitions {
        rgs: alloc::vec![0; m],
        prefix_max: alloc::vec![0; m],
        started: false,
        done: false,
    })
}

impl Partitions {
    fn materialize(&self) -> SetPartition {
        let block_count = self.prefix_max[self.rgs.len() - 1] as usize + 1;
        let mut blocks = alloc::vec![Subset::EMPTY; block_count];
        for (i, &b) in self.rgs.iter().enumerate() {
            blocks[b as usize].insert(i);
        }
        SetPartition { blocks }
    }
}

impl Iterator for Partitions {
    type Item = SetPartition;

    fn next(&mut self) -> Option<SetPartition> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(self.materialize());
        }
        let m = self.rgs.len();
        // Find the rightmost digit that may grow: rgs[i] <= max(rgs[..i]).
        let mut i = m;
        loop {
            if i <= 1 {
                self.done = true;
                return None;
            }
            i -= 1;
            if self.rgs[i] <= self.prefix_max[i - 1] {
                break;
            }
        }
        self.rgs[i] += 1;
        self.prefix_max[i] = self.prefix_max[i - 1].max(self.rgs[i]);
        for j in i + 1..m {
            self.rgs[j] = 0;
            self.prefix_max[j] = self.prefix_max[j - 1];
        }
        Some(self.materialize())
    }
}

/// Depth-first walk over all set partitions, presented as a slice of block
/// masks. Visits in the same order as [`partitions`] but without allocating
/// per partition; used by the transform hot paths.
fn visit_partitions<F: FnMut(&[Subset])>(m: usize, f: &mut F) {
    let mut blocks = [Subset::EMPTY; 32];
    fn step<F: FnMut(&[Subset])>(m: usize, i: usize, k: usize, blocks: &mut [Subset; 32], f: &mut F) {
        if i == m {
            f(&blocks[..k]);
            return;
        }
        // Element i joins an existing block or opens a new one; trying block
        // indices in ascending order yields restricted-growth order.
        for j in 0..=k {
            let saved = blocks[j];
            blocks[j].insert(i);
            step(m, i + 1, k.max(j + 1), blocks, f);
            blocks[j] = saved;
        }
    }
    step(m, 0, 0, &mut blocks, f);
}

/// n! as u64 (valid for n ≤ 20; partition block counts stay ≤ 32 but the
/// factorials used here are (k−1)! with k ≤ DEFAULT_ORDER_CAP).
pub(crate) fn factorial_u64(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// The joint semi-invariant ⟨X₁, …, X_m⟩ of the variables indexed 0, …, m−1,
/// given an oracle for the joint moments E(X_S) of nonempty index subsets.
///
/// The oracle is evaluated once per nonempty subset (2^m − 1 calls); the
/// partition sum then reads from that table, so an expensive oracle is safe.
pub fn cumulant<T, F>(m: usize, oracle: F) -> Result<T, CumulantError>
where
    T: Clone + Zero + Mul<Output = T> + Sub<Output = T> + FromPrimitive,
    F: FnMut(Subset) -> T,
{
    cumulant_with_cap(m, DEFAULT_ORDER_CAP, oracle)
}

/// [`cumulant`] with an explicit order cap.
pub fn cumulant_with_cap<T, F>(m: usize, cap: usize, mut oracle: F) -> Result<T, CumulantError>
where
    T: Clone + Zero + Mul<Output = T> + Sub<Output = T> + FromPrimitive,
    F: FnMut(Subset) -> T,
{
    if m == 0 {
        return Err(CumulantError::OrderZero);
    }
    if m > cap || m > DEFAULT_ORDER_CAP.max(cap) || m > 32 {
        return Err(CumulantError::OrderCap { order: m, cap });
    }
    let table = moment_table(m, &mut oracle);
    let mut acc = T::zero();
    let mut negative = T::zero();
    visit_partitions(m, &mut |blocks| {
        let mut prod: Option<T> = None;
        for b in blocks {
            let value = table[b.bits() as usize].clone();
            if value.is_zero() {
                return; // the whole partition term vanishes
            }
            prod = Some(match prod {
                None => value,
                Some(p) => p * value,
            });
        }
        let k = blocks.len();
        let coeff = T::from_u64(factorial_u64(k - 1))
            .expect("factorial must be representable in the value type");
        let term = coeff * prod.expect("partitions have at least one block");
        // (−1)^{k−1}: odd block counts add, even block counts subtract.
        if k % 2 == 1 {
            acc = acc.clone() + term;
        } else {
            negative = negative.clone() + term;
        }
    });
    Ok(acc - negative)
}

/// The joint moment E(X₁ ⋯ X_m) reconstructed from semi-invariants of
/// subsets: Σ_α ∏_blocks ⟨X_block⟩.
///
/// The oracle is evaluated once per nonempty subset.
pub fn moment_from_cumulants<T, F>(m: usize, mut oracle: F) -> Result<T, CumulantError>
where
    T: Clone + Zero + One + Mul<Output = T>,
    F: FnMut(Subset) -> T,
{
    if m == 0 {
        return Err(CumulantError::OrderZero);
    }
    if m > DEFAULT_ORDER_CAP || m > 32 {
        return Err(CumulantError::OrderCap { order: m, cap: DEFAULT_ORDER_CAP });
    }
    let table = moment_table(m, &mut oracle);
    let mut acc = T::zero();
    visit_partitions(m, &mut |blocks| {
        let mut prod = T::one();
        for b in blocks {
            let value = table[b.bits() as usize].clone();
            if value.is_zero() {
                return;
            }
            prod = prod * value;
        }
        acc = acc.clone() + prod;
    });
    Ok(acc)
}

/// Evaluates the oracle on every nonempty subset of {0, …, m−1}, indexed by
/// bitmask.
fn moment_table<T: Clone + Zero, F: FnMut(Subset) -> T>(m: usize, oracle: &mut F) -> Vec<T> {
    let size = 1usize << m;
    let mut table = Vec::with_capacity(size);
    table.push(T::zero()); // index 0 (empty set) is never read
    for bits in 1..size as u32 {
        table.push(oracle(Subset(bits)));
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn rational(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    /// Independent oracle for the partition counts: the Bell triangle.
    fn bell_numbers(up_to: usize) -> Vec<u64> {
        let mut rows: Vec<Vec<u64>> = alloc::vec![alloc::vec![1]];
        for _ in 1..up_to {
            let prev = rows.last().unwrap();
            let mut row = alloc::vec![*prev.last().unwrap()];
            for &x in prev {
                let next = *row.last().unwrap() + x;
                row.push(next);
            }
            rows.push(row);
        }
        // B(m) for m = 1..=up_to is the first entry of row m−1.
        rows.iter().map(|r| r[0]).collect()
    }

    #[test]
    fn partition_counts_match_bell_numbers() {
        // bell[m] = B(m), the number of set partitions of m elements.
        let bell = bell_numbers(11);
        assert_eq!(&bell[..6], &[1, 1, 2, 5, 15, 52]);
        for (m, &expected) in bell.iter().enumerate().skip(1).take(10) {
            let count = partitions(m).unwrap().count() as u64;
            assert_eq!(count, expected, "Bell number mismatch at m = {m}");
        }
    }

    #[test]
    fn partition_enumeration_is_valid_and_ordered() {
        for m in 1..=7usize {
            let all: Vec<SetPartition> = partitions(m).unwrap().collect();
            // First: single block; last: all singletons.
            assert_eq!(all[0].block_count(), 1);
            assert_eq!(all[0].blocks()[0], Subset::full(m));
            assert_eq!(all.last().unwrap().block_count(), m);
            let mut seen = alloc::collections::BTreeSet::new();
            for p in &all {
                // Blocks are nonempty, disjoint, cover the ground set, and
                // are listed by ascending minimum.
                let mut union = 0u32;
                let mut last_min = None;
                for b in p.blocks() {
                    assert!(!b.is_empty());
                    assert_eq!(union & b.bits(), 0, "blocks overlap");
                    union |= b.bits();
                    let min = b.iter().next().unwrap();
                    assert!(last_min < Some(min));
                    last_min = Some(min);
                }
                assert_eq!(union, Subset::full(m).bits());
                assert!(seen.insert(p.blocks().to_vec()), "duplicate partition");
            }
        }
    }

    #[test]
    fn visitor_agrees_with_iterator() {
        for m in 1..=7usize {
            let mut visited = Vec::new();
            visit_partitions(m, &mut |blocks| visited.push(blocks.to_vec()));
            let iterated: Vec<Vec<Subset>> = partitions(m)
                .unwrap()
                .map(|p| p.blocks().to_vec())
                .collect();
            assert_eq!(visited, iterated);
        }
    }

    #[test]
    fn order_limits_are_enforced() {
        assert_eq!(partitions(0).unwrap_err(), CumulantError::OrderZero);
        assert!(matches!(
            partitions(13).unwrap_err(),
            CumulantError::OrderCap { order: 13, .. }
        ));
        assert!(partitions_with_cap(13, 13).is_ok());
        let oracle = |_: Subset| 0i128;
        assert_eq!(cumulant(0, oracle).unwrap_err(), CumulantError::OrderZero);
        assert!(matches!(
            cumulant(13, oracle).unwrap_err(),
            CumulantError::OrderCap { .. }
        ));
    }

    #[test]
    fn low_order_formulas() {
        // Fixed moment table for two variables.
        let e1 = rational(1, 3);
        let e2 = rational(-1, 2);
        let e12 = rational(1, 5);
        let k2 = cumulant(2, |s: Subset| match s.bits() {
            0b01 => e1.clone(),
            0b10 => e2.clone(),
            0b11 => e12.clone(),
            _ => unreachable!(),
        })
        .unwrap();
        assert_eq!(k2, e12.clone() - e1.clone() * e2.clone());

        // Third order: E123 − E12·E3 − E13·E2 − E23·E1 + 2·E1·E2·E3.
        let table = [
            rational(0, 1),  // unused empty slot
            rational(1, 2),  // {0}
            rational(1, 3),  // {1}
            rational(1, 5),  // {0,1}
            rational(-1, 7), // {2}
            rational(2, 7),  // {0,2}
            rational(3, 11), // {1,2}
            rational(1, 13), // {0,1,2}
        ];
        let k3 = cumulant(3, |s: Subset| table[s.bits() as usize].clone()).unwrap();
        let expected = table[7].clone()
            - table[3].clone() * table[4].clone()
            - table[5].clone() * table[2].clone()
            - table[6].clone() * table[1].clone()
            + rational(2, 1) * table[1].clone() * table[2].clone() * table[4].clone();
        assert_eq!(k3, expected);
    }

    #[test]
    fn fair_sign_self_cumulants() {
        // One fair ±1 spin combined with itself m times: moments are 1 for
        // even powers, 0 for odd.
        let parity_oracle = |s: Subset| if s.len().is_multiple_of(2) { 1i128 } else { 0 };
        assert_eq!(cumulant(2, parity_oracle).unwrap(), 1);
        assert_eq!(cumulant(3, parity_oracle).unwrap(), 0);
        assert_eq!(cumulant(4, parity_oracle).unwrap(), -2);
        assert_eq!(cumulant(6, parity_oracle).unwrap(), 16);
    }

    #[test]
    fn gaussian_higher_cumulants_vanish() {
        // A centred Gaussian with rational variance σ²: E(X^{2k}) = (2k−1)!! σ^{2k}.
        let sigma2 = rational(3, 7);
        let moment = |s: Subset| {
            let n = s.len();
            if n % 2 == 1 {
                return BigRational::zero();
            }
            let pairs = n / 2;
            let double_fact: u64 = (1..=pairs as u64).map(|j| 2 * j - 1).product();
            let mut power = BigRational::one();
            for _ in 0..pairs {
                power *= sigma2.clone();
            }
            BigRational::from_integer(BigInt::from(double_fact)) * power
        };
        assert_eq!(cumulant(2, moment).unwrap(), sigma2);
        for m in 3..=8usize {
            assert!(
                cumulant(m, moment).unwrap().is_zero(),
                "Gaussian cumulant of order {m} must vanish"
            );
        }
    }

    /// Reference implementation straight from the partition-sum definition,
    /// via the allocating iterator (independent of `visit_partitions`).
    fn cumulant_reference(m: usize, table: &[BigRational]) -> BigRational {
        let mut acc = BigRational::zero();
        for p in partitions(m).unwrap() {
            let k = p.block_count();
            let mut term = BigRational::from_integer(BigInt::from(factorial_u64(k - 1)));
            if k % 2 == 0 {
                term = -term;
            }
            for b in p.blocks() {
                term *= table[b.bits() as usize].clone();
            }
            acc += term;
        }
        acc
    }

    /// Semi-invariant of the variables selected by `subset`, reading moments
    /// of sub-subsets from `table` (indexed by bitmask over the full set).
    fn cumulant_of_subset(table: &[BigRational], subset: Subset) -> BigRational {
        let indices: Vec<usize> = subset.iter().collect();
        cumulant(indices.len(), |s: Subset| {
            let mut bits = 0u32;
            for i in s.iter() {
                bits |= 1 << indices[i];
            }
            table[bits as usize].clone()
        })
        .unwrap()
    }

    fn arb_rational() -> impl Strategy<Value = BigRational> {
        (-6i64..=6, 1i64..=6).prop_map(|(n, d)| rational(n, d))
    }

    proptest! {
        #[test]
        fn matches_reference_partition_sum(
            m in 1usize..=5,
            values in proptest::collection::vec(arb_rational(), 32),
        ) {
            let table: Vec<BigRational> = (0..1u32 << m)
                .map(|bits| values[bits as usize].clone())
                .collect();
            let fast = cumulant(m, |s: Subset| table[s.bits() as usize].clone()).unwrap();
            prop_assert_eq!(fast, cumulant_reference(m, &table));
        }

        #[test]
        fn moment_cumulant_roundtrip(
            m in 1usize..=6,
            values in proptest::collection::vec(arb_rational(), 64),
        ) {
            // Random exact moment table → all subset semi-invariants → the
            // reconstruction must reproduce the original top moment.
            let table: Vec<BigRational> = (0..1u64 << m)
                .map(|bits| values[bits as usize].clone())
                .collect();
            let reconstructed = moment_from_cumulants(m, |s: Subset| {
                cumulant_of_subset(&table, s)
            })
            .unwrap();
            prop_assert_eq!(reconstructed, table[(1usize << m) - 1].clone());
        }

        #[test]
        fn independent_groups_have_zero_mixed_cumulant(
            m in 2usize..=6,
            split in 1u32..31,
            left in proptest::collection::vec(arb_rational(), 64),
            right in proptest::collection::vec(arb_rational(), 64),
        ) {
            // Product-form moments across a nontrivial split ⇒ the joint
            // semi-invariant of the full set vanishes.
            let full = Subset::full(m).bits();
            let split = split & full;
            prop_assume!(split != 0 && split != full);
            let factor = |table: &[BigRational], bits: u32| {
                if bits == 0 { BigRational::one() } else { table[bits as usize].clone() }
            };
            let mixed = cumulant(m, |s: Subset| {
                factor(&left, s.bits() & split) * factor(&right, s.bits() & !split & full)
            })
            .unwrap();
            prop_assert_eq!(mixed, BigRational::zero());
        }
    }
}
