//! The cluster-expansion series engine: dimension-dependent constants, exact
//! Taylor coefficients of limiting semi-invariants in the coupling λ, the
//! limiting-variance coefficients Vₙ, truncated evaluation with rigorous and
//! heuristic tail bounds, and cylinder probabilities of the limit field.
//!
//! Every coefficient is an exact rational obtained from finite sums of
//! free-measure semi-invariants over connecting bond families; floating point
//! enters only when a truncated series is evaluated at a concrete λ.

use crate::family::{enumerate_connected, Family, FamilyError};
use crate::free_field::{free_semi_invariant, FreeFieldError};
use crate::lattice::Point;
use crate::Rational;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

/// Errors from series evaluation.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum SeriesError {
    Family(FamilyError),
    FreeField(FreeFieldError),
    /// The lattice dimension must be ≥ 1.
    InvalidDimension,
    /// λ must be a finite real.
    NonFiniteCoupling,
    /// The tail formulas are only valid on 0 < x < 1/2.
    TailDomain,
    /// Cylinder data: sign count must match point count.
    LengthMismatch { points: usize, signs: usize },
    /// Cylinder data: signs must be ±1.
    BadSign,
    /// Cylinder data: points must be distinct.
    DuplicatePoint,
}

impl fmt::Display for SeriesError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeriesError::Family(e) => write!(f, "{e}"),
            SeriesError::FreeField(e) => write!(f, "{e}"),
            SeriesError::InvalidDimension => write!(f, "lattice dimension must be >= 1"),
            SeriesError::NonFiniteCoupling => write!(f, "coupling must be finite"),
            SeriesError::TailDomain => write!(f, "tail formulas require 0 < x < 1/2"),
            SeriesError::LengthMismatch { points, signs } => {
                write!(f, "{points} points but {signs} signs")
            }
            SeriesError::BadSign => write!(f, "signs must be +1 or -1"),
            SeriesError::DuplicatePoint => write!(f, "cylinder points must be distinct"),
        }
    }
}

impl core::error::Error for SeriesError {}

impl From<FamilyError> for SeriesError {
    fn from(e: FamilyError) -> SeriesError {
        SeriesError::Family(e)
    }
}

impl From<FreeFieldError> for SeriesError {
    fn from(e: FreeFieldError) -> SeriesError {
        SeriesError::FreeField(e)
    }
}

/// The dimension-dependent constants of the convergence and estimation
/// bounds.
///
/// `c3` (= `c1`) grows like e^{L²}, so it saturates to +∞ in `f64` from
/// ν = 5 upward and `c_nu`/`c` correspondingly underflow to 0; `ln_c3` stays
/// finite and is what the bound checks use.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct ExpansionConstants {
    /// Lattice dimension ν ≥ 1.
    pub nu: u32,
    /// Maximum admissible link degree L = 4ν + 1.
    pub link_bound: u64,
    /// C₁ = 3L·e^{L²+1}.
    pub c1: f64,
    /// C₂ = 4ν² = (2ν)², the per-order family-count base.
    pub c2: f64,
    /// C₃ = C₁, the semi-invariant growth base.
    pub c3: f64,
    /// ln C₃ = ln(3L) + L² + 1, always finite.
    pub ln_c3: f64,
    /// Convergence radius guard C_ν = 1 / (2 C₂ C₃).
    pub c_nu: f64,
    /// Overall small-coupling constant C = min{1/(2C₂C₃), 1/(8C₂C₃³)}.
    pub c: f64,
}

/// The expansion constants for dimension ν ≥ 1.
pub fn constants(nu: u32) -> Result<ExpansionConstants, SeriesError> {
    if nu == 0 {
        return Err(SeriesError::InvalidDimension);
    }
    let link_bound = 4 * u64::from(nu) + 1;
    let l = link_bound as f64;
    let ln_c3 = libm::log(3.0 * l) + l * l + 1.0;
    let c3 = libm::exp(ln_c3);
    let c2 = (2.0 * f64::from(nu)) * (2.0 * f64::from(nu));
    let c_nu = 1.0 / (2.0 * c2 * c3);
    let c = c_nu.min(1.0 / (8.0 * c2 * c3 * c3 * c3));
    Ok(ExpansionConstants {
        nu,
        link_bound,
        c1: c3,
        c2,
        c3,
        ln_c3,
        c_nu,
        c,
    })
}

/// Closed form of the shifted geometric tail Σ_{n=l+1..∞} (n−l)·xⁿ
/// = x^{l+1} / (1−x)², valid on 0 < x < 1/2.
pub fn tail_geometric(x: f64, l: u64) -> Result<f64, SeriesError> {
    if !(x > 0.0 && x < 0.5) {
        return Err(SeriesError::TailDomain);
    }
    Ok(libm::pow(x, (l + 1) as f64) / ((1.0 - x) * (1.0 - x)))
}

/// Upper bound m! / (1−x)^{m+1} for the polynomial-weighted geometric sum
/// Σ_{n=0..∞} (n+1)^{m−1}·xⁿ, valid on 0 < x < 1/2, m ≥ 1.
pub fn tail_polynomial(x: f64, m: u64) -> Result<f64, SeriesError> {
    if !(x > 0.0 && x < 0.5) || m == 0 {
        return Err(SeriesError::TailDomain);
    }
    let m_fact: f64 = (1..=m).map(|j| j as f64).product();
    Ok(m_fact / libm::pow(1.0 - x, (m + 1) as f64))
}

/// One term of a truncated λ-series: exact coefficient and its value at the
/// evaluation coupling.
#[derive(Clone, PartialEq, Debug)]
pub struct SeriesTerm {
    /// Power of λ.
    pub order: u64,
    /// Exact Taylor coefficient.
    pub coefficient: Rational,
    /// coefficient · λ^order.
    pub value: f64,
}

/// A truncated λ-series with tail information.
#[derive(Clone, PartialEq, Debug)]
pub struct SeriesResult {
    /// Evaluation coupling.
    pub lambda: f64,
    /// Terms of order 0..=n_max, in order.
    pub terms: Vec<SeriesTerm>,
    /// Σ of the listed term values.
    pub partial_sum: f64,
    /// Rigorous bound on everything past the truncation, from the proven
    /// coefficient bounds; +∞ when λ lies outside the proven radius.
    pub rigorous_tail: f64,
    /// Heuristic continuation estimate from the decay ratio of the last two
    /// nonzero terms; `None` when no contraction ratio is available.
    pub empirical_tail: Option<f64>,
}

impl SeriesResult {
    fn from_coefficients(lambda: f64, coeffs: Vec<(u64, Rational)>, rigorous_tail: f64) -> SeriesResult {
        let mut terms = Vec::with_capacity(coeffs.len());
        let mut partial_sum = 0.0;
        for (order, coefficient) in coeffs {
            let value = rational_to_f64(&coefficient) * libm::pow(lambda, order as f64);
            partial_sum += value;
            terms.push(SeriesTerm {
                order,
                coefficient,
                value,
            });
        }
        let empirical_tail = empirical_tail(&terms);
        SeriesResult {
            lambda,
            terms,
            partial_sum,
            rigorous_tail,
            empirical_tail,
        }
    }

    /// Plain-text table of the terms and tails, one row per order.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str("order  coefficient            term value             cumulative\n");
        let mut cumulative = 0.0;
        for t in &self.terms {
            cumulative += t.value;
            out.push_str(&format!(
                "{:<6} {:<22} {:<22.16e} {:.16e}\n",
                t.order,
                render_rational(&t.coefficient),
                t.value,
                cumulative,
            ));
        }
        out.push_str(&format!("partial sum     {:.16e}\n", self.partial_sum));
        if self.rigorous_tail.is_finite() {
            out.push_str(&format!("rigorous tail   {:.3e}\n", self.rigorous_tail));
        } else {
            out.push_str("rigorous tail   unavailable (coupling outside the proven radius)\n");
        }
        match self.empirical_tail {
            Some(t) => out.push_str(&format!("heuristic tail  {:.3e} (last-term ratio)\n", t)),
            None => out.push_str("heuristic tail  n/a (no contraction ratio)\n"),
        }
        out
    }
}

/// Renders an exact rational as `p/q` (always with an explicit denominator).
pub fn render_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Last-term-ratio continuation: fit a geometric decay to the last two
/// nonzero terms and sum it. Heuristic only — no validity guarantee.
fn empirical_tail(terms: &[SeriesTerm]) -> Option<f64> {
    let nonzero: Vec<&SeriesTerm> = terms.iter().filter(|t| t.value != 0.0).collect();
    let [.., prev, last] = nonzero.as_slice() else {
        return None;
    };
    let gap = (last.order - prev.order) as f64;
    let per_order = libm::pow((last.value / prev.value).abs(), 1.0 / gap);
    if !(per_order > 0.0 && per_order < 1.0) {
        return None;
    }
    Some(last.value.abs() * per_order / (1.0 - per_order))
}

fn check_lambda(lambda: f64) -> Result<(), SeriesError> {
    if lambda.is_finite() {
        Ok(())
    } else {
        Err(SeriesError::NonFiniteCoupling)
    }
}

/// Exact λⁿ-coefficient aₙ of the limiting semi-invariant ⟨Q'_{t₁}, …, Q'_{t_m}⟩_λ:
/// the sum over all order-n families γ connecting the base of
/// (1/γ!)·⟨Q'_b, Φ'_γ⟩₀.
pub fn semi_invariant_coefficient(b: &[Point], n: u64) -> Result<Rational, SeriesError> {
    let mut acc = Rational::zero();
    for gamma in enumerate_connected(b, n)? {
        acc += coefficient_term(b, &gamma)?;
    }
    Ok(acc)
}

fn coefficient_term(b: &[Point], gamma: &Family) -> Result<Rational, SeriesError> {
    let value = if gamma.is_empty() {
        crate::free_field::free_cumulant(
            &b.iter()
                .map(|t| crate::free_field::PointMultiset::spin(t.clone()))
                .collect::<Vec<_>>(),
        )?
    } else {
        free_semi_invariant(b, gamma)?
    };
    if value.is_zero() {
        return Ok(value);
    }
    Ok(value / Rational::from_integer(gamma.factorial()))
}

/// Exact coefficient Vₙ of the limiting-variance series V = 1 + Σ_{n≥1} Vₙ λⁿ:
/// for each order-n family γ connecting the origin, the inner sum over
/// support sites t ≠ 0 of (1/γ!)·⟨Q_0, Q_t, Φ'_γ⟩₀.
pub fn coefficient_vn(nu: u32, n: u64) -> Result<Rational, SeriesError> {
    if nu == 0 {
        return Err(SeriesError::InvalidDimension);
    }
    let origin = Point::origin(nu);
    let mut acc = Rational::zero();
    for gamma in enumerate_connected(core::slice::from_ref(&origin), n)? {
        let inv_factorial = Rational::new(BigInt::one(), gamma.factorial());
        for t in gamma.support() {
            if t == origin {
                continue;
            }
            let pair = [origin.clone(), t];
            let v = free_semi_invariant(&pair, &gamma)?;
            if !v.is_zero() {
                acc += v * inv_factorial.clone();
            }
        }
    }
    Ok(acc)
}

/// Memoizing cache for [`coefficient_vn`] keyed by (ν, n); the coefficients
/// are expensive to enumerate and reused across series evaluations.
#[derive(Default, Debug)]
pub struct VnTable {
    cache: BTreeMap<(u32, u64), Rational>,
}

impl VnTable {
    pub fn new() -> VnTable {
        VnTable::default()
    }

    pub fn get(&mut self, nu: u32, n: u64) -> Result<Rational, SeriesError> {
        if let Some(v) = self.cache.get(&(nu, n)) {
            return Ok(v.clone());
        }
        let v = coefficient_vn(nu, n)?;
        self.cache.insert((nu, n), v.clone());
        Ok(v)
    }
}

/// Truncated limiting-variance series V(λ) = 1 + Σ_{n=1..n_max} Vₙ λⁿ with a
/// rigorous tail bound from |Vₙ| ≤ 2C₃²·n·(C₂C₃)ⁿ.
pub fn variance_series(nu: u32, lambda: f64, n_max: u64) -> Result<SeriesResult, SeriesError> {
    variance_series_with(&mut VnTable::new(), nu, lambda, n_max)
}

/// [`variance_series`] reusing a coefficient cache.
pub fn variance_series_with(
    table: &mut VnTable,
    nu: u32,
    lambda: f64,
    n_max: u64,
) -> Result<SeriesResult, SeriesError> {
    check_lambda(lambda)?;
    let k = constants(nu)?;
    let mut coeffs = Vec::with_capacity(n_max as usize + 1);
    coeffs.push((0, Rational::one()));
    for n in 1..=n_max {
        coeffs.push((n, table.get(nu, n)?));
    }
    // Σ_{n>l} 2C₃²·n·xⁿ = 2C₃²·x^{l+1}·[1/(1−x)² + l/(1−x)] for x < 1.
    let x = lambda.abs() * k.c2 * k.c3;
    let rigorous_tail = if x < 1.0 && x > 0.0 {
        let l = n_max as f64;
        2.0 * k.c3 * k.c3
            * libm::pow(x, l + 1.0)
            * (1.0 / ((1.0 - x) * (1.0 - x)) + l / (1.0 - x))
    } else if x == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(SeriesResult::from_coefficients(lambda, coeffs, rigorous_tail))
}

/// Truncated λ-series of the limiting semi-invariant ⟨Q'_{t₁}, …, Q'_{t_m}⟩_λ
/// for the base sequence `b`, with the rigorous tail bound from
/// |aₙ| ≤ C₃^{m+n}·m!·C₂ⁿ.
pub fn semi_invariant_series(
    b: &[Point],
    lambda: f64,
    n_max: u64,
) -> Result<SeriesResult, SeriesError> {
    check_lambda(lambda)?;
    let nu = b
        .first()
        .ok_or(SeriesError::Family(FamilyError::EmptyBase))?
        .dim() as u32;
    let k = constants(nu)?;
    let mut coeffs = Vec::with_capacity(n_max as usize + 1);
    for n in 0..=n_max {
        coeffs.push((n, semi_invariant_coefficient(b, n)?));
    }
    // Σ_{n>l} C₃^m·m!·xⁿ = C₃^m·m!·x^{l+1}/(1−x) for x < 1, x = |λ|C₂C₃.
    let m = b.len() as f64;
    let x = lambda.abs() * k.c2 * k.c3;
    let rigorous_tail = if x < 1.0 && x > 0.0 {
        let ln_prefactor: f64 = m * k.ln_c3 + (1..=b.len()).map(|j| libm::log(j as f64)).sum::<f64>();
        libm::exp(ln_prefactor + (n_max as f64 + 1.0) * libm::log(x)) / (1.0 - x)
    } else if x == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(SeriesResult::from_coefficients(lambda, coeffs, rigorous_tail))
}

/// Probability that the limit field takes the signs `signs` at the distinct
/// sites `points`, computed from truncated semi-invariant series:
///
/// P{ω(tᵢ) = aᵢ ∀i} = ((−1)^k / 2^m) Σ_{T'⊆T} f(Q_{T'}) ∏_{tᵢ∈T∖T'} aᵢ,
///
/// where k = #{i : aᵢ = −1} and the truncated moments f(Q_{T'}) are
/// reconstructed from series-evaluated semi-invariants of the sub-sequences.
pub fn cylinder_probability(
    points: &[Point],
    signs: &[i8],
    lambda: f64,
    n_max: u64,
) -> Result<f64, SeriesError> {
    check_lambda(lambda)?;
    if points.len() != signs.len() {
        return Err(SeriesError::LengthMismatch {
            points: points.len(),
            signs: signs.len(),
        });
    }
    if signs.iter().any(|&a| a != 1 && a != -1) {
        return Err(SeriesError::BadSign);
    }
    for (i, t) in points.iter().enumerate() {
        if points[..i].contains(t) {
            return Err(SeriesError::DuplicatePoint);
        }
    }
    let m = points.len();
    if m == 0 {
        return Ok(1.0); // the empty cylinder is the whole space
    }
    // Truncated semi-invariant of each nonempty subset of the sites.
    let mut kappa = alloc::vec![0.0f64; 1 << m];
    for (mask, slot) in kappa.iter_mut().enumerate().skip(1) {
        let sub: Vec<Point> = (0..m)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| points[i].clone())
            .collect();
        *slot = semi_invariant_series(&sub, lambda, n_max)?.partial_sum;
    }
    // Truncated moments by partition sum over the cached semi-invariants.
    let moment_of = |mask: usize| -> f64 {
        if mask == 0 {
            return 1.0;
        }
        let indices: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
        crate::cumulant::moment_from_cumulants(indices.len(), |s: crate::cumulant::Subset| {
            let mut sub_mask = 0usize;
            for i in s.iter() {
                sub_mask |= 1 << indices[i];
            }
            kappa[sub_mask]
        })
        .expect("subset arity is within the cap")
    };
    let negatives = signs.iter().filter(|&&a| a == -1).count();
    let mut acc = 0.0;
    for mask in 0usize..(1 << m) {
        let mut sign_product = 1.0;
        for (i, &a) in signs.iter().enumerate() {
            if mask & (1 << i) == 0 {
                sign_product *= f64::from(a);
            }
        }
        acc += moment_of(mask) * sign_product;
    }
    let parity = if negatives % 2 == 0 { 1.0 } else { -1.0 };
    Ok(parity * acc / libm::pow(2.0, m as f64))
}
