//! Report types shared by every subcommand, with two renderings: a plain
//! table for humans (default) and a single JSON document (`--json`).
//!
//! Exact rationals are carried as `p/q` strings so JSON output loses
//! nothing; floats are printed with enough digits to round-trip.

use serde::{Deserialize, Serialize};

use blockspin_core::series::{render_rational, SeriesResult};
use blockspin_core::Rational;

/// One exact coefficient row: order, `p/q`, and its float value.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VnRow {
    pub n: u64,
    pub exact: String,
    pub value: f64,
}

/// Table of limiting-variance coefficients for one dimension.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VnReport {
    pub nu: u32,
    pub n_max: u64,
    pub rows: Vec<VnRow>,
}

/// One λ-series term: power, exact coefficient, numeric contribution.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermRow {
    pub order: u64,
    pub coefficient: String,
    pub value: f64,
}

/// A truncated series evaluation with tail estimates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeriesReport {
    /// `"variance"` or `"semi-invariant"`.
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<u32>,
    /// Base points for a semi-invariant series.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base: Option<Vec<String>>,
    pub lambda: f64,
    pub n_max: u64,
    pub terms: Vec<TermRow>,
    pub partial_sum: f64,
    /// Proven tail bound; absent when the coupling lies outside the proven
    /// convergence radius.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rigorous_tail: Option<f64>,
    /// Heuristic geometric continuation from the last nonzero terms.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub empirical_tail: Option<f64>,
}

/// A point estimate with its jackknife standard error.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EstimateOut {
    pub value: f64,
    pub std_error: f64,
}

/// Per-block-site cumulant estimates from one Monte Carlo run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlockStats {
    pub tau: String,
    pub mean: EstimateOut,
    pub variance: EstimateOut,
    pub third: EstimateOut,
    pub fourth: EstimateOut,
}

/// Cross-covariance between two block sites.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CovRow {
    pub pair: [String; 2],
    pub covariance: EstimateOut,
}

/// Full record of a Monte Carlo block-average experiment.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimulateReport {
    pub nu: u32,
    pub half_side: u32,
    pub lambda: f64,
    pub k: u32,
    pub alpha: f64,
    pub seed: u64,
    pub samples: u64,
    pub burn_in: u64,
    pub thin: u64,
    pub taus: Vec<String>,
    pub blocks: Vec<BlockStats>,
    pub covariances: Vec<CovRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv_path: Option<String>,
}

/// One exact finite-volume statistic.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExactReport {
    pub nu: u32,
    pub half_side: u32,
    pub lambda: f64,
    /// `"semi-invariant"` or `"moment"`.
    pub kind: String,
    pub points: Vec<String>,
    pub value: f64,
}

/// One verification check with its outcome.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

/// Result of running one verification suite.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: String,
    pub cases: u64,
    pub seed: u64,
    pub checks: Vec<CheckRow>,
    pub passed: bool,
}

/// Converts an exact coefficient to a display row.
pub fn vn_row(n: u64, exact: &Rational) -> VnRow {
    use num_traits::ToPrimitive;
    VnRow {
        n,
        exact: render_rational(exact),
        value: exact.to_f64().unwrap_or(f64::NAN),
    }
}

/// Converts a core series result to the report form (infinite tail → None).
pub fn series_report(
    kind: &str,
    nu: Option<u32>,
    base: Option<Vec<String>>,
    n_max: u64,
    r: &SeriesResult,
) -> SeriesReport {
    SeriesReport {
        kind: kind.to_string(),
        nu,
        base,
        lambda: r.lambda,
        n_max,
        terms: r
            .terms
            .iter()
            .map(|t| TermRow {
                order: t.order,
                coefficient: render_rational(&t.coefficient),
                value: t.value,
            })
            .collect(),
        partial_sum: r.partial_sum,
        rigorous_tail: if r.rigorous_tail.is_finite() {
            Some(r.rigorous_tail)
        } else {
            None
        },
        empirical_tail: r.empirical_tail,
    }
}

pub fn render_vn(r: &VnReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "limiting variance coefficients, dimension {}\n",
        r.nu
    ));
    out.push_str("n      exact            value\n");
    for row in &r.rows {
        out.push_str(&format!(
            "{:<6} {:<16} {:.16e}\n",
            row.n, row.exact, row.value
        ));
    }
    out
}

pub fn render_series(r: &SeriesReport) -> String {
    let mut out = String::new();
    match (&r.nu, &r.base) {
        (Some(nu), _) => out.push_str(&format!(
            "variance series, dimension {nu}, λ = {}, orders 0..={}\n",
            r.lambda, r.n_max
        )),
        (_, Some(base)) => out.push_str(&format!(
            "semi-invariant series, base [{}], λ = {}, orders 0..={}\n",
            base.join("; "),
            r.lambda,
            r.n_max
        )),
        _ => {}
    }
    out.push_str("order  coefficient            term value\n");
    for t in &r.terms {
        out.push_str(&format!(
            "{:<6} {:<22} {:.16e}\n",
            t.order, t.coefficient, t.value
        ));
    }
    out.push_str(&format!("partial sum     {:.16e}\n", r.partial_sum));
    match r.rigorous_tail {
        Some(t) => out.push_str(&format!("rigorous tail   {t:.3e}\n")),
        None => out.push_str("rigorous tail   unavailable (coupling outside the proven radius)\n"),
    }
    match r.empirical_tail {
        Some(t) => out.push_str(&format!("heuristic tail  {t:.3e} (last-term ratio)\n")),
        None => out.push_str("heuristic tail  n/a (no contraction ratio)\n"),
    }
    out
}

pub fn render_simulate(r: &SimulateReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "block averages: dimension {}, half side {}, λ = {}, k = {}, α = {}\n",
        r.nu, r.half_side, r.lambda, r.k, r.alpha
    ));
    out.push_str(&format!(
        "seed {}, {} samples (burn-in {}, thinning {})\n",
        r.seed, r.samples, r.burn_in, r.thin
    ));
    out.push_str("block site   statistic   estimate                std error\n");
    for b in &r.blocks {
        for (name, e) in [
            ("mean", &b.mean),
            ("variance", &b.variance),
            ("third", &b.third),
            ("fourth", &b.fourth),
        ] {
            out.push_str(&format!(
                "{:<12} {:<11} {:<+23.16e} {:.3e}\n",
                b.tau, name, e.value, e.std_error
            ));
        }
    }
    for c in &r.covariances {
        out.push_str(&format!(
            "cov({}; {})   {:<+23.16e} {:.3e}\n",
            c.pair[0], c.pair[1], c.covariance.value, c.covariance.std_error
        ));
    }
    if let Some(path) = &r.csv_path {
        out.push_str(&format!("samples written to {path}\n"));
    }
    out
}

pub fn render_exact(r: &ExactReport) -> String {
    format!(
        "exact {} on dimension {}, half side {}, λ = {}\npoints [{}]\nvalue {:.16e}\n",
        r.kind,
        r.nu,
        r.half_side,
        r.lambda,
        r.points.join("; "),
        r.value
    )
}

pub fn render_verify(r: &VerifyReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "suite {} (cases {}, seed {})\n",
        r.suite, r.cases, r.seed
    ));
    for c in &r.checks {
        out.push_str(&format!(
            "check {:<34} {} — {}\n",
            c.name,
            if c.ok { "PASS" } else { "FAIL" },
            c.detail
        ));
    }
    out.push_str(if r.passed {
        "suite passed\n"
    } else {
        "suite FAILED\n"
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_none_maps_to_absent_json_key() {
        let r = SeriesReport {
            kind: "variance".to_string(),
            nu: Some(1),
            base: None,
            lambda: 0.5,
            n_max: 2,
            terms: vec![],
            partial_sum: 1.0,
            rigorous_tail: None,
            empirical_tail: None,
        };
        let json = serde_json::to_string(&r).unwrap();
        assert!(!json.contains("rigorous_tail"));
        assert!(!json.contains("\"base\""));
        let back: SeriesReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.rigorous_tail, None);
    }

    #[test]
    fn verify_rendering_flags_failures() {
        let r = VerifyReport {
            suite: "parity".to_string(),
            cases: 3,
            seed: 0,
            checks: vec![CheckRow {
                name: "x".to_string(),
                ok: false,
                detail: "boom".to_string(),
            }],
            passed: false,
        };
        let text = render_verify(&r);
        assert!(text.contains("FAIL"));
        assert!(text.contains("suite FAILED"));
    }
}
