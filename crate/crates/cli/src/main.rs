//! Command-line front door for the block-spin library: exact coefficient
//! tables, λ-series evaluation, Monte Carlo block experiments, exact
//! small-volume statistics, and the verification suites.
//!
//! Output contract: results go to stdout (a plain table by default, one JSON
//! document with `--json`); progress chatter goes to stderr only. Every
//! command is deterministic given its flags and seed. Exit status is 0
//! exactly when the operation and all of its validations succeed.

mod config;
mod output;
mod points;
mod verify;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use blockspin_core::free_field::PointMultiset;
use blockspin_core::gibbs::empirical::joint_cumulant_estimate;
use blockspin_core::gibbs::experiment::BlockExperiment;
use blockspin_core::gibbs::{exact_moment, exact_semi_invariant, GibbsSpec};
use blockspin_core::lattice::Point;
use blockspin_core::series::{
    coefficient_vn, semi_invariant_series, variance_series, SeriesResult,
};

use config::{or_default, require, resolve, FileConfig};
use output::{
    render_exact, render_series, render_simulate, render_verify, render_vn, series_report, vn_row,
    BlockStats, CovRow, EstimateOut, ExactReport, SimulateReport, VerifyReport, VnReport,
};
use points::{parse_points, render_point};
use verify::Suite;

#[derive(Parser)]
#[command(
    name = "blockspin",
    version,
    about = "Exact and Monte Carlo statistics of block-averaged lattice spins"
)]
struct Cli {
    /// Emit one JSON document instead of a table
    #[arg(long, global = true)]
    json: bool,
    /// key=value file supplying defaults for any value flag (flags win)
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact limiting-variance coefficients as fractions
    Vn {
        /// Lattice dimension (default 1)
        #[arg(long)]
        nu: Option<u32>,
        /// Highest coefficient order to compute
        #[arg(long = "n-max")]
        n_max: Option<u64>,
    },
    /// Evaluate a λ-series: the variance series (--nu) or the series of one
    /// semi-invariant (--b)
    Series {
        /// Lattice dimension for the variance series
        #[arg(long)]
        nu: Option<u32>,
        /// Base points of a semi-invariant series, e.g. "0;1" or "0,0;1,0"
        #[arg(long, allow_hyphen_values = true)]
        b: Option<String>,
        /// Coupling
        #[arg(long, allow_negative_numbers = true)]
        lambda: Option<f64>,
        /// Truncation order (default 6)
        #[arg(long = "n-max")]
        n_max: Option<u64>,
    },
    /// Monte Carlo cumulants of normalized block averages
    Simulate {
        /// Lattice dimension (default 1)
        #[arg(long)]
        nu: Option<u32>,
        /// Volume half side: sites have coordinates in [-n, n] (default 40)
        #[arg(long)]
        n: Option<u32>,
        /// Coupling
        #[arg(long, allow_negative_numbers = true)]
        lambda: Option<f64>,
        /// Block side length (default 4)
        #[arg(long)]
        k: Option<u32>,
        /// Normalization exponent of the block average (default ν)
        #[arg(long, allow_negative_numbers = true)]
        alpha: Option<f64>,
        /// Master seed (default 0)
        #[arg(long)]
        seed: Option<u64>,
        /// Retained samples (default 10000)
        #[arg(long)]
        samples: Option<u64>,
        /// Discarded initial sweeps (default 500)
        #[arg(long = "burn-in")]
        burn_in: Option<u64>,
        /// Sweeps between retained samples (default 4)
        #[arg(long)]
        thin: Option<u64>,
        /// Block sites to observe, e.g. "-1;0" (default: the origin block)
        #[arg(long, allow_hyphen_values = true)]
        taus: Option<String>,
        /// Also dump every retained sample row to this CSV file
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Exact statistics of one small volume by full enumeration
    GibbsExact {
        /// Lattice dimension (default 1)
        #[arg(long)]
        nu: Option<u32>,
        /// Volume half side: sites have coordinates in [-n, n]
        #[arg(long)]
        n: Option<u32>,
        /// Coupling
        #[arg(long, allow_negative_numbers = true)]
        lambda: Option<f64>,
        /// Points whose joint semi-invariant to compute, e.g. "0;1"
        #[arg(long, allow_hyphen_values = true)]
        b: Option<String>,
        /// Points whose product moment to compute (repeat a point to square
        /// it), e.g. "0;0;1"
        #[arg(long, allow_hyphen_values = true)]
        moment: Option<String>,
    },
    /// Run a verification suite and report each check
    Verify {
        /// Which suite to run
        #[arg(value_enum)]
        suite: Suite,
        /// Case count (random instances, bases, or MC samples; suite-specific
        /// default)
        #[arg(long)]
        cases: Option<u64>,
        /// Seed for the suite's random generator (default 14)
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}

fn emit<T: Serialize>(json: bool, report: &T, human: impl FnOnce(&T) -> String) -> Result<()> {
    if json {
        println!("{}", serde_json::to_string_pretty(report)?);
    } else {
        print!("{}", human(report));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::empty(),
    };
    match cli.command {
        Command::Vn { nu, n_max } => cmd_vn(cli.json, &cfg, nu, n_max),
        Command::Series {
            nu,
            b,
            lambda,
            n_max,
        } => cmd_series(cli.json, &cfg, nu, b, lambda, n_max),
        Command::Simulate {
            nu,
            n,
            lambda,
            k,
            alpha,
            seed,
            samples,
            burn_in,
            thin,
            taus,
            out,
        } => {
            let params = SimulateParams {
                nu: or_default(nu, &cfg, "nu", 1)?,
                half_side: or_default(n, &cfg, "n", 40)?,
                lambda: require(lambda, &cfg, "lambda")?,
                k: or_default(k, &cfg, "k", 4)?,
                alpha,
                seed: or_default(seed, &cfg, "seed", 0)?,
                samples: or_default(samples, &cfg, "samples", 10_000)?,
                burn_in: or_default(burn_in, &cfg, "burn_in", 500)?,
                thin: or_default(thin, &cfg, "thin", 4)?,
                taus: resolve(taus, &cfg, "taus")?,
                out: match out {
                    Some(path) => Some(path),
                    None => cfg.get("out").map(PathBuf::from),
                },
            };
            cmd_simulate(cli.json, &cfg, params)
        }
        Command::GibbsExact {
            nu,
            n,
            lambda,
            b,
            moment,
        } => cmd_gibbs_exact(cli.json, &cfg, nu, n, lambda, b, moment),
        Command::Verify { suite, cases, seed } => cmd_verify(cli.json, &cfg, suite, cases, seed),
    }
}

fn cmd_vn(json: bool, cfg: &FileConfig, nu: Option<u32>, n_max: Option<u64>) -> Result<()> {
    let nu = or_default(nu, cfg, "nu", 1)?;
    let n_max = require(n_max, cfg, "n_max")?;
    let mut rows = Vec::new();
    for n in 1..=n_max {
        eprintln!("computing coefficient {n}/{n_max}…");
        let exact = coefficient_vn(nu, n)?;
        rows.push(vn_row(n, &exact));
    }
    let report = VnReport { nu, n_max, rows };
    emit(json, &report, render_vn)
}

fn cmd_series(
    json: bool,
    cfg: &FileConfig,
    nu: Option<u32>,
    b: Option<String>,
    lambda: Option<f64>,
    n_max: Option<u64>,
) -> Result<()> {
    let nu = resolve(nu, cfg, "nu")?;
    let b = resolve(b, cfg, "b")?;
    let lambda = require(lambda, cfg, "lambda")?;
    let n_max = or_default(n_max, cfg, "n_max", 6)?;
    let report = match (nu, b) {
        (Some(nu), None) => {
            let r: SeriesResult = variance_series(nu, lambda, n_max)?;
            series_report("variance", Some(nu), None, n_max, &r)
        }
        (None, Some(text)) => {
            let points = parse_points(&text)?;
            let r = semi_invariant_series(&points, lambda, n_max)?;
            let base = points.iter().map(render_point).collect();
            series_report("semi-invariant", None, Some(base), n_max, &r)
        }
        (Some(_), Some(_)) => {
            bail!("give either --nu (variance series) or --b (semi-invariant series), not both")
        }
        (None, None) => bail!("one of --nu or --b is required"),
    };
    emit(json, &report, render_series)
}

struct SimulateParams {
    nu: u32,
    half_side: u32,
    lambda: f64,
    k: u32,
    alpha: Option<f64>,
    seed: u64,
    samples: u64,
    burn_in: u64,
    thin: u64,
    taus: Option<String>,
    out: Option<PathBuf>,
}

fn cmd_simulate(json: bool, cfg: &FileConfig, params: SimulateParams) -> Result<()> {
    let alpha = or_default(params.alpha, cfg, "alpha", f64::from(params.nu))?;
    let taus = match &params.taus {
        Some(text) => parse_points(text)?,
        None => vec![Point::origin(params.nu)],
    };
    if taus.iter().any(|t| t.dim() != params.nu as usize) {
        bail!(
            "block sites must have {} coordinate(s) in dimension {}",
            params.nu,
            params.nu
        );
    }
    eprintln!(
        "sampling {} sweeps on {} sites…",
        params.burn_in + params.samples * params.thin,
        (2 * u64::from(params.half_side) + 1).pow(params.nu)
    );
    let experiment = BlockExperiment {
        nu: params.nu,
        half_side: params.half_side,
        lambda: params.lambda,
        scale: params.k,
        alpha,
        taus: taus.clone(),
        seed: params.seed,
        samples: params.samples,
        burn_in: params.burn_in,
        thin: params.thin,
    };
    let rows = experiment.run()?;

    let csv_path = match &params.out {
        Some(path) => {
            write_sample_csv(path, &rows)?;
            Some(path.display().to_string())
        }
        None => None,
    };

    let estimate = |indices: &[usize]| -> Result<EstimateOut> {
        let e = joint_cumulant_estimate(&rows, indices)?;
        Ok(EstimateOut {
            value: e.value,
            std_error: e.std_error,
        })
    };
    let mut blocks = Vec::with_capacity(taus.len());
    for (i, tau) in taus.iter().enumerate() {
        blocks.push(BlockStats {
            tau: render_point(tau),
            mean: estimate(&[i])?,
            variance: estimate(&[i, i])?,
            third: estimate(&[i, i, i])?,
            fourth: estimate(&[i, i, i, i])?,
        });
    }
    let mut covariances = Vec::new();
    for i in 0..taus.len() {
        for j in i + 1..taus.len() {
            covariances.push(CovRow {
                pair: [render_point(&taus[i]), render_point(&taus[j])],
                covariance: estimate(&[i, j])?,
            });
        }
    }
    let report = SimulateReport {
        nu: params.nu,
        half_side: params.half_side,
        lambda: params.lambda,
        k: params.k,
        alpha,
        seed: params.seed,
        samples: params.samples,
        burn_in: params.burn_in,
        thin: params.thin,
        taus: taus.iter().map(render_point).collect(),
        blocks,
        covariances,
        csv_path,
    };
    emit(json, &report, render_simulate)
}

/// One row per retained sample; block columns are indexed in the order of
/// the requested block sites (`y0`, `y1`, …) to keep the header free of
/// coordinate punctuation.
fn write_sample_csv(path: &PathBuf, rows: &[Vec<f64>]) -> Result<()> {
    let file = File::create(path)
        .with_context(|| format!("cannot create output file {}", path.display()))?;
    let mut w = BufWriter::new(file);
    let width = rows.first().map_or(0, Vec::len);
    let header: Vec<String> = (0..width).map(|i| format!("y{i}")).collect();
    writeln!(w, "sample,{}", header.join(","))?;
    for (i, row) in rows.iter().enumerate() {
        write!(w, "{i}")?;
        for v in row {
            write!(w, ",{v:e}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

fn cmd_gibbs_exact(
    json: bool,
    cfg: &FileConfig,
    nu: Option<u32>,
    n: Option<u32>,
    lambda: Option<f64>,
    b: Option<String>,
    moment: Option<String>,
) -> Result<()> {
    let nu = or_default(nu, cfg, "nu", 1)?;
    let half_side = require(n, cfg, "n")?;
    let lambda = require(lambda, cfg, "lambda")?;
    let b = resolve(b, cfg, "b")?;
    let moment = resolve(moment, cfg, "moment")?;
    let spec = GibbsSpec::new(nu, half_side, lambda)?;
    let (kind, text) = match (b, moment) {
        (Some(text), None) => ("semi-invariant", text),
        (None, Some(text)) => ("moment", text),
        (Some(_), Some(_)) => bail!("give either --b or --moment, not both"),
        (None, None) => bail!("one of --b or --moment is required"),
    };
    let points = parse_points(&text)?;
    if points.iter().any(|t| t.dim() != nu as usize) {
        bail!("points must have {nu} coordinate(s) in dimension {nu}");
    }
    eprintln!("enumerating configurations…");
    let value = match kind {
        "semi-invariant" => exact_semi_invariant(&spec, &points)?,
        _ => exact_moment(&spec, &PointMultiset::from_points(&points)?)?,
    };
    let report = ExactReport {
        nu,
        half_side,
        lambda,
        kind: kind.to_string(),
        points: points.iter().map(render_point).collect(),
        value,
    };
    emit(json, &report, render_exact)
}

fn cmd_verify(
    json: bool,
    cfg: &FileConfig,
    suite: Suite,
    cases: Option<u64>,
    seed: Option<u64>,
) -> Result<()> {
    let cases = or_default(cases, cfg, "cases", suite.default_cases())?;
    let seed = or_default(seed, cfg, "seed", 14)?;
    if cases == 0 {
        bail!("--cases must be at least 1");
    }
    let report: VerifyReport = verify::run_suite(suite, cases, seed)?;
    emit(json, &report, render_verify)?;
    if !report.passed {
        let failed: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| !c.ok)
            .map(|c| c.name.as_str())
            .collect();
        return Err(anyhow!(
            "suite {} failed {} check(s): {}",
            report.suite,
            failed.len(),
            failed.join(", ")
        ));
    }
    Ok(())
}
