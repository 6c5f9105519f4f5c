use std::io::Read;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use apn_core::algebra::AlgebraTag;
use apn_core::chart::ProjectiveSpace;
use apn_core::error::Error;
use apn_core::frame_spec::FrameSpec;
use apn_core::linalg::pairwise_sum;
use apn_core::sampling::{random_frame_rows, rng_for};
use apn_core::symmetry;
use apn_core::variation::{self, PointAnalysis};

use crate::args::Cli;
use crate::verify;

/// Outcome of a subcommand that produced a report.
pub struct Outcome {
    pub report: Value,
    pub passed: bool,
}

#[derive(Debug)]
pub enum Failure {
    /// Bad flags or input files: exit 2.
    Usage(String),
    /// Computation error: exit 1.
    Compute(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_)
            | Error::FrameSpec(_)
            | Error::Shape(_)
            | Error::Index(_)
            | Error::NonOrthonormal(_)
            | Error::SpinFactorArithmetic(_)
            | Error::TagMismatch(..) => Failure::Usage(e.to_string()),
            _ => Failure::Compute(e.to_string()),
        }
    }
}

fn json<T: Serialize>(v: &T) -> Result<Value, Failure> {
    serde_json::to_value(v).map_err(|e| Failure::Compute(e.to_string()))
}

fn projective_space(cli: &Cli) -> Result<ProjectiveSpace, Failure> {
    let tag = cli.tag().map_err(Failure::Usage)?;
    match tag {
        AlgebraTag::SpinFactor(m) => match cli.n {
            None | Some(1) => Ok(ProjectiveSpace::sphere(m)?),
            Some(n) => Err(Failure::Usage(format!("--algebra Rm takes --n 1 (got {n})"))),
        },
        t => Ok(ProjectiveSpace::new(t, cli.n.unwrap_or(2))?),
    }
}

pub fn verify(cli: &Cli) -> Result<Outcome, Failure> {
    let tol = cli.tolerances().map_err(Failure::Usage)?;
    let space = projective_space(cli)?;
    let report = verify::run(&space, cli.seed, cli.samples, tol)?;
    for s in &report.suites {
        let mark = match (s.passed, s.informational) {
            (true, _) => "ok  ",
            (false, true) => "info",
            (false, false) => "FAIL",
        };
        eprintln!("{mark} {:<40} residual {:.3e} tol {:.1e}", s.name, s.residual, s.tolerance);
    }
    Ok(Outcome {
        passed: report.passed,
        report: json(&report)?,
    })
}

pub fn secvar(cli: &Cli, frame: &Path) -> Result<Outcome, Failure> {
    let tol = cli.tolerances().map_err(Failure::Usage)?;
    let text = if frame.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::Usage(format!("stdin: {e}")))?;
        s
    } else {
        std::fs::read_to_string(frame).map_err(|e| Failure::Usage(format!("{}: {e}", frame.display())))?
    };
    let spec = FrameSpec::from_json(&text)?;
    let (space, frame) = spec.build(tol.algebraic)?;
    let report = variation::variation_report(&space, &frame, tol)?;
    let (_, bf_sff, cj_sff) = report.residuals();
    let agree = bf_sff <= tol.crosscheck;
    if !agree {
        eprintln!("brute-force and second-fundamental-form traces differ by {bf_sff:.3e}");
    }
    if let Some(r) = cj_sff.filter(|r| *r > tol.crosscheck) {
        eprintln!("closed-form trace differs from the second-fundamental-form trace by {r:.3e}");
    }
    Ok(Outcome {
        passed: agree,
        report: json(&report)?,
    })
}

#[derive(Serialize)]
struct Histogram {
    edges: Vec<f64>,
    counts: Vec<usize>,
}

#[derive(Serialize)]
struct SampleReport {
    algebra: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    n: usize,
    p: usize,
    samples: usize,
    seed: u64,
    min: f64,
    max: f64,
    mean: f64,
    tolerance: f64,
    zero_trace: usize,
    zero_trace_not_invariant: usize,
    histogram: Histogram,
    passed: bool,
}

const BINS: usize = 10;

pub fn sample(cli: &Cli) -> Result<Outcome, Failure> {
    let tol = cli.tolerances().map_err(Failure::Usage)?;
    let space = projective_space(cli)?;
    let d = space.dim();
    let p = cli.p.unwrap_or(1);
    if p == 0 || p > d {
        return Err(Failure::Usage(format!("--p must lie in 1..={d}")));
    }
    let origin = PointAnalysis::new(&space, &space.origin())?;
    let results = (0..cli.samples)
        .into_par_iter()
        .map(|i| -> Result<(f64, bool), Error> {
            let mut rng = rng_for(cli.seed, i as u64);
            let rows = random_frame_rows(&mut rng, d, p);
            let (t, _) = origin.trace_bruteforce(&rows, tol.algebraic)?;
            let invariant = if t.abs() <= tol.crosscheck && !space.tag().is_spin_factor() {
                let frame = space.frame_from_orthonormal(&space.origin(), &rows, tol.algebraic)?;
                variation::classify_frame(&space, &frame, tol.crosscheck)?.failing.is_empty()
            } else {
                true
            };
            Ok((t, invariant))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let traces: Vec<f64> = results.iter().map(|r| r.0).collect();
    let min = traces.iter().copied().fold(f64::INFINITY, f64::min);
    let max = traces.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let zero_trace = traces.iter().filter(|t| t.abs() <= tol.crosscheck).count();
    let zero_trace_not_invariant = results.iter().filter(|r| r.0.abs() <= tol.crosscheck && !r.1).count();
    let width = (max - min) / BINS as f64;
    let edges: Vec<f64> = (0..=BINS).map(|k| min + width * k as f64).collect();
    let mut counts = vec![0; BINS];
    for t in &traces {
        let k = if width > 0.0 { ((t - min) / width) as usize } else { 0 };
        counts[k.min(BINS - 1)] += 1;
    }
    let passed = max <= tol.crosscheck && zero_trace_not_invariant == 0;
    if !passed {
        eprintln!("largest trace {max:.6e}; zero-trace frames without J-invariance: {zero_trace_not_invariant}");
    }
    let (algebra, m) = match space.tag() {
        AlgebraTag::SpinFactor(m) => ("Rm".to_string(), Some(m)),
        t => (t.name().to_string(), None),
    };
    let report = SampleReport {
        algebra,
        m,
        n: space.n(),
        p,
        samples: cli.samples,
        seed: cli.seed,
        min,
        max,
        mean: pairwise_sum(&traces) / traces.len() as f64,
        tolerance: tol.crosscheck,
        zero_trace,
        zero_trace_not_invariant,
        histogram: Histogram { edges, counts },
        passed,
    };
    Ok(Outcome {
        passed,
        report: json(&report)?,
    })
}

#[derive(Serialize)]
struct DeriveReport {
    algebra: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    n: usize,
    dimension: usize,
    singular_value_gap: f64,
    bracket_closure_residual: f64,
}

pub fn derive(cli: &Cli) -> Result<Outcome, Failure> {
    cli.tolerances().map_err(Failure::Usage)?;
    let tag = cli.tag().map_err(Failure::Usage)?;
    let n = match tag {
        AlgebraTag::SpinFactor(_) => match cli.n {
            None | Some(2) => 2,
            Some(n) => return Err(Failure::Usage(format!("the spin factor is S_2(R^m); got --n {n}"))),
        },
        AlgebraTag::O => match cli.n.unwrap_or(3) {
            n @ 1..=3 => n,
            n => return Err(Failure::Usage(format!("S_n(O) is a Jordan algebra only for n <= 3; got {n}"))),
        },
        _ => match cli.n.unwrap_or(3) {
            0 => return Err(Failure::Usage("--n must be positive".into())),
            n => n,
        },
    };
    let basis = symmetry::derivation_basis(tag, n)?;
    let report = DeriveReport {
        algebra: tag.name().to_string(),
        m: match tag {
            AlgebraTag::SpinFactor(m) => Some(m),
            _ => None,
        },
        n,
        dimension: basis.dim(),
        singular_value_gap: basis.singular_value_gap,
        bracket_closure_residual: basis.bracket_closure_residual(),
    };
    Ok(Outcome {
        passed: true,
        report: json(&report)?,
    })
}
