use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use apn_core::algebra::AlgebraTag;
use apn_core::variation::Tolerances;

/// Every flag can also be set through an `APN_`-prefixed environment
/// variable (`APN_SEED`, `APN_SAMPLES`, `APN_CROSSCHECK_TOL`, ...).
#[derive(Parser, Debug)]
#[command(name = "apn", version)]
#[command(about = "Second-variation and symmetry checks on projective spaces over R, C, H, O and on spheres")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Algebra: R, C, H, O, or Rm for the sphere S^m
    #[arg(long, global = true, env = "APN_ALGEBRA", default_value = "C")]
    pub algebra: AlgebraArg,

    /// Sphere dimension for --algebra Rm
    #[arg(long, global = true, env = "APN_M")]
    pub m: Option<usize>,

    /// Projective dimension; for `derive`, the matrix size of S_n(A)
    #[arg(long, global = true, env = "APN_N")]
    pub n: Option<usize>,

    /// Frame size for `sample`
    #[arg(long, global = true, env = "APN_P")]
    pub p: Option<usize>,

    #[arg(long, global = true, env = "APN_SAMPLES", default_value_t = 50)]
    pub samples: usize,

    #[arg(long, global = true, env = "APN_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Tolerance for exact algebraic identities
    #[arg(long, global = true, env = "APN_TOL", default_value_t = 1e-9)]
    pub tol: f64,

    /// Tolerance for agreement between independent evaluations
    #[arg(long, global = true, env = "APN_CROSSCHECK_TOL", default_value_t = 1e-5)]
    pub crosscheck_tol: f64,

    #[arg(long, global = true, env = "APN_FLOW_TOL", default_value_t = 1e-3)]
    pub flow_tol: f64,

    #[arg(long, global = true, env = "APN_FD_STEP", default_value_t = 1e-4)]
    pub fd_step: f64,

    #[arg(long, global = true, env = "APN_FORMAT", default_value = "json")]
    pub format: Format,

    /// Write the report here instead of stdout
    #[arg(long, global = true, env = "APN_OUT")]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run every invariant suite for one space
    Verify,
    /// Variation report for one frame given as JSON ("-" reads stdin)
    Secvar { frame: PathBuf },
    /// Trace statistics over random frames at the origin
    Sample,
    /// Derivation algebra of S_n(A)
    Derive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AlgebraArg {
    #[value(name = "R")]
    R,
    #[value(name = "C")]
    C,
    #[value(name = "H")]
    H,
    #[value(name = "O")]
    O,
    #[value(name = "Rm")]
    Rm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl Cli {
    pub fn tag(&self) -> Result<AlgebraTag, String> {
        Ok(match self.algebra {
            AlgebraArg::R => AlgebraTag::R,
            AlgebraArg::C => AlgebraTag::C,
            AlgebraArg::H => AlgebraTag::H,
            AlgebraArg::O => AlgebraTag::O,
            AlgebraArg::Rm => match self.m {
                Some(m) if m >= 1 => AlgebraTag::SpinFactor(m),
                _ => return Err("--algebra Rm needs --m >= 1".into()),
            },
        })
    }

    pub fn tolerances(&self) -> Result<Tolerances, String> {
        let t = Tolerances {
            algebraic: self.tol,
            crosscheck: self.crosscheck_tol,
            flow: self.flow_tol,
            fd_step: self.fd_step,
        };
        for (name, v) in [
            ("--tol", t.algebraic),
            ("--crosscheck-tol", t.crosscheck),
            ("--flow-tol", t.flow),
            ("--fd-step", t.fd_step),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        if self.samples == 0 {
            return Err("--samples must be at least 1".into());
        }
        Ok(t)
    }
}
