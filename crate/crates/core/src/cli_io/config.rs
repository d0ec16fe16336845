//! Run configuration and its command-line form.

use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::Serialize;

use crate::convexity::Criterion;
use crate::error::{Error, Result};
use crate::sphere::MIN_GRID_RESOLUTION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Solve Δu + 2u = f and export u.
    Solve,
    /// Convexity verdict from the criteria, plus sufficient conditions.
    Check,
    /// L_p problem Δu + 2u = f u^{p−1} (p = 2: eigenproblem).
    Lp,
    /// The threshold constant γ_{n,α}.
    Gamma,
    /// Kernel tables and their equivalence checks.
    Kernels,
    /// Solve and rebuild the body surface as a mesh.
    Reconstruct,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Check => "check",
            Command::Lp => "lp",
            Command::Gamma => "gamma",
            Command::Kernels => "kernels",
            Command::Reconstruct => "reconstruct",
        }
    }

    fn needs_input(&self) -> bool {
        !matches!(self, Command::Gamma | Command::Kernels)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Parser)]
#[command(name = "christoffel", version, about = "Christoffel problem solver and convexity checker")]
pub struct RunConfig {
    #[arg(value_enum)]
    pub command: Command,

    /// Field source: `file:<csv>` or `family:<name>:<k=v,...>`.
    #[arg(long)]
    pub input: Option<String>,

    /// Sphere dimension (kernels and γ only; the solvers work on S²).
    #[arg(long, default_value_t = 2)]
    pub n: usize,

    /// Grid resolution: number of Gauss–Legendre rings.
    #[arg(long = "L", default_value_t = 48)]
    #[serde(rename = "l")]
    pub l: usize,

    /// Harmonic band limit.
    #[arg(long = "Lmax", default_value_t = 32)]
    pub l_max: usize,

    /// Tangent directions per node in criterion sweeps.
    #[arg(long = "dirs", default_value_t = 8)]
    pub n_dirs: usize,

    /// Hölder exponent for γ and the Hölder condition.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,

    /// Exponent of the L_p problem.
    #[arg(long, default_value_t = 4.0)]
    pub p: f64,

    /// Solver tolerance; the orthogonality gate uses tol · max |f|.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,

    /// Remove the degree-1 part of f instead of rejecting it.
    #[arg(long)]
    pub project: bool,

    /// Criteria to sweep.
    #[arg(long, value_delimiter = ',', default_values = ["cr1", "cr2"])]
    pub criteria: Vec<Criterion>,

    /// Seed for random witnesses and Monte-Carlo sampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Extra random witnesses per criterion in `check`.
    #[arg(long, default_value_t = 16)]
    pub random_witnesses: usize,

    /// Monte-Carlo samples for `gamma`.
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,

    /// Iteration cap of the L_p solvers.
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,

    /// Output path for u (CSV), or the kernel table for `kernels`.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// JSON report path; printed to stdout when absent.
    #[arg(long)]
    pub report: Option<PathBuf>,

    /// Mesh output path (OBJ).
    #[arg(long)]
    pub obj: Option<PathBuf>,

    /// Worker threads; falls back to CHRISTOFFEL_THREADS.
    #[arg(long)]
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl clap::ValueEnum for Criterion {
    fn value_variants<'a>() -> &'a [Self] {
        &[Criterion::Cr1, Criterion::Cr2]
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(self.name()))
    }
}

/// Environment variable consulted when `--threads` is absent.
pub const THREADS_ENV: &str = "CHRISTOFFEL_THREADS";

impl RunConfig {
    /// Defaults for `command`, as if no flags were given.
    pub fn new(command: Command) -> Self {
        Self::parse_from(["christoffel", command.name()])
    }

    pub fn with_input(mut self, input: &str) -> Self {
        self.input = Some(input.to_string());
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.n < 2 {
            return Err(Error::InvalidDimension(self.n));
        }
        if self.l < MIN_GRID_RESOLUTION {
            return Err(Error::ResolutionTooLow { got: self.l, min: MIN_GRID_RESOLUTION });
        }
        if self.l < self.l_max + 1 {
            return Err(Error::BandLimitExceeded { l_max: self.l_max, needed: self.l_max + 1, got: self.l });
        }
        if self.n_dirs < 2 {
            return bad(format!("--dirs must be at least 2, got {}", self.n_dirs));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad(format!("--alpha must lie in (0, 1], got {}", self.alpha));
        }
        if !(self.p >= 2.0) || !self.p.is_finite() {
            return bad(format!("--p must be at least 2, got {}", self.p));
        }
        if !(self.tol > 0.0) {
            return bad(format!("--tol must be positive, got {}", self.tol));
        }
        if self.command.needs_input() && self.input.is_none() {
            return bad(format!("`{}` needs --input", self.command.name()));
        }
        if self.command.needs_input() && self.n != 2 {
            return bad(format!("`{}` works on S² only (--n 2)", self.command.name()));
        }
        if self.threads == Some(0) {
            return bad("--threads must be positive".into());
        }
        Ok(())
    }

    /// `--threads`, else the environment variable, else rayon's default.
    pub fn thread_count(&self) -> Option<usize> {
        self.threads
            .or_else(|| std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok()))
            .filter(|n| *n > 0)
    }
}
