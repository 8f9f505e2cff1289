use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "slelab",
    version,
    about = "Null-state PDE solutions, collapse limits and Cardy crossing checks"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub output: Format,

    /// Worker threads for the parallel parts (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Seed for random point samples and Monte Carlo trials.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Central charge, boundary weights, Kac table and Potts Q at one κ.
    Params(ParamsArgs),
    /// Arc diagrams on 2N points with their allowable-sequence counts.
    Diagrams(DiagramsArgs),
    /// Evaluate a solution at one point.
    Eval(EvalArgs),
    /// Finite-difference residuals of the null-state PDEs and Ward identities.
    CheckPde(CheckPdeArgs),
    /// Extrapolated collapse of one interval (or the outer pair).
    Collapse(CollapseArgs),
    /// Values of all limit functionals, one per arc diagram.
    DualVector(DualVectorArgs),
    /// Cardy's crossing probability for rectangles of aspect ratio R.
    Cardy(CardyArgs),
    /// Monte Carlo crossing probabilities on a lattice.
    Percolate(PercolateArgs),
}

/// Accepts decimals and fractions such as `8/3`.
pub fn parse_real(s: &str) -> Result<f64, String> {
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|e| format!("{s}: {e}"))?;
            let b: f64 = b.trim().parse().map_err(|e| format!("{s}: {e}"))?;
            a / b
        }
        None => s.trim().parse().map_err(|e| format!("{s}: {e}"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s} is not a finite number"))
    }
}

#[derive(Debug, Args, Serialize)]
pub struct ParamsArgs {
    #[arg(long, value_parser = parse_real)]
    pub kappa: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct DiagramsArgs {
    /// Number of arcs N.
    #[arg(long)]
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolutionName {
    /// (x₂ − x₁)^{1−6/κ}, scaled by the first coefficient.
    S1,
    /// C₁G₁ + C₂G₂ for the two-arc system.
    S2,
    G1,
    G2,
    /// The crossing-probability solution (κ = 6).
    Cardy,
    Constant,
    Zero,
    /// ∏(x_j − x_i)^{2/κ}: solves the PDEs but not the Ward identities.
    Counterexample,
}

impl SolutionName {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::S1 => "s1",
            Self::S2 => "s2",
            Self::G1 => "g1",
            Self::G2 => "g2",
            Self::Cardy => "cardy",
            Self::Constant => "constant",
            Self::Zero => "zero",
            Self::Counterexample => "counterexample",
        }
    }

    /// Number of arcs the name implies when `--n` is not given.
    pub fn natural_pairs(self) -> usize {
        match self {
            Self::S1 => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SolutionArgs {
    #[arg(long, value_enum)]
    pub solution: SolutionName,

    #[arg(long, value_parser = parse_real)]
    pub kappa: f64,

    /// Coefficients: the scale of s1, (C₁, C₂) of s2, the value of constant.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_real)]
    pub coeffs: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    #[command(flatten)]
    pub solution: SolutionArgs,

    /// Increasing coordinates x1,…,x2N.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_real, required = true)]
    pub point: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct CheckPdeArgs {
    #[command(flatten)]
    pub solution: SolutionArgs,

    /// Number of arcs (default: 1 for s1, 2 otherwise).
    #[arg(long)]
    pub n: Option<usize>,

    /// JSON file holding a list of points (lists of increasing coordinates).
    #[arg(long)]
    pub points: Option<PathBuf>,

    /// Random points to draw when no file is given.
    #[arg(long, default_value_t = 20)]
    pub samples: usize,

    /// Finite-difference step as a fraction of each point's smallest gap.
    #[arg(long, default_value_t = slelab::pde_check::DEFAULT_RELATIVE_STEP)]
    pub step: f64,

    /// Largest residual that counts as a pass.
    #[arg(long, default_value_t = 1e-5)]
    pub tolerance: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct CollapseArgs {
    #[command(flatten)]
    pub solution: SolutionArgs,

    #[arg(long)]
    pub n: Option<usize>,

    /// Interval (x_i, x_{i+1}) to collapse, 1-based.
    #[arg(long, required_unless_present = "outer", conflicts_with = "outer")]
    pub interval: Option<usize>,

    /// Collapse the first and last points to −R and R, R → ∞.
    #[arg(long)]
    pub outer: bool,

    /// Point x1,…,x2N the collapse starts from (default 0,1,…,2N−1).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_real)]
    pub point: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct DualVectorArgs {
    #[command(flatten)]
    pub solution: SolutionArgs,

    #[arg(long)]
    pub n: Option<usize>,

    /// Anchor x1,…,x2N with gaps of at least 1 (default 0,1,…,2N−1).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_real)]
    pub anchor: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct CardyArgs {
    /// One or more aspect ratios (width / height).
    #[arg(long, value_delimiter = ',', value_parser = parse_real, required = true)]
    pub ratio: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    SquareBond,
    TriangularSite,
}

impl From<Kind> for slelab::percolation::LatticeKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::SquareBond => Self::SquareBond,
            Kind::TriangularSite => Self::TriangularSite,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct PercolateArgs {
    #[arg(long, value_enum, default_value_t = Kind::SquareBond)]
    pub kind: Kind,

    /// Width in cells (site columns for the triangular lattice).
    #[arg(long, required_unless_present = "ratios")]
    pub width: Option<usize>,

    /// Height in cells (site rows for the triangular lattice).
    #[arg(long)]
    pub height: usize,

    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,

    /// Occupation probability; the critical point 1/2 unless overridden.
    #[arg(long, default_value_t = 0.5)]
    pub p_open: f64,

    /// Compare with Cardy's formula; the exit status reports the comparison.
    #[arg(long)]
    pub compare: bool,

    /// Sweep mode: one batch per aspect ratio at fixed height, width derived.
    #[arg(long, value_delimiter = ',', value_parser = parse_real, conflicts_with_all = ["width", "p_open"])]
    pub ratios: Vec<f64>,
}
