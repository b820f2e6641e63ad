mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Verification lab for the fractional Kolmogorov operator with critical drift.
#[derive(Debug, Parser)]
#[command(name = "frakolm", version)]
struct Cli {
    /// Worker threads for module-level parallelism.
    #[arg(long, global = true, env = "FRAKOLM_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Model {
    /// Dimension.
    #[arg(long)]
    pub d: usize,
    /// Stability index in (1, 2].
    #[arg(long)]
    pub alpha: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Output {
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Ineq {
    Schrodinger,
    Kolmogorov,
    Shifted,
    Exponential,
    Posteriori,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form constants as CSV.
    Constants(ConstantsArgs),
    /// γ(ν) on a ν-grid (or at one ν) as CSV.
    GammaExponent(GammaArgs),
    /// Invariants of the spectral calculus as JSON.
    SpectralCheck(SpectralArgs),
    /// Domination constants, supermedian margins and g_β bounds as JSON.
    DriftReport(DriftArgs),
    /// Luxemburg norm of a field snapshot.
    OrliczNorm(OrliczArgs),
    /// Empirical Hardy constants over the test families.
    VerifyHardy(HardyArgs),
    /// Bregman and Stroock–Varopoulos margins.
    VerifySv(SvArgs),
    /// κ_{(d−α)/p} against the SV route as CSV.
    CompareConstants(CompareArgs),
    /// Norm of T by power iteration.
    TNorm(TNormArgs),
    /// Elliptic solve with a priori diagnostics.
    SolveElliptic(SolveArgs),
    /// Parabolic evolution with Orlicz-norm growth.
    Evolve(EvolveArgs),
    /// Acceptance criteria roll-up.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ConstantsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: Model,
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, default_value_t = 0.0)]
    pub nu: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GammaArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: Model,
    /// Single coupling; the full curve on `points` values of ν/ν⋆ otherwise.
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SpectralArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: Model,
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DriftArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: Model,
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
    /// β values for the Lyapunov diagnostics; defaults to fractions of d − α.
    #[arg(long, value_delimiter = ',')]
    pub betas: Vec<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OrliczArgs {
    /// Field snapshot in the FRAKFLD1 layout.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HardyArgs {
    #[arg(long, value_enum)]
    pub ineq: Ineq,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: Model,
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long, value_delimiter = ',')]
    pub p_grid: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub eps_grid: Vec<f64>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// λ for the a posteriori form.
    #[arg(long, default_value_t = 4.0)]
    pub lambda: f64,
    /// Configured threshold λ_{d,α}.
    #[arg(long, default_value_t = 1.0)]
    pub lambda_min: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SvArgs {
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value_t = 1.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 32)]
    pub n: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CompareArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: Model,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TNormArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: Model,
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Mollification time; the singular drift when omitted.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, default_value_t = 200)]
    pub iterations: usize,
    #[arg(long, default_value_t = 3)]
    pub restarts: usize,
    #[arg(long, default_value_t = 11)]
    pub seed: u64,
    /// Also report the smallest dyadic λ with norm below this bound.
    #[arg(long)]
    pub threshold_bound: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SolveArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: Model,
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long)]
    pub lambda: f64,
    /// Mollification time; the singular drift when omitted.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Preset (`cos`, `bump`, `one`, `random`) or a field snapshot path.
    #[arg(long, default_value = "cos")]
    pub f: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Writes the solution snapshot here.
    #[arg(long)]
    pub dump: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvolveArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: Model,
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    /// Mollification time; the singular drift when omitted.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Pure fractional heat flow.
    #[arg(long)]
    pub no_drift: bool,
    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,
    /// Time step; half the CFL limit when omitted.
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, default_value_t = 10)]
    pub checkpoints: usize,
    #[arg(long, default_value = "bump")]
    pub f: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub dump: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    /// Criterion ids; all when omitted.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<u8>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: Output,
}

/// Failure classes and their exit codes.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Tolerance(String),
    NonConvergence(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Tolerance(_) => 3,
            Failure::NonConvergence(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Tolerance(m) | Failure::NonConvergence(m) => m,
        }
    }
}

impl From<frakolm::Error> for Failure {
    fn from(e: frakolm::Error) -> Self {
        use frakolm::Error::*;
        let m = e.to_string();
        match e {
            Tolerance(_) | Truncation { .. } => Failure::Tolerance(m),
            NonConvergence(_) | BlowUp(_) => Failure::NonConvergence(m),
            _ => Failure::Config(m),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(format!("io error: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = match &cli.command {
        Command::Constants(a) => commands::constants(a),
        Command::GammaExponent(a) => commands::gamma_exponent(a),
        Command::SpectralCheck(a) => commands::spectral_check(a),
        Command::DriftReport(a) => commands::drift_report(a),
        Command::OrliczNorm(a) => commands::orlicz_norm(a),
        Command::VerifyHardy(a) => commands::verify_hardy(a),
        Command::VerifySv(a) => commands::verify_sv(a),
        Command::CompareConstants(a) => commands::compare_constants(a),
        Command::TNorm(a) => commands::t_norm(a),
        Command::SolveElliptic(a) => commands::solve_elliptic(a),
        Command::Evolve(a) => commands::evolve(a),
        Command::Sweep(a) => commands::sweep(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use frakolm::Error;

    #[test]
    fn exit_codes_by_error_class() {
        let code = |e: Error| Failure::from(e).code();
        assert_eq!(code(Error::Params("x".into())), 2);
        assert_eq!(code(Error::Cfl { dt: 1.0, limit: 0.1 }), 2);
        assert_eq!(code(Error::Format("x".into())), 2);
        assert_eq!(code(Error::Tolerance("x".into())), 3);
        assert_eq!(code(Error::Truncation { tail_bound: 1.0, tolerance: 0.1 }), 3);
        assert_eq!(code(Error::NonConvergence("x".into())), 4);
        assert_eq!(code(Error::BlowUp("x".into())), 4);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
