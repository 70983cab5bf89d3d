mod commands;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use gpground::ShootConfig64;

/// Ground states of the trapped Gross-Pitaevskii equation in d >= 5 dimensions.
#[derive(Parser, Debug)]
#[command(name = "gpground", version)]
struct Cli {
    /// Worker threads for sweeps (default: logical cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve for lambda(b) at one amplitude.
    Lambda(LambdaArgs),
    /// Limiting eigenvalue of the singular solution.
    LambdaInf(LambdaInfArgs),
    /// Sweep lambda(b) over a log grid of amplitudes.
    Curve(CurveArgs),
    /// Asymptotic law of lambda(b) - lambda_inf and the roots b_n.
    Snake(SnakeArgs),
    /// Write one trajectory as CSV.
    Profile(ProfileArgs),
    /// Run the invariant checks for one dimension.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Numerics {
    /// Relative tolerance of the integrator.
    #[arg(long, default_value_t = 1e-11)]
    pub tol: f64,
    /// Width at which the bisection on lambda stops.
    #[arg(long, default_value_t = 1e-12)]
    pub lambda_tol: f64,
}

impl Numerics {
    pub fn config(&self) -> ShootConfig64 {
        let mut cfg = ShootConfig64::default();
        cfg.control.rel_tol = self.tol;
        cfg.lambda_tol = self.lambda_tol;
        cfg
    }
}

#[derive(Args, Debug, Serialize)]
pub struct LambdaArgs {
    #[arg(long)]
    pub d: u32,
    #[arg(long)]
    pub b: f64,
    #[command(flatten)]
    pub num: Numerics,
    /// Print the full summary as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Shoot,
    Pade,
}

#[derive(Args, Debug, Serialize)]
pub struct LambdaInfArgs {
    #[arg(long)]
    pub d: u32,
    #[arg(long, value_enum, default_value_t = Method::Shoot)]
    pub method: Method,
    #[command(flatten)]
    pub num: Numerics,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct CurveArgs {
    #[arg(long)]
    pub d: u32,
    #[arg(long, default_value_t = 0.1)]
    pub b_min: f64,
    #[arg(long, default_value_t = 1e6)]
    pub b_max: f64,
    /// Total log-spaced points; without it 200 per decade where lambda(b)
    /// oscillates and 50 elsewhere.
    #[arg(long)]
    pub points: Option<usize>,
    #[command(flatten)]
    pub num: Numerics,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct SnakeArgs {
    #[arg(long)]
    pub d: u32,
    /// Smallest amplitude used by the fit.
    #[arg(long)]
    pub b_min_fit: Option<f64>,
    /// Largest amplitude scanned (default 3e6, or 1e4 for d >= 13).
    #[arg(long)]
    pub b_max: Option<f64>,
    #[command(flatten)]
    pub num: Numerics,
    /// CSV of the roots `n,b_n,ratio`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
#[command(group(clap::ArgGroup::new("kind").required(true).args(["b", "singular", "theta"])))]
pub struct ProfileArgs {
    #[arg(long)]
    pub d: u32,
    /// Regular solution with f(0) = b.
    #[arg(long)]
    pub b: Option<f64>,
    /// Singular limiting solution.
    #[arg(long)]
    pub singular: bool,
    /// Orbit of the truncated autonomous equation.
    #[arg(long)]
    pub theta: bool,
    /// Emden variables in t = ln r instead of r.
    #[arg(long)]
    pub emden: bool,
    /// Single shot at this lambda instead of the eigenvalue (with --b).
    #[arg(long, requires = "b")]
    pub lambda: Option<f64>,
    #[command(flatten)]
    pub num: Numerics,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub d: u32,
    /// Skip the nondegeneracy and convergence-rate checks.
    #[arg(long)]
    pub quick: bool,
    #[command(flatten)]
    pub num: Numerics,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let pool = match cli.jobs {
        Some(0) => {
            eprintln!("error: --jobs must be positive");
            return ExitCode::from(commands::EXIT_USAGE);
        }
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    };
    let pool = match pool {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(commands::EXIT_SOLVER);
        }
    };
    let result = pool.install(|| match &cli.command {
        Command::Lambda(a) => commands::lambda(a),
        Command::LambdaInf(a) => commands::lambda_inf(a),
        Command::Curve(a) => commands::curve(a),
        Command::Snake(a) => commands::snake(a),
        Command::Profile(a) => commands::profile(a),
        Command::Verify(a) => verify::run(a),
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
