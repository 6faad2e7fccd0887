//! `zchaos`: batch driver for the verification suites, simulations and
//! contour integrals.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

/// Flags shared by every subcommand. Unset flags fall back to `--config`,
/// then to per-command defaults.
#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// Flat `key = value` file; explicit flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub p: Option<u32>,
    #[arg(long)]
    pub nmax: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory for the manifest and tables.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long = "T", allow_hyphen_values = true)]
    pub t: Option<f64>,
    /// `segment:a,b`, `arc:c,r,theta0,theta1` or `polyline:z0,z1,...`.
    #[arg(long, allow_hyphen_values = true)]
    pub contour: Option<String>,
    /// Complex evaluation point, e.g. `0.5i` or `0.3-0.2i`.
    #[arg(long, allow_hyphen_values = true)]
    pub z: Option<String>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// `one`, `brownian` or `regularized`.
    #[arg(long)]
    pub integrand: Option<String>,
    /// `dyadic` or `triadic`.
    #[arg(long)]
    pub refinement: Option<String>,
    /// Comma-separated complex sample points for `simulate`.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
}

#[derive(Parser, Debug)]
#[command(
    name = "zchaos",
    version,
    about = "Complex-time Brownian motion in weighted chaos spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Hermite growth bounds on a 21x21 polar grid, orthonormality, Stirling.
    Bounds(Common),
    /// Wick laws, Våge inequality and duality on seeded random vectors.
    Spaces(Common),
    /// Coefficients of B_z, N_z and a weighted X_z, norm bounds, analyticity.
    Process(Common),
    /// Wick contour integral of an integrand field against white noise.
    Integrate(Common),
    /// Real and regularized quadratic Itô checks.
    Ito(Common),
    /// Mehler series against the closed-form kernel.
    Mehler(Common),
    /// Imaginary-time divergence scan.
    Diverge(Common),
    /// Seeded Monte Carlo trajectories.
    Simulate(Common),
}

type Runner = fn(&mut commands::RunContext, &Common) -> anyhow::Result<commands::Report>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, run): (&Common, Runner) = match &cli.command {
        Command::Bounds(c) => (c, commands::bounds),
        Command::Spaces(c) => (c, commands::spaces),
        Command::Process(c) => (c, commands::process),
        Command::Integrate(c) => (c, commands::integrate),
        Command::Ito(c) => (c, commands::ito),
        Command::Mehler(c) => (c, commands::mehler),
        Command::Diverge(c) => (c, commands::diverge),
        Command::Simulate(c) => (c, commands::simulate),
    };
    let outcome = commands::prepare(common).and_then(|mut ctx| {
        let report = run(&mut ctx, common)?;
        let path = commands::write_manifest(&ctx.out, &report, ctx.resolver.used())?;
        Ok((report, path))
    });
    match outcome {
        Ok((report, path)) => {
            println!("{}", path.display());
            if report.failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                eprintln!("{}", serde_json::json!({ "failures": report.failures }));
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!(
                "{}",
                serde_json::json!({ "failures": [{ "check": "error", "detail": format!("{e:#}") }] })
            );
            ExitCode::from(2)
        }
    }
}
