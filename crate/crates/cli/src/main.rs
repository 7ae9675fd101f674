//! Command-line front end for the drift similarity test.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::*;
use config::Overrides;
use driftscan::Result;

#[derive(Parser)]
#[command(
    name = "driftscan",
    about = "Multiscale similarity testing for the drift of ergodic diffusions",
    version
)]
struct Cli {
    /// Key/value config file; command-line flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads for replication-level parallelism (0 = all cores).
    /// Never changes numerical output.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the limit-statistic quantiles and write quantiles.csv.
    Quantiles(QuantilesArgs),
    /// Simulate a diffusion or fractional-diffusion path.
    Simulate(SimulateArgs),
    /// Run the similarity test on a path (from file or freshly simulated).
    Test(TestArgs),
    /// Rejection frequencies over a grid of (eta, alpha), with the three
    /// deviation windows of the study drift.
    PowerTable(PowerArgs),
    /// Covariance diagnostics of the fractional Brownian generator.
    FbmCheck(FbmCheckArgs),
    /// Coupled-noise stability experiment across Hurst indices.
    Stability(StabilityArgs),
    /// Construct the least-favourable alternative set.
    LowerBound(LowerBoundArgs),
}

#[derive(Args)]
struct QuantilesArgs {
    /// Comma-separated similarity radii eta.
    #[arg(long)]
    etas: Option<String>,
    /// Comma-separated significance levels.
    #[arg(long)]
    alphas: Option<String>,
    /// Monte-Carlo replications N.
    #[arg(long)]
    reps: Option<usize>,
    /// (y, h)-grid width n1.
    #[arg(long)]
    n1: Option<usize>,
    /// Noise resolution n2.
    #[arg(long)]
    n2: Option<usize>,
    /// Reference drift: ou, alt or linear:<slope>.
    #[arg(long)]
    drift: Option<String>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Kernel: quartic, recovery:<beta> or trunc:<beta>:<T>.
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    drift: Option<String>,
    #[arg(long)]
    x0: Option<f64>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    /// Hurst index of the driving noise (0.5 = Brownian).
    #[arg(long)]
    hurst: Option<f64>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TestArgs {
    /// Existing path CSV; omit to simulate instead.
    #[arg(long)]
    path_file: Option<PathBuf>,
    /// Drift used when simulating the observation.
    #[arg(long)]
    drift: Option<String>,
    #[arg(long)]
    x0: Option<f64>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Reference drift tested against.
    #[arg(long)]
    reference: Option<String>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    /// two-sided, greater or less.
    #[arg(long)]
    side: Option<String>,
    #[arg(long)]
    y_step: Option<f64>,
    #[arg(long)]
    h_step: Option<f64>,
    #[arg(long)]
    h_min: Option<f64>,
    /// Threshold override; skips the quantile simulation.
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    kappa_reps: Option<usize>,
    #[arg(long)]
    n1: Option<usize>,
    #[arg(long)]
    n2: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional per-pair score CSV.
    #[arg(long)]
    scores_out: Option<PathBuf>,
}

#[derive(Args)]
struct PowerArgs {
    #[arg(long)]
    drift: Option<String>,
    #[arg(long)]
    reference: Option<String>,
    #[arg(long)]
    etas: Option<String>,
    #[arg(long)]
    alphas: Option<String>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    kappa_reps: Option<usize>,
    #[arg(long)]
    n1: Option<usize>,
    #[arg(long)]
    n2: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FbmCheckArgs {
    #[arg(long)]
    hursts: Option<String>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StabilityArgs {
    #[arg(long)]
    hursts: Option<String>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    reference: Option<String>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LowerBoundArgs {
    #[arg(long)]
    beta: Option<f64>,
    /// Hölder constant L.
    #[arg(long)]
    holder: Option<f64>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    reference: Option<String>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<()> {
    let ov = Overrides::load(cli.config.as_deref())?;
    match cli.command {
        Command::Quantiles(a) => {
            let p = QuantilesParams {
                etas: ov.resolve_list(a.etas, "etas", &[0.0, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5])?,
                alphas: ov.resolve_list(a.alphas, "alphas", &[0.1, 0.05, 0.01])?,
                reps: ov.resolve(a.reps, "reps", 10_000)?,
                n1: ov.resolve(a.n1, "n1", 100)?,
                n2: ov.resolve(a.n2, "n2", 100)?,
                drift: ov.resolve(a.drift, "drift", "ou".to_string())?,
                radius: ov.resolve(a.radius, "radius", 1.0)?,
                sigma: ov.resolve(a.sigma, "sigma", 1.0)?,
                kernel: ov.resolve(a.kernel, "kernel", "quartic".to_string())?,
                seed: ov.resolve(a.seed, "seed", 1)?,
                out: ov.resolve(a.out, "out", PathBuf::from("quantiles.csv"))?,
            };
            ensure_parent(&p.out)?;
            cmd_quantiles(&p)
        }
        Command::Simulate(a) => {
            let p = SimulateParams {
                drift: ov.resolve(a.drift, "drift", "ou".to_string())?,
                x0: ov.resolve(a.x0, "x0", 0.0)?,
                horizon: ov.resolve(a.horizon, "horizon", 500.0)?,
                dt: ov.resolve(a.dt, "dt", 0.005)?,
                hurst: ov.resolve(a.hurst, "hurst", 0.5)?,
                radius: ov.resolve(a.radius, "radius", 1.0)?,
                sigma: ov.resolve(a.sigma, "sigma", 1.0)?,
                seed: ov.resolve(a.seed, "seed", 1)?,
                out: ov.resolve(a.out, "out", PathBuf::from("path.csv"))?,
            };
            ensure_parent(&p.out)?;
            cmd_simulate(&p)
        }
        Command::Test(a) => {
            let p = TestParams {
                path_file: a.path_file,
                drift: ov.resolve(a.drift, "drift", "alt".to_string())?,
                x0: ov.resolve(a.x0, "x0", 0.0)?,
                horizon: ov.resolve(a.horizon, "horizon", 2000.0)?,
                dt: ov.resolve(a.dt, "dt", 0.005)?,
                seed: ov.resolve(a.seed, "seed", 1)?,
                reference: ov.resolve(a.reference, "reference", "ou".to_string())?,
                eta: ov.resolve(a.eta, "eta", 0.05)?,
                alpha: ov.resolve(a.alpha, "alpha", 0.05)?,
                radius: ov.resolve(a.radius, "radius", 1.0)?,
                sigma: ov.resolve(a.sigma, "sigma", 1.0)?,
                side: ov.resolve(a.side, "side", "two-sided".to_string())?,
                y_step: a.y_step,
                h_step: a.h_step,
                h_min: a.h_min,
                kappa: a.kappa,
                kappa_reps: ov.resolve(a.kappa_reps, "kappa_reps", 10_000)?,
                n1: ov.resolve(a.n1, "n1", 100)?,
                n2: ov.resolve(a.n2, "n2", 100)?,
                out: ov.resolve(a.out, "out", PathBuf::from("detection.json"))?,
                scores_out: a.scores_out,
            };
            ensure_parent(&p.out)?;
            cmd_test(&p)
        }
        Command::PowerTable(a) => {
            let p = PowerParams {
                drift: ov.resolve(a.drift, "drift", "alt".to_string())?,
                reference: ov.resolve(a.reference, "reference", "ou".to_string())?,
                etas: ov.resolve_list(a.etas, "etas", &[0.0, 0.05])?,
                alphas: ov.resolve_list(a.alphas, "alphas", &[0.05])?,
                reps: ov.resolve(a.reps, "reps", 50)?,
                horizon: ov.resolve(a.horizon, "horizon", 2000.0)?,
                dt: ov.resolve(a.dt, "dt", 0.005)?,
                radius: ov.resolve(a.radius, "radius", 1.0)?,
                sigma: ov.resolve(a.sigma, "sigma", 1.0)?,
                kappa_reps: ov.resolve(a.kappa_reps, "kappa_reps", 10_000)?,
                n1: ov.resolve(a.n1, "n1", 100)?,
                n2: ov.resolve(a.n2, "n2", 100)?,
                seed: ov.resolve(a.seed, "seed", 1)?,
                out: ov.resolve(a.out, "out", PathBuf::from("power.csv"))?,
            };
            ensure_parent(&p.out)?;
            cmd_power_table(&p)
        }
        Command::FbmCheck(a) => {
            let p = FbmCheckParams {
                hursts: ov.resolve_list(a.hursts, "hursts", &[0.4, 0.5, 0.6])?,
                steps: ov.resolve(a.steps, "steps", 256)?,
                horizon: ov.resolve(a.horizon, "horizon", 1.0)?,
                reps: ov.resolve(a.reps, "reps", 2000)?,
                seed: ov.resolve(a.seed, "seed", 1)?,
                out: ov.resolve(a.out, "out", PathBuf::from("fbm_check.csv"))?,
            };
            ensure_parent(&p.out)?;
            cmd_fbm_check(&p)
        }
        Command::Stability(a) => {
            let p = StabilityParams {
                hursts: ov.resolve_list(a.hursts, "hursts", &[0.45, 0.48, 0.5, 0.52, 0.55])?,
                horizon: ov.resolve(a.horizon, "horizon", 100.0)?,
                dt: ov.resolve(a.dt, "dt", 0.02)?,
                reps: ov.resolve(a.reps, "reps", 30)?,
                reference: ov.resolve(a.reference, "reference", "ou".to_string())?,
                eta: ov.resolve(a.eta, "eta", 0.0)?,
                alpha: ov.resolve(a.alpha, "alpha", 0.05)?,
                radius: ov.resolve(a.radius, "radius", 1.0)?,
                sigma: ov.resolve(a.sigma, "sigma", 1.0)?,
                seed: ov.resolve(a.seed, "seed", 1)?,
                out: ov.resolve(a.out, "out", PathBuf::from("stability.csv"))?,
            };
            ensure_parent(&p.out)?;
            cmd_stability(&p)
        }
        Command::LowerBound(a) => {
            let p = LowerBoundParams {
                beta: ov.resolve(a.beta, "beta", 1.0)?,
                holder: ov.resolve(a.holder, "holder", 1.0)?,
                horizon: ov.resolve(a.horizon, "horizon", 10_000.0)?,
                eta: ov.resolve(a.eta, "eta", 0.05)?,
                reference: ov.resolve(a.reference, "reference", "ou".to_string())?,
                radius: ov.resolve(a.radius, "radius", 1.0)?,
                sigma: ov.resolve(a.sigma, "sigma", 1.0)?,
                out: ov.resolve(a.out, "out", PathBuf::from("alternatives.json"))?,
            };
            ensure_parent(&p.out)?;
            cmd_lower_bound(&p)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let workers = cli.workers;
    let body = || match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    };
    if workers > 0 {
        match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
            Ok(pool) => pool.install(body),
            Err(e) => {
                eprintln!("error: cannot build worker pool: {e}");
                ExitCode::from(3)
            }
        }
    } else {
        body()
    }
}
