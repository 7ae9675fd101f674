//! Command implementations: thin orchestration over the library modules.

use std::path::{Path, PathBuf};

use serde::Serialize;

use driftscan::fbm::{fbm_covariance, simulate_fbm, stability_experiment, HurstKernelTable};
use driftscan::io;
use driftscan::kernels::KernelId;
use driftscan::lower_bound::{build_alternatives, FixedPointProblem};
use driftscan::multiscale::{decide, Side, TestConfig};
use driftscan::quantiles::{kappa_similarity, QuantileConfig, QuantileTable};
use driftscan::rng;
use driftscan::sde::{simulate_em, ClassParams, DriftSpec, SamplePath};
use driftscan::{Error, Result};

/// Parses a drift selector: `ou`, `alt` or `linear:<slope>`.
pub fn parse_drift(spec: &str, radius: f64, sigma: f64) -> Result<DriftSpec> {
    match spec {
        "ou" => parse_drift("linear:-1", radius, sigma),
        "alt" => {
            if (radius - 1.0).abs() > 1e-12 || (sigma - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidConfig(
                    "the 'alt' drift is defined for A = sigma = 1".into(),
                ));
            }
            Ok(DriftSpec::alternative_example())
        }
        other => {
            let slope: f64 = other
                .strip_prefix("linear:")
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| {
                    Error::InvalidConfig(format!(
                        "unknown drift '{other}' (use ou, alt or linear:<slope>)"
                    ))
                })?;
            if slope >= 0.0 {
                return Err(Error::InvalidConfig("linear drift needs a negative slope".into()));
            }
            let class = ClassParams::new(
                slope.abs().max(1.0),
                radius,
                slope.abs() * radius / (sigma * sigma),
                sigma,
            )?;
            DriftSpec::linear(slope, class)
        }
    }
}

pub fn parse_side(s: &str) -> Result<Side> {
    match s {
        "two-sided" => Ok(Side::TwoSided),
        "greater" => Ok(Side::Greater),
        "less" => Ok(Side::Less),
        other => Err(Error::InvalidConfig(format!(
            "unknown side '{other}' (use two-sided, greater or less)"
        ))),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QuantilesParams {
    pub etas: Vec<f64>,
    pub alphas: Vec<f64>,
    pub reps: usize,
    pub n1: usize,
    pub n2: usize,
    pub drift: String,
    pub radius: f64,
    pub sigma: f64,
    pub kernel: String,
    pub seed: u64,
    pub out: PathBuf,
}

pub fn cmd_quantiles(p: &QuantilesParams) -> Result<()> {
    let reference = parse_drift(&p.drift, p.radius, p.sigma)?;
    let kernel: KernelId = p.kernel.parse()?;
    let mut tables: Vec<QuantileTable> = Vec::new();
    for &eta in &p.etas {
        let cfg = QuantileConfig {
            reference: reference.clone(),
            radius: p.radius,
            sigma: p.sigma,
            eta,
            alphas: p.alphas.clone(),
            replications: p.reps,
            grid_res: p.n1,
            noise_res: p.n2,
            master_seed: p.seed,
            kernel,
        };
        tables.push(kappa_similarity(&cfg)?);
    }
    let header = format!(
        "command=quantiles drift={} radius={} sigma={} kernel={} reps={} n1={} n2={} seed={}",
        p.drift, p.radius, p.sigma, p.kernel, p.reps, p.n1, p.n2, p.seed
    );
    io::write_text(&p.out, &io::quantiles_to_csv(&tables, &header))?;
    println!("wrote {}", p.out.display());
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateParams {
    pub drift: String,
    pub x0: f64,
    pub horizon: f64,
    pub dt: f64,
    pub hurst: f64,
    pub radius: f64,
    pub sigma: f64,
    pub seed: u64,
    pub out: PathBuf,
}

pub fn cmd_simulate(p: &SimulateParams) -> Result<()> {
    let drift = parse_drift(&p.drift, p.radius, p.sigma)?;
    let path = simulate_path(&drift, p.x0, p.horizon, p.dt, p.hurst, p.seed)?;
    io::write_text(&p.out, &io::path_to_csv(&path, &p.drift, p.sigma))?;
    println!("wrote {}", p.out.display());
    Ok(())
}

fn simulate_path(
    drift: &DriftSpec,
    x0: f64,
    horizon: f64,
    dt: f64,
    hurst: f64,
    seed: u64,
) -> Result<SamplePath> {
    if (hurst - 0.5).abs() < 1e-12 {
        simulate_em(drift, x0, horizon, dt, seed)
    } else {
        let steps = (horizon / dt).round() as usize;
        let table = HurstKernelTable::build(hurst, steps, dt)?;
        driftscan::fbm::simulate_fractional_sde(drift, &table, x0, seed)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TestParams {
    pub path_file: Option<PathBuf>,
    pub drift: String,
    pub x0: f64,
    pub horizon: f64,
    pub dt: f64,
    pub seed: u64,
    pub reference: String,
    pub eta: f64,
    pub alpha: f64,
    pub radius: f64,
    pub sigma: f64,
    pub side: String,
    pub y_step: Option<f64>,
    pub h_step: Option<f64>,
    pub h_min: Option<f64>,
    pub kappa: Option<f64>,
    pub kappa_reps: usize,
    pub n1: usize,
    pub n2: usize,
    pub out: PathBuf,
    pub scores_out: Option<PathBuf>,
}

pub fn cmd_test(p: &TestParams) -> Result<()> {
    let reference = parse_drift(&p.reference, p.radius, p.sigma)?;
    let path = match &p.path_file {
        Some(file) => {
            let text = std::fs::read_to_string(file).map_err(|e| {
                Error::InvalidConfig(format!("cannot read {}: {e}", file.display()))
            })?;
            io::path_from_csv(&text)?.0
        }
        None => {
            let drift = parse_drift(&p.drift, p.radius, p.sigma)?;
            simulate_path(&drift, p.x0, p.horizon, p.dt, 0.5, p.seed)?
        }
    };
    let horizon = path.horizon();
    let mut config = TestConfig::for_horizon(
        p.radius,
        p.sigma,
        p.eta,
        p.alpha,
        reference.clone(),
        horizon,
    )?;
    config.side = parse_side(&p.side)?;
    if let Some(s) = p.y_step {
        config.y_step = s;
    }
    if let Some(s) = p.h_step {
        config.h_step = s;
    }
    if let Some(m) = p.h_min {
        config.h_min = m;
    }
    let kappa = match p.kappa {
        Some(k) => k,
        None => {
            let qc = QuantileConfig {
                reference,
                radius: p.radius,
                sigma: p.sigma,
                eta: p.eta,
                alphas: vec![p.alpha],
                replications: p.kappa_reps,
                grid_res: p.n1,
                noise_res: p.n2,
                master_seed: p.seed,
                kernel: KernelId::QuarticSmooth,
            };
            kappa_similarity(&qc)?.kappa(p.alpha).expect("alpha row simulated")
        }
    };
    let result = decide(&path, &config, kappa)?;
    io::write_text(&p.out, &io::detection_to_json(&result, p)?)?;
    if let Some(scores_out) = &p.scores_out {
        let header = format!(
            "command=test eta={} alpha={} kappa={} seed={}",
            p.eta, p.alpha, kappa, p.seed
        );
        io::write_text(scores_out, &io::scores_to_csv(&result.per_point, &header))?;
    }
    println!(
        "statistic = {:.6}, kappa = {:.6}, reject = {}, minimal intervals = {}",
        result.statistic,
        kappa,
        result.reject,
        result.minimal.len()
    );
    println!("wrote {}", p.out.display());
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct PowerParams {
    pub drift: String,
    pub reference: String,
    pub etas: Vec<f64>,
    pub alphas: Vec<f64>,
    pub reps: usize,
    pub horizon: f64,
    pub dt: f64,
    pub radius: f64,
    pub sigma: f64,
    pub kappa_reps: usize,
    pub n1: usize,
    pub n2: usize,
    pub seed: u64,
    pub out: PathBuf,
}

/// The three deviation windows of the study drift.
pub const REGIONS: [(f64, f64); 3] = [(-0.75, -0.45), (-0.2, 0.2), (0.4, 0.6)];

pub fn cmd_power_table(p: &PowerParams) -> Result<()> {
    let alt = parse_drift(&p.drift, p.radius, p.sigma)?;
    let reference = parse_drift(&p.reference, p.radius, p.sigma)?;
    let mut out = String::new();
    out.push_str(&format!(
        "# command=power-table drift={} reference={} reps={} horizon={} dt={} kappa_reps={} n1={} n2={} seed={}\n",
        p.drift, p.reference, p.reps, p.horizon, p.dt, p.kappa_reps, p.n1, p.n2, p.seed
    ));
    out.push_str("eta,alpha,kappa,reps,global,left,center,right\n");

    // simulate each replication path once, reuse across (eta, alpha)
    let paths: Result<Vec<SamplePath>> = (0..p.reps as u64)
        .map(|i| simulate_em(&alt, 0.0, p.horizon, p.dt, rng::mix(p.seed, i)))
        .collect();
    let paths = paths?;

    for &eta in &p.etas {
        let qc = QuantileConfig {
            reference: reference.clone(),
            radius: p.radius,
            sigma: p.sigma,
            eta,
            alphas: p.alphas.clone(),
            replications: p.kappa_reps,
            grid_res: p.n1,
            noise_res: p.n2,
            master_seed: p.seed,
            kernel: KernelId::QuarticSmooth,
        };
        let table = kappa_similarity(&qc)?;
        let config = TestConfig::for_horizon(
            p.radius,
            p.sigma,
            eta,
            p.alphas[0],
            reference.clone(),
            p.horizon,
        )?;
        for &alpha in &p.alphas {
            let kappa = table.kappa(alpha).expect("alpha row simulated");
            let mut global = 0usize;
            let mut region_hits = [0usize; 3];
            for path in &paths {
                let result = decide(path, &config, kappa)?;
                if result.reject {
                    global += 1;
                }
                for (r, (lo, hi)) in REGIONS.iter().enumerate() {
                    if result
                        .minimal
                        .iter()
                        .any(|&(y, h)| y + h >= *lo && y - h <= *hi)
                    {
                        region_hits[r] += 1;
                    }
                }
            }
            let n = p.reps as f64;
            out.push_str(&format!(
                "{eta},{alpha},{kappa},{},{},{},{},{}\n",
                p.reps,
                global as f64 / n,
                region_hits[0] as f64 / n,
                region_hits[1] as f64 / n,
                region_hits[2] as f64 / n,
            ));
        }
    }
    io::write_text(&p.out, &out)?;
    println!("wrote {}", p.out.display());
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct FbmCheckParams {
    pub hursts: Vec<f64>,
    pub steps: usize,
    pub horizon: f64,
    pub reps: usize,
    pub seed: u64,
    pub out: PathBuf,
}

#[allow(clippy::needless_range_loop)]
pub fn cmd_fbm_check(p: &FbmCheckParams) -> Result<()> {
    if !p.steps.is_multiple_of(4) {
        return Err(Error::InvalidConfig("steps must be divisible by 4".into()));
    }
    let dt = p.horizon / p.steps as f64;
    let marks: Vec<usize> = (1..=4).map(|k| k * p.steps / 4).collect();
    let mut out = String::new();
    out.push_str(&format!(
        "# command=fbm-check steps={} horizon={} reps={} seed={}\n",
        p.steps, p.horizon, p.reps, p.seed
    ));
    out.push_str("H,t1,t2,r_theory,r_kernel,cov_emp,se\n");
    for &hurst in &p.hursts {
        let table = HurstKernelTable::build(hurst, p.steps, dt)?;
        // empirical covariances over the replications
        let n_marks = marks.len();
        let mut prods = vec![vec![0.0f64; p.reps]; n_marks * n_marks];
        for rep in 0..p.reps {
            let w = simulate_fbm(&table, rng::mix(p.seed, rep as u64));
            for (a, &ia) in marks.iter().enumerate() {
                for (b, &ib) in marks.iter().enumerate() {
                    prods[a * n_marks + b][rep] = w.values[ia] * w.values[ib];
                }
            }
        }
        for (a, &ia) in marks.iter().enumerate() {
            for (b, &ib) in marks.iter().enumerate() {
                if b < a {
                    continue;
                }
                let (t1, t2) = (ia as f64 * dt, ib as f64 * dt);
                let sample = &prods[a * n_marks + b];
                let mean = sample.iter().sum::<f64>() / p.reps as f64;
                let var = sample.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>()
                    / p.reps as f64;
                let se = (var / p.reps as f64).sqrt();
                out.push_str(&format!(
                    "{hurst},{t1},{t2},{},{},{mean},{se}\n",
                    fbm_covariance(hurst, t1, t2),
                    table.reproduced_covariance(ia, ib),
                ));
            }
        }
    }
    io::write_text(&p.out, &out)?;
    println!("wrote {}", p.out.display());
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityParams {
    pub hursts: Vec<f64>,
    pub horizon: f64,
    pub dt: f64,
    pub reps: usize,
    pub reference: String,
    pub eta: f64,
    pub alpha: f64,
    pub radius: f64,
    pub sigma: f64,
    pub seed: u64,
    pub out: PathBuf,
}

pub fn cmd_stability(p: &StabilityParams) -> Result<()> {
    let reference = parse_drift(&p.reference, p.radius, p.sigma)?;
    let config = TestConfig::for_horizon(
        p.radius,
        p.sigma,
        p.eta,
        p.alpha,
        reference.clone(),
        p.horizon,
    )?;
    let rows = stability_experiment(
        &reference, p.horizon, p.dt, &p.hursts, p.reps, &config, p.seed,
    )?;
    io::write_text(&p.out, &io::stability_to_csv(&rows, p.horizon, p.dt, p.seed))?;
    println!("wrote {}", p.out.display());
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct LowerBoundParams {
    pub beta: f64,
    pub holder: f64,
    pub horizon: f64,
    pub eta: f64,
    pub reference: String,
    pub radius: f64,
    pub sigma: f64,
    pub out: PathBuf,
}

pub fn cmd_lower_bound(p: &LowerBoundParams) -> Result<()> {
    let reference = parse_drift(&p.reference, p.radius, p.sigma)?;
    let template =
        FixedPointProblem::new(p.beta, p.holder, p.horizon, p.eta, reference, -p.radius)?;
    let set = build_alternatives(&template)?;
    io::write_text(&p.out, &io::alternatives_to_json(&set, p)?)?;
    println!(
        "wrote {} ({} bumps, delta_T = {:.6})",
        p.out.display(),
        set.bumps.len(),
        set.delta_t
    );
    Ok(())
}

/// Exit code classification: configuration problems are 2, numerical and
/// i/o failures are 3.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidConfig(_)
        | Error::InvalidDrift(_)
        | Error::Unsupported(_)
        | Error::NonDifferentiableKernel(_) => 2,
        Error::Numerical(_) | Error::Io(_) => 3,
    }
}

pub fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() && !parent.exists() {
            std::fs::create_dir_all(parent)?;
        }
    }
    Ok(())
}
