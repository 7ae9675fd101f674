//! The pathwise multiscale statistic and its detection sets.
//!
//! For each location/bandwidth pair `(y, h)` the local statistic standardizes
//! the pathwise analogue of the local log-likelihood, subtracts the
//! similarity allowance `Lambda` (linear in `eta`) and the multiscale
//! correction `C(r) = sqrt(2 log(1/r))`. The test statistic is the supremum
//! over the grid; pairs whose kernel support the path never visits are
//! excluded instead of dividing by zero.
//!
//! Time integrals are left-point Riemann sums on the simulation grid. The
//! spatial endpoint term uses the exact kernel antiderivative. For the
//! quartic kernel and an affine reference drift the per-pair sums are
//! evaluated through per-bin centered moments with a Taylor expansion that is
//! exact for polynomials, so long paths cost O(n + pairs * bins) instead of
//! O(n * pairs); boundary bins fall back to direct summation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelId;
use crate::sde::{DriftSpec, SamplePath};

/// Pairs with `sigma_hat_sq` below this never enter the supremum.
pub const ACTIVATION_FLOOR: f64 = 1e-12;

/// Which deviations the test looks for.
///
/// The simulated thresholds certify the two-sided similarity statistic; the
/// one-sided variants are exposed for exploratory use and inherit no
/// composite-null validity guarantee.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    TwoSided,
    Greater,
    Less,
}

impl Side {
    fn transform(&self, psi: f64) -> f64 {
        match self {
            Side::TwoSided => psi.abs(),
            Side::Greater => psi,
            Side::Less => -psi,
        }
    }
}

/// Full parameter set of the similarity test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestConfig {
    pub radius: f64,
    pub sigma: f64,
    pub eta: f64,
    pub alpha: f64,
    pub reference: DriftSpec,
    pub kernel: KernelId,
    pub y_step: f64,
    pub h_step: f64,
    pub h_min: f64,
    pub side: Side,
}

impl TestConfig {
    /// Validates the grid and kernel requirements.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        radius: f64,
        sigma: f64,
        eta: f64,
        alpha: f64,
        reference: DriftSpec,
        kernel: KernelId,
        y_step: f64,
        h_step: f64,
        h_min: f64,
        side: Side,
    ) -> Result<Self> {
        if !kernel.is_c1() {
            return Err(Error::NonDifferentiableKernel(kernel.to_string()));
        }
        if !(radius > 0.0 && sigma > 0.0) || eta < 0.0 || !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidConfig(
                "need A > 0, sigma > 0, eta >= 0, alpha in (0,1)".into(),
            ));
        }
        if !(y_step > 0.0 && h_step > 0.0 && h_min > 0.0) {
            return Err(Error::InvalidConfig("grid steps must be positive".into()));
        }
        if h_min < h_step {
            return Err(Error::InvalidConfig(format!(
                "h_min = {h_min} must be >= h_step = {h_step}"
            )));
        }
        Ok(TestConfig {
            radius,
            sigma,
            eta,
            alpha,
            reference,
            kernel,
            y_step,
            h_step,
            h_min,
            side,
        })
    }

    /// Grid defaults for a horizon `T`: `y_step = h_step = 1/sqrt(T)` and
    /// `h_min = max(h_step, (log T / T)^(1/3))`, the detection-bandwidth
    /// order at Hölder exponent one.
    pub fn for_horizon(
        radius: f64,
        sigma: f64,
        eta: f64,
        alpha: f64,
        reference: DriftSpec,
        horizon: f64,
    ) -> Result<Self> {
        let step = 1.0 / horizon.sqrt();
        let h_min = step.max((horizon.ln() / horizon).powf(1.0 / 3.0));
        TestConfig::new(
            radius,
            sigma,
            eta,
            alpha,
            reference,
            KernelId::QuarticSmooth,
            step,
            step,
            h_min,
            Side::TwoSided,
        )
    }
}

/// Per-pair record of the local statistic.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalScore {
    pub y: f64,
    pub h: f64,
    pub psi: f64,
    pub lambda: f64,
    pub sigma_hat_sq: f64,
    pub correction: f64,
    pub score: f64,
    pub active: bool,
}

/// Outcome of a full test run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectionResult {
    pub statistic: f64,
    pub kappa: f64,
    pub reject: bool,
    pub detected: Vec<(f64, f64)>,
    pub minimal: Vec<(f64, f64)>,
    pub per_point: Vec<LocalScore>,
}

/// Multiscale correction `C(r) = sqrt(2 log(1/r))` for `r` in `(0, 1]`.
pub fn correction(r: f64) -> Result<f64> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::InvalidConfig(format!("correction needs r in (0,1], got {r}")));
    }
    Ok((2.0 * (1.0 / r).ln()).max(0.0).sqrt())
}

/// The location/bandwidth grid: `h` in `{h_min, h_min + h_step, ..., A}` and,
/// per `h`, `y` in `{-A + h, ..., A - h}` stepped by `y_step`.
pub fn build_grid(config: &TestConfig) -> Result<Vec<(f64, f64)>> {
    let a = config.radius;
    let mut grid = Vec::new();
    let n_h = ((a - config.h_min) / config.h_step + 1e-9).floor() as i64;
    for i in 0..=n_h {
        let h = config.h_min + i as f64 * config.h_step;
        let n_y = (2.0 * (a - h) / config.y_step + 1e-9).floor() as i64;
        for j in 0..=n_y {
            let y = -a + h + j as f64 * config.y_step;
            grid.push((y, h));
        }
    }
    if grid.is_empty() {
        return Err(Error::InvalidConfig(
            "empty (y, h) grid; decrease h_min or the steps".into(),
        ));
    }
    Ok(grid)
}

/// Left-point Riemann sums of the kernel integrands over one pair.
#[derive(Debug, Clone, Copy, Default)]
struct PairSums {
    /// `sum K((X_i - y)/h) dt`
    int_k: f64,
    /// `sum K^2 dt`
    int_k_sq: f64,
    /// `sum K * b0(X_i) dt`
    int_k_b0: f64,
    /// `sum K'((X_i - y)/h) dt` (chain-rule factor 1/h not applied)
    int_k_prime: f64,
}

/// Pathwise extension of the local Itô integral:
/// `int_{X_0}^{X_T} K_{y,h}(z) dz - sigma^2/2 int_0^T (K_{y,h})'(X_s) ds`.
pub fn pathwise_integral(
    path: &SamplePath,
    y: f64,
    h: f64,
    kernel: KernelId,
    sigma: f64,
) -> Result<f64> {
    if !kernel.is_c1() {
        return Err(Error::NonDifferentiableKernel(kernel.to_string()));
    }
    let s = direct_pair_sums(path, y, h, kernel, None);
    ito_from_sums(path, y, h, kernel, sigma, &s)
}

fn ito_from_sums(
    path: &SamplePath,
    y: f64,
    h: f64,
    kernel: KernelId,
    sigma: f64,
    sums: &PairSums,
) -> Result<f64> {
    let first = kernel.antiderivative(y, h, path.values[0], *path.values.last().unwrap())?;
    Ok(first - sigma * sigma / 2.0 * sums.int_k_prime / h)
}

/// `sigma_hat(y, h)^2 = (1/T) int_0^T K_{y,h}(X_s)^2 ds`.
pub fn sigma_hat_sq(path: &SamplePath, y: f64, h: f64, kernel: KernelId) -> f64 {
    direct_pair_sums(path, y, h, kernel, None).int_k_sq / path.horizon()
}

/// `sigma_hat_max^2 = (1/T) int_0^T 1_{[-A,A]}(X_s) ds`.
pub fn sigma_hat_max_sq(path: &SamplePath, radius: f64) -> f64 {
    let n = path.values.len() - 1;
    let mut inside = 0usize;
    for &x in &path.values[..n] {
        if x.abs() <= radius {
            inside += 1;
        }
    }
    inside as f64 * path.dt / path.horizon()
}

fn direct_pair_sums(
    path: &SamplePath,
    y: f64,
    h: f64,
    kernel: KernelId,
    b0: Option<&DriftSpec>,
) -> PairSums {
    let n = path.values.len() - 1;
    let mut s = PairSums::default();
    for &x in &path.values[..n] {
        let u = (x - y) / h;
        if u.abs() >= 1.0 {
            continue;
        }
        let k = kernel.eval(u);
        s.int_k += k;
        s.int_k_sq += k * k;
        if let Some(drift) = b0 {
            s.int_k_b0 += k * drift.eval(x);
        }
        if let Ok(d) = kernel.eval_derivative(u) {
            s.int_k_prime += d;
        }
    }
    s.int_k *= path.dt;
    s.int_k_sq *= path.dt;
    s.int_k_b0 *= path.dt;
    s.int_k_prime *= path.dt;
    s
}

/// One local score evaluated directly (no shared precomputation).
pub fn local_score(path: &SamplePath, y: f64, h: f64, config: &TestConfig) -> Result<LocalScore> {
    let sums = direct_pair_sums(path, y, h, config.kernel, Some(&config.reference));
    let smax = sigma_hat_max_sq(path, config.radius);
    score_from_sums(path, y, h, config, &sums, smax)
}

fn score_from_sums(
    path: &SamplePath,
    y: f64,
    h: f64,
    config: &TestConfig,
    sums: &PairSums,
    sigma_hat_max: f64,
) -> Result<LocalScore> {
    let horizon = path.horizon();
    let sig_sq = sums.int_k_sq / horizon;
    if sig_sq < ACTIVATION_FLOOR || sigma_hat_max < ACTIVATION_FLOOR {
        return Ok(LocalScore {
            y,
            h,
            psi: 0.0,
            lambda: 0.0,
            sigma_hat_sq: sig_sq,
            correction: 0.0,
            score: f64::NEG_INFINITY,
            active: false,
        });
    }
    let ito = ito_from_sums(path, y, h, config.kernel, config.sigma, sums)?;
    let denom = config.sigma * sums.int_k_sq.sqrt();
    let psi = (ito - sums.int_k_b0) / denom;
    let lambda = config.eta * sums.int_k / denom;
    let corr = correction((sig_sq / sigma_hat_max).min(1.0))?;
    Ok(LocalScore {
        y,
        h,
        psi,
        lambda,
        sigma_hat_sq: sig_sq,
        correction: corr,
        score: config.side.transform(psi) - lambda - corr,
        active: true,
    })
}

/// Supremum statistic with the full per-pair breakdown, sorted by `(h, y)`.
pub fn test_statistic(path: &SamplePath, config: &TestConfig) -> Result<(f64, Vec<LocalScore>)> {
    let grid = build_grid(config)?;
    let engine = BinnedPath::build(path, config);
    let smax = sigma_hat_max_sq(path, config.radius);
    let scores: Result<Vec<LocalScore>> = grid
        .par_iter()
        .map(|&(y, h)| {
            let sums = match &engine {
                Some(b) => b.pair_sums(y, h),
                None => direct_pair_sums(path, y, h, config.kernel, Some(&config.reference)),
            };
            score_from_sums(path, y, h, config, &sums, smax)
        })
        .collect();
    let mut scores = scores?;
    scores.sort_by(|a, b| (a.h, a.y).partial_cmp(&(b.h, b.y)).unwrap());
    let statistic = scores
        .iter()
        .filter(|s| s.active)
        .map(|s| s.score)
        .fold(f64::NEG_INFINITY, f64::max);
    if statistic == f64::NEG_INFINITY {
        return Err(Error::Numerical(
            "degenerate path: no (y, h) pair reaches the activation floor".into(),
        ));
    }
    Ok((statistic, scores))
}

/// Pairs whose score exceeds `kappa`.
pub fn detections(per_point: &[LocalScore], kappa: f64) -> Vec<(f64, f64)> {
    per_point
        .iter()
        .filter(|s| s.active && s.score > kappa)
        .map(|s| (s.y, s.h))
        .collect()
}

/// Detected intervals `[y-h, y+h]` containing no other detected interval as
/// a strict subset.
pub fn minimal_intervals(detected: &[(f64, f64)]) -> Vec<(f64, f64)> {
    detected
        .iter()
        .filter(|&&(y, h)| {
            !detected.iter().any(|&(y2, h2)| {
                (y2, h2) != (y, h) && y2 - h2 >= y - h - 1e-12 && y2 + h2 <= y + h + 1e-12
            })
        })
        .copied()
        .collect()
}

/// Runs the full test against the threshold `kappa`.
pub fn decide(path: &SamplePath, config: &TestConfig, kappa: f64) -> Result<DetectionResult> {
    let (statistic, per_point) = test_statistic(path, config)?;
    let detected = detections(&per_point, kappa);
    let minimal = minimal_intervals(&detected);
    Ok(DetectionResult {
        statistic,
        kappa,
        reject: statistic > kappa,
        detected,
        minimal,
        per_point,
    })
}

// ---------------------------------------------------------------------------
// Binned moment backend (quartic kernel, affine reference drift).
//
// The integrands K, K^2, K' and K * b0 are polynomials in x on each kernel
// support, so their path sums equal finite Taylor expansions around bin
// centers applied to the centered bin moments sum (x - z_c)^p, p = 0..8.
// Only bins crossed by a support edge need the raw points.
// ---------------------------------------------------------------------------

const MAX_MOMENT: usize = 8;
const TARGET_BINS: usize = 2048;

/// Quartic kernel coefficient rows in powers of u = (x - y)/h.
const QUARTIC_K: [f64; 9] = [15.0 / 16.0, 0.0, -15.0 / 8.0, 0.0, 15.0 / 16.0, 0.0, 0.0, 0.0, 0.0];
const QUARTIC_K_SQ: [f64; 9] = [
    225.0 / 256.0,
    0.0,
    -900.0 / 256.0,
    0.0,
    1350.0 / 256.0,
    0.0,
    -900.0 / 256.0,
    0.0,
    225.0 / 256.0,
];
const QUARTIC_K_PRIME: [f64; 9] =
    [0.0, -15.0 / 4.0, 0.0, 15.0 / 4.0, 0.0, 0.0, 0.0, 0.0, 0.0];

struct BinnedPath {
    origin: f64,
    width: f64,
    moments: Vec<[f64; MAX_MOMENT + 1]>,
    /// Path values grouped by bin (left-point convention: the last value is
    /// excluded), plus per-bin offsets into the grouped storage.
    grouped: Vec<f64>,
    offsets: Vec<usize>,
    dt: f64,
    slope: f64,
    intercept: f64,
    binom: [[f64; MAX_MOMENT + 1]; MAX_MOMENT + 1],
}

impl BinnedPath {
    /// Builds the moment tables when the fast path applies.
    fn build(path: &SamplePath, config: &TestConfig) -> Option<Self> {
        if config.kernel != KernelId::QuarticSmooth {
            return None;
        }
        let (slope, intercept) = config.reference.as_affine()?;
        let n = path.values.len() - 1;
        if n < 4 * TARGET_BINS {
            return None;
        }
        let body = &path.values[..n];
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &x in body {
            lo = lo.min(x);
            hi = hi.max(x);
        }
        let width = ((hi - lo) / TARGET_BINS as f64).max(1e-9);
        let nbins = ((hi - lo) / width).ceil() as usize + 1;

        let mut counts = vec![0usize; nbins];
        for &x in body {
            counts[Self::index_of(lo, width, nbins, x)] += 1;
        }
        let mut offsets = vec![0usize; nbins + 1];
        for i in 0..nbins {
            offsets[i + 1] = offsets[i] + counts[i];
        }
        let mut cursor = offsets.clone();
        let mut grouped = vec![0.0; n];
        for &x in body {
            let b = Self::index_of(lo, width, nbins, x);
            grouped[cursor[b]] = x;
            cursor[b] += 1;
        }

        let mut moments = vec![[0.0; MAX_MOMENT + 1]; nbins];
        for b in 0..nbins {
            let center = lo + (b as f64 + 0.5) * width;
            let m = &mut moments[b];
            for &x in &grouped[offsets[b]..offsets[b + 1]] {
                let d = x - center;
                let mut p = 1.0;
                for slot in m.iter_mut() {
                    *slot += p;
                    p *= d;
                }
            }
        }

        let mut binom = [[0.0; MAX_MOMENT + 1]; MAX_MOMENT + 1];
        for j in 0..=MAX_MOMENT {
            binom[j][0] = 1.0;
            for p in 1..=j {
                binom[j][p] = binom[j - 1][p - 1] + if p < j { binom[j - 1][p] } else { 0.0 };
            }
        }

        Some(BinnedPath {
            origin: lo,
            width,
            moments,
            grouped,
            offsets,
            dt: path.dt,
            slope,
            intercept,
            binom,
        })
    }

    fn index_of(origin: f64, width: f64, nbins: usize, x: f64) -> usize {
        (((x - origin) / width) as usize).min(nbins - 1)
    }

    fn center(&self, b: usize) -> f64 {
        self.origin + (b as f64 + 0.5) * self.width
    }

    /// Taylor coefficients of the polynomial `sum c_j u^j` at `u_c`.
    #[allow(clippy::needless_range_loop)]
    fn taylor(&self, coeffs: &[f64; 9], deg: usize, u_c: f64, out: &mut [f64; 9]) {
        for (p, o) in out.iter_mut().enumerate().take(deg + 1) {
            let mut acc = 0.0;
            let mut upow = 1.0;
            for j in p..=deg {
                acc += coeffs[j] * self.binom[j][p] * upow;
                upow *= u_c;
            }
            *o = acc;
        }
    }

    /// Exact left-point sums for one pair via bin moments.
    fn pair_sums(&self, y: f64, h: f64) -> PairSums {
        let nbins = self.moments.len();
        let lo_x = y - h;
        let hi_x = y + h;
        let first_bin = (((lo_x - self.origin) / self.width).floor().max(0.0)) as usize;
        let last_bin = (((hi_x - self.origin) / self.width).floor()) as isize;
        let mut s = PairSums::default();
        if last_bin < 0 || first_bin >= nbins {
            return s;
        }
        let last_bin = (last_bin as usize).min(nbins - 1);

        let inv_h = 1.0 / h;
        let mut tk = [0.0; 9];
        let mut tk2 = [0.0; 9];
        let mut tkp = [0.0; 9];
        for b in first_bin..=last_bin {
            let c = self.center(b);
            let edge = c - 0.5 * self.width < lo_x || c + 0.5 * self.width > hi_x;
            if edge {
                // support boundary crosses this bin: sum raw points
                for &x in &self.grouped[self.offsets[b]..self.offsets[b + 1]] {
                    let u = (x - y) * inv_h;
                    if u.abs() >= 1.0 {
                        continue;
                    }
                    let one_m = 1.0 - u * u;
                    let k = 15.0 / 16.0 * one_m * one_m;
                    s.int_k += k;
                    s.int_k_sq += k * k;
                    s.int_k_b0 += k * (self.slope * x + self.intercept);
                    s.int_k_prime += -15.0 / 4.0 * u * one_m;
                }
            } else {
                let m = &self.moments[b];
                if m[0] == 0.0 {
                    continue;
                }
                let u_c = (c - y) * inv_h;
                self.taylor(&QUARTIC_K, 4, u_c, &mut tk);
                self.taylor(&QUARTIC_K_SQ, 8, u_c, &mut tk2);
                self.taylor(&QUARTIC_K_PRIME, 3, u_c, &mut tkp);
                let mut scale = 1.0;
                let mut k_sum = 0.0;
                let mut k_x_centered = 0.0;
                for p in 0..=4 {
                    let w = tk[p] * scale;
                    k_sum += w * m[p];
                    k_x_centered += w * m[p + 1];
                    scale *= inv_h;
                }
                let mut scale = 1.0;
                let mut k2_sum = 0.0;
                for p in 0..=8 {
                    k2_sum += tk2[p] * scale * m[p];
                    scale *= inv_h;
                }
                let mut scale = 1.0;
                let mut kp_sum = 0.0;
                for p in 0..=3 {
                    kp_sum += tkp[p] * scale * m[p];
                    scale *= inv_h;
                }
                s.int_k += k_sum;
                s.int_k_sq += k2_sum;
                s.int_k_prime += kp_sum;
                // K * b0 with affine b0: b0(x) = slope (c + (x - c)) + intercept
                s.int_k_b0 += self.slope * (c * k_sum + k_x_centered) + self.intercept * k_sum;
            }
        }
        s.int_k *= self.dt;
        s.int_k_sq *= self.dt;
        s.int_k_b0 *= self.dt;
        s.int_k_prime *= self.dt;
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::sde::{simulate_em, ClassParams};

    fn ou_config(eta: f64, horizon: f64) -> TestConfig {
        TestConfig::for_horizon(1.0, 1.0, eta, 0.05, DriftSpec::standard_ou(), horizon).unwrap()
    }

    #[test]
    fn correction_values() {
        assert_eq!(correction(1.0).unwrap(), 0.0);
        assert!((correction((-2.0f64).exp()).unwrap() - 2.0).abs() < 1e-12);
        let r = (15.0f64 / 16.0).powi(2);
        let expect = (4.0 * (16.0f64 / 15.0).ln()).sqrt();
        assert!((correction(r).unwrap() - expect).abs() < 1e-15);
        assert!((correction(r).unwrap() - 0.50809).abs() < 1e-4);
        assert!(correction(0.0).is_err());
        assert!(correction(1.5).is_err());
    }

    #[test]
    fn correction_decreasing_in_sigma_hat() {
        let smax = 0.9;
        let mut prev = f64::INFINITY;
        for s in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let c = correction(s / smax).unwrap();
            assert!(c < prev);
            prev = c;
        }
    }

    #[test]
    fn grid_enumeration_example() {
        let cfg = TestConfig::new(
            1.0,
            1.0,
            0.0,
            0.05,
            DriftSpec::standard_ou(),
            KernelId::QuarticSmooth,
            0.5,
            0.5,
            0.5,
            Side::TwoSided,
        )
        .unwrap();
        let grid = build_grid(&cfg).unwrap();
        assert_eq!(grid.len(), 4);
        assert!(grid.contains(&(-0.5, 0.5)));
        assert!(grid.contains(&(0.0, 0.5)));
        assert!(grid.contains(&(0.5, 0.5)));
        assert!(grid.contains(&(0.0, 1.0)));
    }

    #[test]
    fn grid_count_matches_enumeration_oracle() {
        let cfg = TestConfig::new(
            1.0,
            1.0,
            0.0,
            0.05,
            DriftSpec::standard_ou(),
            KernelId::QuarticSmooth,
            0.1,
            0.1,
            0.1,
            Side::TwoSided,
        )
        .unwrap();
        let grid = build_grid(&cfg).unwrap();
        // independent double loop
        let mut count = 0;
        let mut h = 0.1f64;
        while h <= 1.0 + 1e-9 {
            let mut y = -1.0 + h;
            while y <= 1.0 - h + 1e-9 {
                count += 1;
                y += 0.1;
            }
            h += 0.1;
        }
        assert_eq!(grid.len(), count);
        for &(y, h) in &grid {
            assert!(y - h >= -1.0 - 1e-9 && y + h <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn constant_path_local_values() {
        // X == y: sigma_hat^2 = K(0)^2, psi = 0 at eta = 0, score = -C(K(0)^2 / 1)
        let path = SamplePath { dt: 0.01, values: vec![0.0; 1001], hurst: 0.5, seed: 0 };
        let cfg = ou_config(0.0, 10.0);
        let s = local_score(&path, 0.0, 0.5, &cfg).unwrap();
        let k0 = 15.0 / 16.0;
        assert!((s.sigma_hat_sq - k0 * k0).abs() < 1e-12);
        assert!(s.psi.abs() < 1e-12);
        assert_eq!(s.lambda, 0.0);
        let expect = -(4.0 * (16.0f64 / 15.0).ln()).sqrt();
        assert!((s.score - expect).abs() < 1e-10);
        assert!((sigma_hat_max_sq(&path, 1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pathwise_integral_constant_and_symmetric() {
        let cfg = ou_config(0.0, 10.0);
        let path = SamplePath { dt: 0.01, values: vec![0.3; 1001], hurst: 0.5, seed: 0 };
        let v = pathwise_integral(&path, 0.3, 0.2, cfg.kernel, 1.0).unwrap();
        assert!(v.abs() < 1e-12);

        // monotone traversal of the full support: endpoint term = h, odd
        // derivative cancels over the symmetric occupation
        let n = 2000usize;
        let vals: Vec<f64> = (0..=n).map(|i| -0.5 + i as f64 / n as f64).collect();
        let path = SamplePath { dt: 1.0 / n as f64, values: vals, hurst: 0.5, seed: 0 };
        let v = pathwise_integral(&path, 0.0, 0.25, cfg.kernel, 1.0).unwrap();
        assert!((v - 0.25).abs() < 1e-3, "{v}");
        assert!(pathwise_integral(
            &path,
            0.0,
            0.25,
            KernelId::optimal_recovery(1.0).unwrap(),
            1.0
        )
        .is_err());
    }

    #[test]
    fn ito_sum_oracle_gap_shrinks_with_dt() {
        // |I_tilde - forward Ito sum| has median at dt = 1e-3 at least
        // twice smaller than at dt = 1e-2 over seeded OU paths
        let ou = DriftSpec::standard_ou();
        let gap = |dt: f64, seed: u64| -> f64 {
            let p = simulate_em(&ou, 0.0, 20.0, dt, seed).unwrap();
            let (y, h) = (0.0, 0.5);
            let tilde = pathwise_integral(&p, y, h, KernelId::QuarticSmooth, 1.0).unwrap();
            let mut ito = 0.0;
            for i in 0..p.values.len() - 1 {
                ito += KernelId::QuarticSmooth.rescaled(y, h, p.values[i])
                    * (p.values[i + 1] - p.values[i]);
            }
            (tilde - ito).abs()
        };
        let med = |dt: f64| -> f64 {
            let mut g: Vec<f64> = (0..50).map(|i| gap(dt, rng::mix(3030, i))).collect();
            g.sort_by(|a, b| a.partial_cmp(b).unwrap());
            g[25]
        };
        let coarse = med(1e-2);
        let mid = med(3e-3);
        let fine = med(1e-3);
        assert!(fine <= mid && mid <= coarse, "{coarse} {mid} {fine}");
        assert!(coarse >= 2.0 * fine, "{coarse} vs {fine}");
    }

    #[test]
    fn eta_scales_lambda_linearly() {
        let ou = DriftSpec::standard_ou();
        let p = simulate_em(&ou, 0.0, 50.0, 0.01, 11).unwrap();
        let c1 = ou_config(0.1, 50.0);
        let c2 = ou_config(0.2, 50.0);
        let s1 = local_score(&p, 0.0, 0.4, &c1).unwrap();
        let s2 = local_score(&p, 0.0, 0.4, &c2).unwrap();
        assert!(s1.lambda > 0.0);
        assert!((s2.lambda - 2.0 * s1.lambda).abs() < 1e-12);
        let c0 = ou_config(0.0, 50.0);
        assert_eq!(local_score(&p, 0.0, 0.4, &c0).unwrap().lambda, 0.0);
    }

    #[test]
    fn side_transforms_ordering() {
        let ou = DriftSpec::standard_ou();
        let p = simulate_em(&ou, 0.0, 50.0, 0.01, 13).unwrap();
        for (y, h) in [(-0.3, 0.3), (0.2, 0.5), (0.0, 0.8)] {
            let mk = |side: Side| {
                let mut cfg = ou_config(0.05, 50.0);
                cfg.side = side;
                local_score(&p, y, h, &cfg).unwrap().score
            };
            let two = mk(Side::TwoSided);
            let gt = mk(Side::Greater);
            let lt = mk(Side::Less);
            assert!(two >= gt - 1e-12 && two >= lt - 1e-12);
            assert!((gt.max(lt) - two).abs() < 1e-12);
        }
    }

    #[test]
    fn statistic_is_max_of_scores() {
        let ou = DriftSpec::standard_ou();
        let p = simulate_em(&ou, 0.0, 100.0, 0.01, 21).unwrap();
        let cfg = ou_config(0.05, 100.0);
        let (stat, scores) = test_statistic(&p, &cfg).unwrap();
        let max = scores
            .iter()
            .filter(|s| s.active)
            .map(|s| s.score)
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(stat, max);
        // far-away paths deactivate pairs without error elsewhere
        let shifted = SamplePath {
            dt: p.dt,
            values: p.values.iter().map(|v| v + 100.0).collect(),
            hurst: 0.5,
            seed: p.seed,
        };
        assert!(test_statistic(&shifted, &cfg).is_err());
    }

    #[test]
    fn binned_backend_matches_direct() {
        let ou = DriftSpec::standard_ou();
        let p = simulate_em(&ou, 0.0, 200.0, 0.01, 31).unwrap();
        let cfg = ou_config(0.05, 200.0);
        let engine = BinnedPath::build(&p, &cfg).expect("fast path applies");
        for (y, h) in [(-0.4, 0.36), (0.0, 0.36), (0.3, 0.5), (0.0, 1.0), (0.9, 0.36)] {
            let fast = engine.pair_sums(y, h);
            let slow = direct_pair_sums(&p, y, h, cfg.kernel, Some(&cfg.reference));
            assert!((fast.int_k - slow.int_k).abs() <= 1e-9 * slow.int_k.abs().max(1.0));
            assert!((fast.int_k_sq - slow.int_k_sq).abs() <= 1e-9 * slow.int_k_sq.abs().max(1.0));
            assert!((fast.int_k_b0 - slow.int_k_b0).abs() <= 1e-9 * slow.int_k_b0.abs().max(1.0));
            assert!(
                (fast.int_k_prime - slow.int_k_prime).abs()
                    <= 1e-9 * slow.int_k_prime.abs().max(1.0)
            );
        }
    }

    #[test]
    fn decide_threshold_semantics() {
        let ou = DriftSpec::standard_ou();
        let p = simulate_em(&ou, 0.0, 100.0, 0.01, 41).unwrap();
        let cfg = ou_config(0.05, 100.0);
        let never = decide(&p, &cfg, f64::INFINITY).unwrap();
        assert!(!never.reject && never.detected.is_empty() && never.minimal.is_empty());
        let always = decide(&p, &cfg, f64::NEG_INFINITY).unwrap();
        assert!(always.reject && !always.detected.is_empty());
        let (stat, _) = test_statistic(&p, &cfg).unwrap();
        let exact = decide(&p, &cfg, stat).unwrap();
        assert!(!exact.reject);
    }

    #[test]
    fn minimal_interval_examples() {
        // [-0.5,0.5], [-0.2,0.2], [0.2,0.4] -> minimal {[-0.2,0.2], [0.2,0.4]}
        let det = vec![(0.0, 0.5), (0.0, 0.2), (0.3, 0.1)];
        let min = minimal_intervals(&det);
        assert_eq!(min, vec![(0.0, 0.2), (0.3, 0.1)]);
        assert_eq!(minimal_intervals(&[(0.1, 0.3)]), vec![(0.1, 0.3)]);
        assert!(minimal_intervals(&[]).is_empty());
    }

    #[test]
    fn config_rejects_non_c1_kernel() {
        let r = TestConfig::new(
            1.0,
            1.0,
            0.0,
            0.05,
            DriftSpec::standard_ou(),
            KernelId::optimal_recovery(1.0).unwrap(),
            0.1,
            0.1,
            0.1,
            Side::TwoSided,
        );
        assert!(matches!(r, Err(Error::NonDifferentiableKernel(_))));
        let _ = ClassParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
    }
}
