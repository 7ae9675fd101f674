//! Monte-Carlo quantiles of the limiting statistics.
//!
//! One replication draws Brownian increments on a grid over `[-A, A]` with
//! variance equal to the cell width, forms for every location/bandwidth pair
//! the normalized Gaussian integral against `K_{y,h} sqrt(q)` for the two
//! boundary densities `q_{b0 +- eta}`, subtracts the multiscale correction
//! and takes the supremum; `U_1 v U_2` is the larger of the two sups. Both
//! sups reuse the same increments within a replication, and replications use
//! independent counter-derived streams so the sorted sample is bit-identical
//! for any worker count. The similarity threshold adds the deterministic
//! shift `4 sqrt(A eta / sigma^2)` to the raw empirical quantile.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelId;
use crate::multiscale::{correction, ACTIVATION_FLOOR};
use crate::rng;
use crate::sde::{DensityTable, DriftSpec};

/// Parameters of a quantile simulation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuantileConfig {
    pub reference: DriftSpec,
    pub radius: f64,
    pub sigma: f64,
    pub eta: f64,
    pub alphas: Vec<f64>,
    /// Monte-Carlo replications `N`.
    pub replications: usize,
    /// Width of the `(y, h)` grid, `n1`.
    pub grid_res: usize,
    /// Noise / Riemann resolution, `n2`.
    pub noise_res: usize,
    pub master_seed: u64,
    pub kernel: KernelId,
}

impl QuantileConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_res < 2 || self.noise_res < 2 {
            return Err(Error::InvalidConfig("n1 and n2 must be >= 2".into()));
        }
        if self.replications < 1 {
            return Err(Error::InvalidConfig("need at least one replication".into()));
        }
        if self.eta < 0.0 || !(self.radius > 0.0 && self.sigma > 0.0) {
            return Err(Error::InvalidConfig("need eta >= 0, A > 0, sigma > 0".into()));
        }
        if self.alphas.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
            return Err(Error::InvalidConfig("alphas must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// One `(eta, alpha)` quantile row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuantileRow {
    pub eta: f64,
    pub alpha: f64,
    pub kappa_raw: f64,
    pub kappa: f64,
    pub replications: usize,
    pub seed: u64,
}

/// Simulated quantiles plus the raw sorted sample for diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuantileTable {
    pub rows: Vec<QuantileRow>,
    pub sample: Vec<f64>,
    pub grid_res: usize,
    pub noise_res: usize,
}

impl QuantileTable {
    /// The threshold for a given `alpha`, if simulated.
    pub fn kappa(&self, alpha: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| (r.alpha - alpha).abs() < 1e-12)
            .map(|r| r.kappa)
    }

    /// Monte-Carlo standard error of the `alpha`-row quantile, from the
    /// order-statistic spacing estimate of the sample density.
    pub fn standard_error(&self, alpha: f64) -> Option<f64> {
        let n = self.sample.len();
        let k = quantile_index(alpha, n);
        let m = ((n as f64) * 0.01).ceil() as usize;
        let lo = k.saturating_sub(m);
        let hi = (k + m).min(n - 1);
        let spread = self.sample[hi] - self.sample[lo];
        if spread <= 0.0 {
            return None;
        }
        let density = (hi - lo) as f64 / (n as f64 * spread);
        Some((alpha * (1.0 - alpha) / n as f64).sqrt() / density)
    }
}

/// 0-based index of the right-continuous empirical `(1-alpha)`-quantile,
/// the order statistic `ceil((1 - alpha) N)`.
fn quantile_index(alpha: f64, n: usize) -> usize {
    let k = ((1.0 - alpha) * n as f64).ceil() as usize;
    k.clamp(1, n) - 1
}

/// Precomputed per-pair rows of the limit simulation.
struct PairRow {
    /// first noise-cell index with nonzero weight
    offset: usize,
    /// `K((z_j - y)/h) sqrt(q(z_j))` over the support
    weights: Vec<f64>,
    norm: f64,
    correction: f64,
}

struct UEngine {
    noise_res: usize,
    cell: f64,
    rows_plus: Vec<PairRow>,
    rows_minus: Vec<PairRow>,
    symmetric: bool,
}

impl UEngine {
    fn build(config: &QuantileConfig) -> Result<Self> {
        config.validate()?;
        Self::build_unchecked(config)
    }

    fn build_unchecked(config: &QuantileConfig) -> Result<Self> {
        let a = config.radius;
        let n2 = config.noise_res;
        let cell = 2.0 * a / n2 as f64;
        let z: Vec<f64> = (0..n2).map(|j| -a + j as f64 * cell).collect();

        let density_values = |eta: f64| -> Result<Vec<f64>> {
            let drift = if eta == 0.0 {
                config.reference.clone()
            } else {
                config.reference.with_offset(eta)?
            };
            let table = DensityTable::build(&drift, DensityTable::SAMPLING_NODES);
            Ok(z.iter().map(|zz| table.eval(*zz)).collect())
        };
        let q_plus = density_values(config.eta)?;
        let q_minus = if config.eta == 0.0 { q_plus.clone() } else { density_values(-config.eta)? };

        let build_rows = |q: &[f64]| -> Result<Vec<PairRow>> {
            let sigma_max_sq: f64 = q.iter().sum::<f64>() * cell;
            let n1 = config.grid_res;
            let step = a / n1 as f64;
            let mut rows = Vec::new();
            for ih in 1..=n1 {
                let h = ih as f64 * step;
                for iy in 0..=(2 * n1) {
                    let y = -a + iy as f64 * step;
                    if y - h < -a - 1e-12 || y + h > a + 1e-12 {
                        continue;
                    }
                    let lo = z.partition_point(|zz| *zz <= y - h);
                    let hi = z.partition_point(|zz| *zz < y + h);
                    if lo >= hi {
                        continue;
                    }
                    let mut weights = Vec::with_capacity(hi - lo);
                    let mut var = 0.0;
                    for j in lo..hi {
                        let k = config.kernel.rescaled(y, h, z[j]);
                        weights.push(k * q[j].sqrt());
                        var += k * k * q[j] * cell;
                    }
                    if var < ACTIVATION_FLOOR {
                        continue;
                    }
                    let corr = correction((var / sigma_max_sq).min(1.0))?;
                    rows.push(PairRow { offset: lo, weights, norm: var.sqrt(), correction: corr });
                }
            }
            if rows.is_empty() {
                return Err(Error::InvalidConfig("no active (y, h) pair in the limit grid".into()));
            }
            Ok(rows)
        };

        Ok(UEngine {
            noise_res: n2,
            cell,
            rows_plus: build_rows(&q_plus)?,
            rows_minus: build_rows(&q_minus)?,
            symmetric: config.eta == 0.0,
        })
    }

    fn draw_increments(&self, master_seed: u64, replication: u64) -> Vec<f64> {
        let mut r = rng::stream(master_seed, replication);
        let sd = self.cell.sqrt();
        (0..self.noise_res)
            .map(|_| sd * r.sample::<f64, _>(StandardNormal))
            .collect()
    }

    fn sup_over(rows: &[PairRow], dw: &[f64]) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for row in rows {
            let mut z = 0.0;
            for (w, d) in row.weights.iter().zip(&dw[row.offset..]) {
                z += w * d;
            }
            let v = (z / row.norm).abs() - row.correction;
            if v > best {
                best = v;
            }
        }
        best
    }

    /// One draw of `U_1 v U_2`; both sups see the same increments.
    fn simulate_u(&self, master_seed: u64, replication: u64) -> f64 {
        let dw = self.draw_increments(master_seed, replication);
        let u1 = Self::sup_over(&self.rows_plus, &dw);
        if self.symmetric {
            return u1;
        }
        u1.max(Self::sup_over(&self.rows_minus, &dw))
    }

    /// Signed normalized integrals of the plus-density rows (diagnostics).
    #[cfg(test)]
    fn signed_ratios(&self, master_seed: u64, replication: u64) -> Vec<f64> {
        let dw = self.draw_increments(master_seed, replication);
        self.rows_plus
            .iter()
            .map(|row| {
                let mut z = 0.0;
                for (w, d) in row.weights.iter().zip(&dw[row.offset..]) {
                    z += w * d;
                }
                z / row.norm
            })
            .collect()
    }
}

/// One draw of `U_1 v U_2` for the given replication index.
pub fn simulate_u(config: &QuantileConfig, replication: u64) -> Result<f64> {
    let engine = UEngine::build(config)?;
    Ok(engine.simulate_u(config.master_seed, replication))
}

/// Simulates the similarity thresholds `kappa_{eta, alpha}` for all
/// requested levels: the empirical `(1-alpha)`-quantile of `U_1 v U_2` plus
/// the deterministic shift `4 sqrt(A eta / sigma^2)`.
pub fn kappa_similarity(config: &QuantileConfig) -> Result<QuantileTable> {
    let engine = UEngine::build(config)?;
    let n = config.replications;
    let mut sample: Vec<f64> = (0..n as u64)
        .into_par_iter()
        .map(|i| engine.simulate_u(config.master_seed, i))
        .collect();
    sample.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let shift = 4.0 * (config.radius * config.eta / (config.sigma * config.sigma)).sqrt();
    let rows = config
        .alphas
        .iter()
        .map(|&alpha| {
            let raw = sample[quantile_index(alpha, n)];
            QuantileRow {
                eta: config.eta,
                alpha,
                kappa_raw: raw,
                kappa: raw + shift,
                replications: n,
                seed: config.master_seed,
            }
        })
        .collect();
    Ok(QuantileTable {
        rows,
        sample,
        grid_res: config.grid_res,
        noise_res: config.noise_res,
    })
}

/// Quantiles of the simple-null limit statistic `S_{b0}`: the same machinery
/// with the single density `q_{b0}` and no shift.
#[allow(clippy::too_many_arguments)]
pub fn kappa_simple(
    reference: &DriftSpec,
    radius: f64,
    sigma: f64,
    alphas: &[f64],
    replications: usize,
    grid_res: usize,
    noise_res: usize,
    master_seed: u64,
) -> Result<QuantileTable> {
    kappa_similarity(&QuantileConfig {
        reference: reference.clone(),
        radius,
        sigma,
        eta: 0.0,
        alphas: alphas.to_vec(),
        replications,
        grid_res,
        noise_res,
        master_seed,
        kernel: KernelId::QuarticSmooth,
    })
}
