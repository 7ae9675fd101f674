//! Kernel families used by the statistics and the lower-bound construction.
//!
//! All kernels are supported on `[-1, 1]`, non-negative and bounded by one.
//! `QuarticSmooth` is the only continuously differentiable variant and the
//! only one admitted by the pathwise statistic; the recovery kernels realize
//! the optimal-recovery solution for Hölder exponents `beta <= 1`, and the
//! truncated variant is its Lipschitz repair used when packing alternatives.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kernel selector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum KernelId {
    /// `15/16 (1 - x^2)^2` on `[-1, 1]`.
    QuarticSmooth,
    /// `1 - |x|^beta` on `[-1, 1]`, `beta` in `(0, 1]`.
    OptimalRecovery { beta: f64 },
    /// Optimal-recovery kernel flattened to `1 - T^-beta` on `[-1/T, 1/T]`.
    TruncatedRecovery { beta: f64, horizon: f64 },
}

impl KernelId {
    pub fn optimal_recovery(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::Unsupported(format!(
                "recovery kernel requires beta in (0,1], got {beta}"
            )));
        }
        Ok(KernelId::OptimalRecovery { beta })
    }

    pub fn truncated_recovery(beta: f64, horizon: f64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::Unsupported(format!(
                "truncated recovery kernel requires beta in (0,1], got {beta}"
            )));
        }
        if !(horizon > 1.0) {
            return Err(Error::Unsupported(format!(
                "truncated recovery kernel requires horizon > 1, got {horizon}"
            )));
        }
        Ok(KernelId::TruncatedRecovery { beta, horizon })
    }

    /// Whether the kernel is continuously differentiable (required by the
    /// pathwise statistic).
    pub fn is_c1(&self) -> bool {
        matches!(self, KernelId::QuarticSmooth)
    }

    /// Kernel value at `x`; zero outside `[-1, 1]`.
    pub fn eval(&self, x: f64) -> f64 {
        let ax = x.abs();
        if ax >= 1.0 {
            return 0.0;
        }
        match *self {
            KernelId::QuarticSmooth => {
                let s = 1.0 - x * x;
                15.0 / 16.0 * s * s
            }
            KernelId::OptimalRecovery { beta } => 1.0 - ax.powf(beta),
            KernelId::TruncatedRecovery { beta, horizon } => {
                let cut = 1.0 / horizon;
                if ax <= cut {
                    1.0 - horizon.powf(-beta)
                } else {
                    1.0 - ax.powf(beta)
                }
            }
        }
    }

    /// Derivative at `x`; only defined for the `C^1` variant.
    pub fn eval_derivative(&self, x: f64) -> Result<f64> {
        match self {
            KernelId::QuarticSmooth => {
                if x.abs() >= 1.0 {
                    Ok(0.0)
                } else {
                    Ok(-15.0 / 4.0 * x * (1.0 - x * x))
                }
            }
            other => Err(Error::NonDifferentiableKernel(other.to_string())),
        }
    }

    /// Rescaled kernel `K((x - y) / h)`, supported on `[y - h, y + h]`.
    pub fn rescaled(&self, y: f64, h: f64, x: f64) -> f64 {
        self.eval((x - y) / h)
    }

    /// `int K(x)^2 dx` in closed form.
    pub fn l2_norm_sq(&self) -> f64 {
        match *self {
            KernelId::QuarticSmooth => 5.0 / 7.0,
            KernelId::OptimalRecovery { beta } => recovery_l2_sq(beta),
            KernelId::TruncatedRecovery { beta, horizon } => {
                // Exact correction of the recovery norm on [-1/T, 1/T].
                let u = 1.0 / horizon;
                let removed = 2.0
                    * (u - 2.0 * u.powf(beta + 1.0) / (beta + 1.0)
                        + u.powf(2.0 * beta + 1.0) / (2.0 * beta + 1.0));
                let plateau = 1.0 - u.powf(beta);
                recovery_l2_sq(beta) - removed + 2.0 * u * plateau * plateau
            }
        }
    }

    /// `int_a^b K((z - y) / h) dz` for the exactly integrable variants.
    ///
    /// Antisymmetric in `(a, b)`; the truncated kernel is rejected as it only
    /// serves the lower-bound construction.
    pub fn antiderivative(&self, y: f64, h: f64, a: f64, b: f64) -> Result<f64> {
        if matches!(self, KernelId::TruncatedRecovery { .. }) {
            return Err(Error::Unsupported(
                "truncated recovery kernel has no pathwise antiderivative".into(),
            ));
        }
        Ok(h * (self.primitive((b - y) / h) - self.primitive((a - y) / h)))
    }

    /// `int_{-1}^{min(u, 1)} K(v) dv`, exact for every variant.
    pub(crate) fn primitive(&self, u: f64) -> f64 {
        let u = u.clamp(-1.0, 1.0);
        match *self {
            KernelId::QuarticSmooth => quartic_primitive(u),
            KernelId::OptimalRecovery { beta } => recovery_primitive(beta, u),
            KernelId::TruncatedRecovery { beta, horizon } => {
                let cut = 1.0 / horizon;
                let plateau = 1.0 - horizon.powf(-beta);
                if u <= -cut {
                    recovery_primitive(beta, u)
                } else if u <= cut {
                    recovery_primitive(beta, -cut) + (u + cut) * plateau
                } else {
                    recovery_primitive(beta, -cut) + 2.0 * cut * plateau
                        + (recovery_primitive(beta, u) - recovery_primitive(beta, cut))
                }
            }
        }
    }
}

impl fmt::Display for KernelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            KernelId::QuarticSmooth => write!(f, "quartic"),
            KernelId::OptimalRecovery { beta } => write!(f, "recovery:{beta}"),
            KernelId::TruncatedRecovery { beta, horizon } => write!(f, "trunc:{beta}:{horizon}"),
        }
    }
}

impl FromStr for KernelId {
    type Err = Error;

    /// Parses `quartic`, `recovery:<beta>` or `trunc:<beta>:<T>`.
    fn from_str(s: &str) -> Result<Self> {
        let mut it = s.split(':');
        match it.next() {
            Some("quartic") => Ok(KernelId::QuarticSmooth),
            Some("recovery") => {
                let beta = parse_f64(it.next(), "recovery:<beta>")?;
                KernelId::optimal_recovery(beta)
            }
            Some("trunc") => {
                let beta = parse_f64(it.next(), "trunc:<beta>:<T>")?;
                let horizon = parse_f64(it.next(), "trunc:<beta>:<T>")?;
                KernelId::truncated_recovery(beta, horizon)
            }
            _ => Err(Error::InvalidConfig(format!("unknown kernel '{s}'"))),
        }
    }
}

fn parse_f64(tok: Option<&str>, shape: &str) -> Result<f64> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::InvalidConfig(format!("kernel spec must look like '{shape}'")))
}

/// `2 (1 - 2/(beta+1) + 1/(2 beta + 1))`.
fn recovery_l2_sq(beta: f64) -> f64 {
    2.0 * (1.0 - 2.0 / (beta + 1.0) + 1.0 / (2.0 * beta + 1.0))
}

/// `int_{-1}^{u} 15/16 (1 - x^2)^2 dx`.
fn quartic_primitive(u: f64) -> f64 {
    15.0 / 16.0 * (u - 2.0 * u.powi(3) / 3.0 + u.powi(5) / 5.0) + 0.5
}

/// `int_{-1}^{u} (1 - |x|^beta) dx`, piecewise around zero.
fn recovery_primitive(beta: f64, u: f64) -> f64 {
    let bp = beta + 1.0;
    if u <= 0.0 {
        u + (-u).powf(bp) / bp + 1.0 - 1.0 / bp
    } else {
        (1.0 - 1.0 / bp) + u - u.powf(bp) / bp
    }
}

/// Optimal detection constant `c*(beta, L)` for `beta <= 1`.
pub fn optimal_constant(beta: f64, l: f64) -> Result<f64> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::Unsupported(format!(
            "optimal constant only available for beta in (0,1], got {beta}"
        )));
    }
    if l <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "Hölder constant must be positive, got {l}"
        )));
    }
    let norm_sq = recovery_l2_sq(beta);
    Ok((2.0 * l.powf(1.0 / beta) / ((2.0 * beta + 1.0) * norm_sq)).powf(beta / (2.0 * beta + 1.0)))
}
