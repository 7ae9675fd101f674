//! Serialization of the domain types.
//!
//! Paths and tables go to CSV with a comment header carrying the exact
//! parameters and seed needed to reproduce the file; detection results and
//! alternative sets go to JSON.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::fbm::StabilityRow;
use crate::lower_bound::AlternativeSet;
use crate::multiscale::{DetectionResult, LocalScore};
use crate::quantiles::QuantileTable;
use crate::sde::{DensityTable, SamplePath};

/// Sample path as CSV: one `# drift=.. sigma=.. dt=.. seed=.. hurst=..`
/// header line, then `t,x` rows.
pub fn path_to_csv(path: &SamplePath, drift_id: &str, sigma: f64) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# drift={} sigma={} dt={} seed={} hurst={}",
        drift_id, sigma, path.dt, path.seed, path.hurst
    );
    let _ = writeln!(out, "t,x");
    for (i, x) in path.values.iter().enumerate() {
        let _ = writeln!(out, "{},{}", i as f64 * path.dt, x);
    }
    out
}

/// Parses the CSV path format back; returns the drift id as well.
pub fn path_from_csv(text: &str) -> Result<(SamplePath, String)> {
    let mut drift_id = String::new();
    let mut dt = None;
    let mut seed = 0u64;
    let mut hurst = 0.5;
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('#') {
            for tok in header.split_whitespace() {
                if let Some((k, v)) = tok.split_once('=') {
                    match k {
                        "drift" => drift_id = v.to_string(),
                        "dt" => dt = v.parse().ok(),
                        "seed" => seed = v.parse().unwrap_or(0),
                        "hurst" => hurst = v.parse().unwrap_or(0.5),
                        _ => {}
                    }
                }
            }
            continue;
        }
        if line == "t,x" {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 {
            return Err(Error::InvalidConfig(format!(
                "line {}: expected 2 comma-separated columns, found {}",
                lineno + 1,
                fields.len()
            )));
        }
        let x: f64 = fields[1].trim().parse().map_err(|_| {
            Error::InvalidConfig(format!("line {}: unparsable value '{}'", lineno + 1, fields[1]))
        })?;
        values.push(x);
    }
    let dt = dt.ok_or_else(|| Error::InvalidConfig("missing dt in path header".into()))?;
    if values.len() < 2 {
        return Err(Error::InvalidConfig("path needs at least two samples".into()));
    }
    Ok((SamplePath { dt, values, hurst, seed }, drift_id))
}

/// Density table as CSV (`z,q`).
pub fn density_to_csv(table: &DensityTable) -> String {
    let mut out = String::from("z,q\n");
    for (z, q) in table.grid.iter().zip(&table.values) {
        let _ = writeln!(out, "{z},{q}");
    }
    out
}

/// Quantile table as CSV with the schema
/// `eta,alpha,kappa_raw,kappa,N,n1,n2,seed`.
pub fn quantiles_to_csv(tables: &[QuantileTable], header: &str) -> String {
    let mut out = String::new();
    if !header.is_empty() {
        for line in header.lines() {
            let _ = writeln!(out, "# {line}");
        }
    }
    let _ = writeln!(out, "eta,alpha,kappa_raw,kappa,N,n1,n2,seed");
    for t in tables {
        for r in &t.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.eta, r.alpha, r.kappa_raw, r.kappa, r.replications, t.grid_res, t.noise_res,
                r.seed
            );
        }
    }
    out
}

/// Per-pair scores as CSV
/// (`y,h,psi,lambda,sigma_hat_sq,correction,score,active`).
pub fn scores_to_csv(scores: &[LocalScore], header: &str) -> String {
    let mut out = String::new();
    if !header.is_empty() {
        for line in header.lines() {
            let _ = writeln!(out, "# {line}");
        }
    }
    let _ = writeln!(out, "y,h,psi,lambda,sigma_hat_sq,correction,score,active");
    for s in scores {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            s.y, s.h, s.psi, s.lambda, s.sigma_hat_sq, s.correction, s.score, s.active
        );
    }
    out
}

/// Detection result as JSON:
/// `{statistic, kappa, reject, minimal: [{y, h, score}], detected_count}`.
pub fn detection_to_json(result: &DetectionResult, config: &impl Serialize) -> Result<String> {
    let minimal: Vec<_> = result
        .minimal
        .iter()
        .map(|&(y, h)| {
            let score = result
                .per_point
                .iter()
                .find(|s| s.y == y && s.h == h)
                .map(|s| s.score)
                .unwrap_or(f64::NAN);
            json!({"y": y, "h": h, "score": score})
        })
        .collect();
    let value = json!({
        "statistic": result.statistic,
        "kappa": result.kappa,
        "reject": result.reject,
        "minimal": minimal,
        "detected_count": result.detected.len(),
        "config": serde_json::to_value(config).map_err(to_io)?,
    });
    serde_json::to_string_pretty(&value).map_err(to_io)
}

/// Stability table as CSV
/// (`H,median_sup_gap,median_stat_gap,reps,T,dt,seed`).
pub fn stability_to_csv(rows: &[StabilityRow], horizon: f64, dt: f64, seed: u64) -> String {
    let mut out = String::from("H,median_sup_gap,median_stat_gap,reps,T,dt,seed\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.hurst, r.median_sup_gap, r.median_stat_gap, r.replications, horizon, dt, seed
        );
    }
    out
}

/// Alternative set as JSON:
/// `{delta_T, c_star, bumps: [{w, y, h, amplitude}], N}`.
pub fn alternatives_to_json(set: &AlternativeSet, config: &impl Serialize) -> Result<String> {
    let bumps: Vec<_> = set
        .bumps
        .iter()
        .map(|b| json!({"w": b.weight, "y": b.center, "h": b.bandwidth, "amplitude": b.amplitude}))
        .collect();
    let value = json!({
        "delta_T": set.delta_t,
        "c_star": set.c_star,
        "bumps": bumps,
        "N": set.bumps.len(),
        "config": serde_json::to_value(config).map_err(to_io)?,
    });
    serde_json::to_string_pretty(&value).map_err(to_io)
}

fn to_io(e: serde_json::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Writes text to a file, surfacing the path on failure.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}
