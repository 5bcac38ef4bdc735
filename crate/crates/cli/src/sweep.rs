//! Cartesian parameter sweeps over `RunConfig` keys.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::run::{run, write_json};

pub const DEFAULT_CAP: usize = 10_000;
pub const INDEX_FILE: &str = "index.json";

/// One swept key and its values, kept as strings so any key accepted by
/// [`RunConfig::set`] can be swept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub key: String,
    pub values: Vec<String>,
}

impl Axis {
    /// `key=v1,v2,...` or `key=start:stop:count` (inclusive, evenly spaced).
    pub fn parse(spec: &str) -> Result<Self, CliError> {
        let (key, rest) = spec
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("grid '{spec}': expected key=values")))?;
        let key = key.trim().replace('-', "_");
        let rest = rest.trim();
        let values = if rest.contains(':') {
            linspace(&key, rest)?
        } else {
            rest.split(',')
                .map(|v| v.trim().to_string())
                .filter(|v| !v.is_empty())
                .collect()
        };
        if values.is_empty() {
            return Err(CliError::usage(format!("grid '{spec}': no values")));
        }
        // fail early on keys or values the configuration rejects
        let mut probe = RunConfig::default();
        for v in &values {
            probe.set(&key, v)?;
        }
        Ok(Self { key, values })
    }
}

fn linspace(key: &str, spec: &str) -> Result<Vec<String>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || {
        CliError::usage(format!(
            "grid {key}: expected start:stop:count, got '{spec}'"
        ))
    };
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if count == 0 {
        return Err(bad());
    }
    Ok((0..count)
        .map(|k| {
            let v = if count == 1 {
                start
            } else {
                start + (stop - start) * k as f64 / (count - 1) as f64
            };
            format!("{v}")
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub index: usize,
    pub parameters: Map<String, Value>,
    pub status: String,
    pub exit_code: u8,
    pub error: Option<String>,
    pub output_dir: PathBuf,
    pub series: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub super_revival_detected: Option<bool>,
    pub tau_r_measured: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepIndex {
    pub base_config: RunConfig,
    pub grid: Vec<Axis>,
    pub total: usize,
    pub succeeded: usize,
    pub failed: usize,
    pub points: Vec<PointRecord>,
}

impl SweepIndex {
    /// Worst exit code among the points (0 when all succeeded).
    pub fn exit_code(&self) -> u8 {
        self.points.iter().map(|p| p.exit_code).max().unwrap_or(0)
    }
}

fn check_alpha_axes(axes: &[Axis]) -> Result<(), CliError> {
    let has = |names: &[&str]| axes.iter().any(|a| names.contains(&a.key.as_str()));
    if has(&["alpha_abs", "alpha_arg"]) && has(&["alpha", "alpha_re", "alpha_im"]) {
        return Err(CliError::usage(
            "sweep cannot mix polar (alpha_abs, alpha_arg) and cartesian alpha keys",
        ));
    }
    let mut seen = std::collections::HashSet::new();
    for a in axes {
        if !seen.insert(a.key.as_str()) {
            return Err(CliError::usage(format!("grid key '{}' given twice", a.key)));
        }
    }
    Ok(())
}

/// Total number of grid points, or `None` on overflow.
pub fn point_count(axes: &[Axis]) -> Option<usize> {
    axes.iter()
        .try_fold(1usize, |acc, a| acc.checked_mul(a.values.len()))
}

/// Value tuples in row-major order (the last axis varies fastest).
fn combinations(axes: &[Axis], total: usize) -> Vec<Vec<&str>> {
    (0..total)
        .map(|mut flat| {
            let mut combo = vec![""; axes.len()];
            for (slot, axis) in combo.iter_mut().zip(axes).rev() {
                let n = axis.values.len();
                *slot = axis.values[flat % n].as_str();
                flat /= n;
            }
            combo
        })
        .collect()
}

fn json_value(v: &str) -> Value {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => {
            serde_json::Number::from_f64(x).map_or(Value::String(v.into()), Value::Number)
        }
        _ => Value::String(v.to_string()),
    }
}

fn run_point(
    base: &RunConfig,
    axes: &[Axis],
    combo: &[&str],
    index: usize,
    root: &Path,
) -> PointRecord {
    let output_dir = root.join(format!("point_{index:05}"));
    let mut parameters = Map::new();
    for (axis, v) in axes.iter().zip(combo) {
        parameters.insert(axis.key.clone(), json_value(v));
    }
    let mut cfg = base.clone();
    cfg.output = output_dir.clone();
    let result = axes
        .iter()
        .zip(combo)
        .try_for_each(|(axis, v)| cfg.set(&axis.key, v))
        .and_then(|_| run(&cfg, false));
    let mut record = PointRecord {
        index,
        parameters,
        status: "ok".into(),
        exit_code: 0,
        error: None,
        output_dir,
        series: None,
        report: None,
        summary: None,
        super_revival_detected: None,
        tau_r_measured: None,
    };
    match result {
        Ok((outcome, files)) => {
            let revivals = outcome.report.revivals.as_ref();
            record.super_revival_detected = revivals.map(|r| r.super_revival_detected);
            record.tau_r_measured = revivals.map(|r| r.tau_r_measured);
            record.series = Some(files.series);
            record.report = Some(files.report);
            record.summary = files.summary;
        }
        Err(e) => {
            record.status = "error".into();
            record.exit_code = e.exit_code();
            record.error = Some(e.to_string());
        }
    }
    record
}

/// Runs every grid point (concurrently, one point per worker) and writes
/// `index.json` into `root` once all points are done. Failed points are
/// recorded, not fatal.
pub fn sweep(
    base: &RunConfig,
    axes: &[Axis],
    cap: usize,
    root: &Path,
) -> Result<SweepIndex, CliError> {
    if axes.is_empty() {
        return Err(CliError::usage("sweep needs at least one --grid axis"));
    }
    check_alpha_axes(axes)?;
    let total = point_count(axes)
        .filter(|&n| n <= cap)
        .ok_or_else(|| CliError::usage(format!("sweep exceeds the cap of {cap} points")))?;
    fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
    let combos = combinations(axes, total);
    let points: Vec<PointRecord> = combos
        .par_iter()
        .enumerate()
        .map(|(index, combo)| run_point(base, axes, combo, index, root))
        .collect();
    let failed = points.iter().filter(|p| p.status != "ok").count();
    let index = SweepIndex {
        base_config: base.clone(),
        grid: axes.to_vec(),
        total,
        succeeded: total - failed,
        failed,
        points,
    };
    write_json(&root.join(INDEX_FILE), &index)?;
    Ok(index)
}
