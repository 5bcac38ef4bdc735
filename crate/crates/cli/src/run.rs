//! Single simulation: evaluate a series, analyse revivals, write files.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use iontrap_core::analytic::{uniform_grid, AnalyticEvaluator, ExcitationSeries, CONVENTION};
use iontrap_core::fockspace::{SpaceDims, BASIS_ORDERING};
use iontrap_core::hamiltonians::{IonParams, RwaDiagnostics};
use iontrap_core::propagator::PipelineEvaluator;
use iontrap_core::revivals::{detect_revivals_with, RevivalOptions, RevivalReport};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Mode, RunConfig};
use crate::error::CliError;

/// Agreement required between the closed form and an oracle in compare mode.
pub const COMPARE_TOLERANCE: f64 = 1e-6;

pub const SERIES_FILE: &str = "series.csv";
pub const REPORT_FILE: &str = "report.json";
pub const SUMMARY_FILE: &str = "summary.json";

/// Prefactor conventions of the closed form, recorded with every run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConventionMeta {
    pub coefficient_prefactor: f64,
    pub sine_sign: f64,
    pub interference_sign: f64,
    pub propagator_prefactor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub basis_ordering: String,
    pub provenance: String,
    pub n_max: usize,
    pub n_points: usize,
    pub g: f64,
    pub alpha_tilde_re: f64,
    pub alpha_tilde_im: f64,
    pub rwa_regime: bool,
    pub rwa_diagnostics: RwaDiagnostics,
    pub warnings: Vec<String>,
    pub convention: ConventionMeta,
    pub revivals: Option<RevivalReport>,
    pub revival_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareSummary {
    pub reference: String,
    pub n_points: usize,
    pub max_abs_dev: f64,
    pub tau_at_max_dev: f64,
    pub tolerance: f64,
    pub within_tolerance: bool,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub series: ExcitationSeries,
    pub reference: Option<ExcitationSeries>,
    pub report: RunReport,
    pub summary: Option<CompareSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFiles {
    pub series: PathBuf,
    pub report: PathBuf,
    pub summary: Option<PathBuf>,
}

/// Warnings about what the Jaynes-Cummings form leaves out for these parameters.
pub fn rwa_warnings(p: &IonParams, mode: Mode) -> Vec<String> {
    let mut out = Vec::new();
    if mode == Mode::LabFull || mode == Mode::OracleFull {
        return out;
    }
    let d = p.rwa_diagnostics();
    if d.dropped_detuning_ratio != 0.0 {
        out.push(format!(
            "detuning term dropped by the RWA: |delta|/2g = {:.3e}",
            d.dropped_detuning_ratio
        ));
    }
    out
}

enum Evaluator {
    Analytic(AnalyticEvaluator),
    Pipeline(Box<PipelineEvaluator>),
}

impl Evaluator {
    fn build(cfg: &RunConfig, mode: Mode, p: IonParams, dims: SpaceDims) -> Result<Self, CliError> {
        let alpha = cfg.amplitude();
        Ok(match mode.pipeline() {
            None => Evaluator::Analytic(AnalyticEvaluator::new(alpha, p, dims)?),
            Some(choice) => {
                Evaluator::Pipeline(Box::new(PipelineEvaluator::new(p, alpha, choice, dims)?))
            }
        })
    }

    fn value(&self, tau: f64) -> f64 {
        match self {
            Evaluator::Analytic(e) => e.mean_excitation(tau),
            Evaluator::Pipeline(e) => e.mean_excitation(tau),
        }
    }

    fn series(&self, grid: &[f64], parallel: bool) -> Result<ExcitationSeries, CliError> {
        let values: Vec<f64> = if parallel {
            grid.par_iter().map(|&t| self.value(t)).collect()
        } else {
            grid.iter().map(|&t| self.value(t)).collect()
        };
        Ok(match self {
            Evaluator::Analytic(e) => e.assemble(grid.to_vec(), values)?,
            Evaluator::Pipeline(e) => e.assemble(grid.to_vec(), values)?,
        })
    }
}

/// Runs the computation without touching the file system. `parallel`
/// spreads the time grid over the rayon pool; results are identical
/// either way.
pub fn execute(cfg: &RunConfig, parallel: bool) -> Result<RunOutcome, CliError> {
    cfg.validate()?;
    let p = IonParams::new(cfg.nu, cfg.omega, cfg.delta, cfg.eta)?;
    let n_max = cfg.resolve_n_max();
    let required = cfg.required_n_max();
    if n_max < required {
        return Err(iontrap_core::Error::TruncationTooSmall { required, n_max }.into());
    }
    let dims = SpaceDims::new(n_max)?;
    let grid = uniform_grid(cfg.tau_max, cfg.tau_step)?;

    let primary_mode = if cfg.mode == Mode::Compare {
        Mode::Analytic
    } else {
        cfg.mode
    };
    let series = Evaluator::build(cfg, primary_mode, p, dims)?.series(&grid, parallel)?;
    let reference = if cfg.mode == Mode::Compare {
        Some(Evaluator::build(cfg, cfg.reference, p, dims)?.series(&grid, parallel)?)
    } else {
        None
    };
    let summary = reference
        .as_ref()
        .map(|r| compare(&series, r, cfg.reference));

    let opts = RevivalOptions {
        require_super_revival_span: false,
        ..Default::default()
    };
    let (revivals, revival_error) = match detect_revivals_with(&series, &opts) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let alpha = cfg.amplitude();
    let report = RunReport {
        config: cfg.clone(),
        basis_ordering: BASIS_ORDERING.to_string(),
        provenance: series.provenance().as_str().to_string(),
        n_max,
        n_points: grid.len(),
        g: p.g(),
        alpha_tilde_re: alpha.alpha_tilde().re,
        alpha_tilde_im: alpha.alpha_tilde().im,
        rwa_regime: p.rwa_regime(),
        rwa_diagnostics: p.rwa_diagnostics(),
        warnings: rwa_warnings(&p, cfg.mode),
        convention: ConventionMeta {
            coefficient_prefactor: CONVENTION.coefficient_prefactor,
            sine_sign: CONVENTION.sine_sign,
            interference_sign: CONVENTION.interference_sign,
            propagator_prefactor: CONVENTION.propagator_prefactor,
        },
        revivals,
        revival_error,
    };
    Ok(RunOutcome {
        series,
        reference,
        report,
        summary,
    })
}

fn compare(series: &ExcitationSeries, reference: &ExcitationSeries, mode: Mode) -> CompareSummary {
    let (mut max_abs_dev, mut tau_at_max_dev) = (0.0f64, series.tau()[0]);
    for ((&t, a), b) in series
        .tau()
        .iter()
        .zip(series.n_mean())
        .zip(reference.n_mean())
    {
        let d = (a - b).abs();
        if d > max_abs_dev {
            max_abs_dev = d;
            tau_at_max_dev = t;
        }
    }
    CompareSummary {
        reference: mode.as_str().to_string(),
        n_points: series.len(),
        max_abs_dev,
        tau_at_max_dev,
        tolerance: COMPARE_TOLERANCE,
        within_tolerance: max_abs_dev <= COMPARE_TOLERANCE,
    }
}

/// 17 significant digits, enough for a lossless `f64` round trip.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_series_csv(
    path: &Path,
    series: &ExcitationSeries,
    reference: Option<&ExcitationSeries>,
) -> Result<(), CliError> {
    let io = |e| CliError::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    let header = if reference.is_some() {
        "tau,n_mean,n_mean_oracle,abs_dev"
    } else {
        "tau,n_mean"
    };
    writeln!(w, "{header}").map_err(io)?;
    for (k, (&t, &v)) in series.tau().iter().zip(series.n_mean()).enumerate() {
        match reference {
            Some(r) => {
                let o = r.n_mean()[k];
                writeln!(
                    w,
                    "{},{},{},{}",
                    format_float(t),
                    format_float(v),
                    format_float(o),
                    format_float((v - o).abs())
                )
            }
            None => writeln!(w, "{},{}", format_float(t), format_float(v)),
        }
        .map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let io = |e| CliError::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| CliError::io(path, std::io::Error::other(e)))?;
    writeln!(w).map_err(io)?;
    w.flush().map_err(io)
}

pub fn write_outputs(outcome: &RunOutcome, dir: &Path) -> Result<OutputFiles, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let files = OutputFiles {
        series: dir.join(SERIES_FILE),
        report: dir.join(REPORT_FILE),
        summary: outcome.summary.as_ref().map(|_| dir.join(SUMMARY_FILE)),
    };
    write_series_csv(&files.series, &outcome.series, outcome.reference.as_ref())?;
    write_json(&files.report, &outcome.report)?;
    if let (Some(summary), Some(path)) = (&outcome.summary, &files.summary) {
        write_json(path, summary)?;
    }
    Ok(files)
}

/// `execute` followed by `write_outputs` into `cfg.output`.
pub fn run(cfg: &RunConfig, parallel: bool) -> Result<(RunOutcome, OutputFiles), CliError> {
    let outcome = execute(cfg, parallel)?;
    let files = write_outputs(&outcome, &cfg.output)?;
    Ok((outcome, files))
}
