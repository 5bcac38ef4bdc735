//! Run configuration: defaults, then a flat `key = value` file, then flags.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use iontrap_core::fockspace::{truncation_rule, CoherentAmplitude};
use iontrap_core::propagator::HamiltonianChoice;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Analytic,
    OracleRwa,
    OracleFull,
    LabFull,
    Compare,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Analytic => "analytic",
            Mode::OracleRwa => "oracle_rwa",
            Mode::OracleFull => "oracle_full",
            Mode::LabFull => "lab_full",
            Mode::Compare => "compare",
        }
    }

    /// Matrix pipeline behind an oracle mode.
    pub fn pipeline(&self) -> Option<HamiltonianChoice> {
        match self {
            Mode::OracleRwa => Some(HamiltonianChoice::Rwa),
            Mode::OracleFull => Some(HamiltonianChoice::TransformedFull),
            Mode::LabFull => Some(HamiltonianChoice::LabFull),
            Mode::Analytic | Mode::Compare => None,
        }
    }
}

impl FromStr for Mode {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().replace('-', "_").as_str() {
            "analytic" => Ok(Mode::Analytic),
            "oracle_rwa" => Ok(Mode::OracleRwa),
            "oracle_full" => Ok(Mode::OracleFull),
            "lab_full" => Ok(Mode::LabFull),
            "compare" => Ok(Mode::Compare),
            other => Err(CliError::usage(format!(
                "unknown mode '{other}' (expected analytic, oracle_rwa, oracle_full, lab_full or compare)"
            ))),
        }
    }
}

/// Fock truncation: explicit, or resolved from the coherent amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum NMax {
    Auto,
    Fixed(usize),
}

impl fmt::Display for NMax {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NMax::Auto => f.write_str("auto"),
            NMax::Fixed(n) => write!(f, "{n}"),
        }
    }
}

impl FromStr for NMax {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("auto") {
            return Ok(NMax::Auto);
        }
        s.parse::<usize>()
            .ok()
            .filter(|&n| n >= 2)
            .map(NMax::Fixed)
            .ok_or_else(|| {
                CliError::usage(format!(
                    "n_max must be 'auto' or an integer >= 2, got '{s}'"
                ))
            })
    }
}

impl From<NMax> for String {
    fn from(n: NMax) -> String {
        n.to_string()
    }
}

impl TryFrom<String> for NMax {
    type Error = CliError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub nu: f64,
    pub omega: f64,
    pub delta: f64,
    pub eta: f64,
    pub alpha_re: f64,
    pub alpha_im: f64,
    pub tau_max: f64,
    pub tau_step: f64,
    pub n_max: NMax,
    pub mode: Mode,
    /// Oracle compared against in `compare` mode.
    pub reference: Mode,
    pub output: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            nu: 1.0,
            omega: 0.5,
            delta: 0.0,
            eta: 0.5,
            alpha_re: 0.5,
            alpha_im: 5.0,
            tau_max: 300.0,
            tau_step: 0.05,
            n_max: NMax::Auto,
            mode: Mode::Analytic,
            reference: Mode::OracleRwa,
            output: PathBuf::from("out"),
        }
    }
}

/// `a+bi`, `a-bi`, `bi` or `a`; `j` is accepted for `i`.
pub fn parse_complex(s: &str) -> Result<Complex64, CliError> {
    let cleaned: String = s
        .chars()
        .filter(|c| !c.is_whitespace())
        .collect::<String>()
        .replace('j', "i");
    Complex64::from_str(&cleaned)
        .ok()
        .filter(|z| z.re.is_finite() && z.im.is_finite())
        .ok_or_else(|| {
            CliError::usage(format!(
                "cannot parse complex amplitude '{s}' (expected e.g. 0.5+5.0i)"
            ))
        })
}

fn parse_real(key: &str, value: &str) -> Result<f64, CliError> {
    value
        .trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::usage(format!("{key}: expected a finite number, got '{value}'")))
}

impl RunConfig {
    pub fn alpha(&self) -> Complex64 {
        Complex64::new(self.alpha_re, self.alpha_im)
    }

    /// Sets one field by name. Besides the field names this accepts
    /// `alpha` (complex string), `alpha_abs` and `alpha_arg` (polar, radians,
    /// each keeping the other polar component) and `output_path`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let key = key.trim().replace('-', "_");
        match key.as_str() {
            "nu" => self.nu = parse_real(&key, value)?,
            "omega" => self.omega = parse_real(&key, value)?,
            "delta" => self.delta = parse_real(&key, value)?,
            "eta" => self.eta = parse_real(&key, value)?,
            "alpha_re" => self.alpha_re = parse_real(&key, value)?,
            "alpha_im" => self.alpha_im = parse_real(&key, value)?,
            "alpha" => {
                let z = parse_complex(value)?;
                self.alpha_re = z.re;
                self.alpha_im = z.im;
            }
            "alpha_abs" => {
                let z = Complex64::from_polar(parse_real(&key, value)?, self.alpha().arg());
                self.alpha_re = z.re;
                self.alpha_im = z.im;
            }
            "alpha_arg" => {
                let z = Complex64::from_polar(self.alpha().norm(), parse_real(&key, value)?);
                self.alpha_re = z.re;
                self.alpha_im = z.im;
            }
            "tau_max" => self.tau_max = parse_real(&key, value)?,
            "tau_step" => self.tau_step = parse_real(&key, value)?,
            "n_max" => self.n_max = value.parse()?,
            "mode" => self.mode = value.parse()?,
            "reference" => self.reference = value.parse()?,
            "output" | "output_path" => self.output = PathBuf::from(value.trim()),
            other => {
                return Err(CliError::usage(format!(
                    "unknown configuration key '{other}'"
                )))
            }
        }
        Ok(())
    }

    /// Applies a flat `key = value` file; `#` starts a comment.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .or_else(|| line.split_once(':'))
                .ok_or_else(|| {
                    CliError::usage(format!(
                        "{}:{}: expected key = value",
                        path.display(),
                        lineno + 1
                    ))
                })?;
            self.set(key, value)
                .map_err(|e| CliError::usage(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.tau_step.is_nan() || self.tau_step <= 0.0 {
            return Err(CliError::usage(format!(
                "tau_step must be > 0, got {}",
                self.tau_step
            )));
        }
        if self.tau_max.is_nan() || self.tau_max <= self.tau_step {
            return Err(CliError::usage(format!(
                "tau_max must exceed tau_step, got tau_max = {} and tau_step = {}",
                self.tau_max, self.tau_step
            )));
        }
        if self.mode == Mode::Compare && self.reference.pipeline().is_none() {
            return Err(CliError::usage(
                "reference must be oracle_rwa, oracle_full or lab_full",
            ));
        }
        Ok(())
    }

    pub fn amplitude(&self) -> CoherentAmplitude {
        CoherentAmplitude::new(self.alpha(), self.eta)
    }

    /// Explicit value, or the truncation rule on `|α̃|` and `|α|` rounded up
    /// to a multiple of 16.
    pub fn resolve_n_max(&self) -> usize {
        match self.n_max {
            NMax::Fixed(n) => n,
            NMax::Auto => self.amplitude().auto_n_max(),
        }
    }

    /// Smallest admissible `n_max` for this configuration.
    pub fn required_n_max(&self) -> usize {
        let a = self.amplitude();
        match self.mode {
            Mode::Analytic => truncation_rule(a.alpha_tilde().norm()),
            _ => a.required_n_max(),
        }
    }
}
