//! Invariant suite behind the `verify` subcommand.

use std::time::Instant;

use iontrap_core::analytic::{jc_propagator, mean_excitation_analytic, uniform_grid};
use iontrap_core::fockspace::{
    build_displacement, CoherentAmplitude, Interior, SpaceDims, UNITARY_TOL,
};
use iontrap_core::hamiltonians::{
    build_full_hamiltonian, build_t, build_transformed_hamiltonian, IonParams,
};
use iontrap_core::propagator::{evolve_pipeline, HamiltonianChoice};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub all_passed: bool,
}

const REFERENCE_ALPHAS: [Complex64; 2] = [Complex64::new(5.0, 0.5), Complex64::new(0.5, 5.0)];

fn timed(
    name: &str,
    tolerance: f64,
    f: impl FnOnce() -> Result<f64, CliError>,
) -> Result<Check, CliError> {
    let start = Instant::now();
    let value = f()?;
    Ok(Check {
        name: name.to_string(),
        value,
        tolerance,
        pass: value <= tolerance,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Transformation identity, unitarity and analytic-versus-oracle agreement.
/// `identity_n_max` sets the truncation of the identity check and
/// `tau_max` the range of the oracle comparison.
pub fn verify(identity_n_max: usize, tau_max: f64) -> Result<VerifyReport, CliError> {
    let p = IonParams::new(1.0, 0.5, 0.0, 0.5)?;
    let mut checks = Vec::new();

    checks.push(timed(
        "transformation identity |T H T^dag - H'|",
        1e-6,
        || {
            let dims = SpaceDims::new(identity_n_max)?;
            let mut worst: f64 = 0.0;
            for eta in [0.1, 0.5, 1.0, 2.0] {
                let p = IonParams::new(1.0, 0.5, 0.0, eta)?;
                let t = build_t(&p, dims);
                let lhs = &(&t * &build_full_hamiltonian(&p, dims)) * &t.adjoint();
                let diff = &lhs - &build_transformed_hamiltonian(&p, dims)?;
                worst = worst.max(diff.max_abs_on(&Interior::displacement(identity_n_max, eta)));
            }
            Ok(worst)
        },
    )?);

    checks.push(timed("unitarity of T, D and U_I", UNITARY_TOL, || {
        let mut worst: f64 = 0.0;
        for alpha in REFERENCE_ALPHAS {
            let n = CoherentAmplitude::new(alpha, 0.5).auto_n_max();
            let dims = SpaceDims::new(n)?;
            let reach = Interior::displacement(n, 2.0 * p.beta().norm());
            worst = worst.max(build_t(&p, dims).unitarity_defect(&reach));
            worst = worst.max(build_displacement(p.beta(), n)?.unitarity_defect(&reach));
            for tau in [1.0, 50.0, 300.0] {
                worst =
                    worst.max(jc_propagator(tau, dims).unitarity_defect(&Interior::propagation(n)));
            }
        }
        Ok(worst)
    })?);

    checks.push(timed("analytic vs oracle_rwa max |dn|", 1e-6, || {
        let grid = uniform_grid(tau_max, 0.05)?;
        let mut worst: f64 = 0.0;
        for alpha in REFERENCE_ALPHAS {
            let a = CoherentAmplitude::new(alpha, 0.5);
            let dims = SpaceDims::new(a.auto_n_max())?;
            let closed = mean_excitation_analytic(&a, &p, &grid, dims)?;
            let oracle = evolve_pipeline(&p, &a, &grid, HamiltonianChoice::Rwa, dims)?;
            worst = worst.max(closed.max_abs_deviation(&oracle)?);
        }
        Ok(worst)
    })?);

    checks.push(timed("initial value |<n>(0) - |alpha|^2|", 1e-6, || {
        let mut worst: f64 = 0.0;
        for alpha in REFERENCE_ALPHAS {
            let a = CoherentAmplitude::new(alpha, 0.5);
            let dims = SpaceDims::new(a.auto_n_max())?;
            let s = mean_excitation_analytic(&a, &p, &[0.0], dims)?;
            worst = worst.max((s.n_mean()[0] - a.n_bar()).abs());
        }
        Ok(worst)
    })?);

    let all_passed = checks.iter().all(|c| c.pass);
    Ok(VerifyReport { checks, all_passed })
}
