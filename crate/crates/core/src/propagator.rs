//! Brute-force time evolution by exact diagonalization.
//!
//! For a time-independent Hermitian `Ĥ = V diag(λ) V†` the propagator is
//! `e^{−iĤt} = V e^{−iλt} V†`, so a state is projected onto the eigenbasis
//! once and each time point costs one matrix-vector product. There is no
//! time-stepping error, which keeps the RWA-versus-full comparison clean.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::analytic::{validate_grid, ExcitationSeries, Provenance};
use crate::error::{Error, Result};
use crate::fockspace::{
    coherent_state, mean_phonon_number, CoherentAmplitude, Electronic, OperatorMatrix, Space,
    SpaceDims, StateVector, HERMITIAN_TOL,
};
use crate::hamiltonians::{
    build_full_hamiltonian, build_t, build_transformed_hamiltonian, scaled_interaction, IonParams,
};
use crate::linalg::{self, CMatrix, CVector};

/// Relative bound on `‖ĤV − V diag(λ)‖` accepted from the eigensolver.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-9;

/// Exact propagator of a time-independent Hermitian operator.
#[derive(Debug, Clone)]
pub struct SpectralPropagator {
    hamiltonian: OperatorMatrix,
    eigenvalues: Vec<f64>,
    eigenvectors: OperatorMatrix,
    residual: f64,
}

impl SpectralPropagator {
    pub fn new(hamiltonian: &OperatorMatrix) -> Result<Self> {
        let scale = hamiltonian.max_abs().max(1.0);
        let defect = hamiltonian.hermiticity_defect();
        if defect > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian { defect });
        }
        let (eigenvalues, vectors) = linalg::hermitian_eigen(hamiltonian.entries());
        let lambda_max = eigenvalues.iter().fold(0.0f64, |acc, l| acc.max(l.abs()));
        let mut scaled = vectors.clone();
        for (j, &l) in eigenvalues.iter().enumerate() {
            scaled.column_mut(j).scale_mut(l);
        }
        let residual = linalg::max_abs(&(hamiltonian.entries() * &vectors - scaled));
        let tolerance = EIGEN_RESIDUAL_TOL * lambda_max.max(f64::MIN_POSITIVE);
        if residual > tolerance {
            return Err(Error::EigenResidual {
                residual,
                tolerance,
            });
        }
        let eigenvectors = OperatorMatrix::from_parts(hamiltonian.space(), vectors).unitary();
        Ok(Self {
            hamiltonian: hamiltonian.clone(),
            eigenvalues,
            eigenvectors,
            residual,
        })
    }

    pub fn hamiltonian(&self) -> &OperatorMatrix {
        &self.hamiltonian
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &OperatorMatrix {
        &self.eigenvectors
    }

    /// Measured `max|ĤV − V diag(λ)|`.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// `max|V†V − I|`.
    pub fn orthogonality_defect(&self) -> f64 {
        self.eigenvectors
            .unitarity_defect(&crate::fockspace::Interior::full(self.space().n_max()))
    }

    pub fn space(&self) -> Space {
        self.hamiltonian.space()
    }

    /// `e^{−iĤt}` as a matrix.
    pub fn operator(&self, t: f64) -> OperatorMatrix {
        let m = linalg::spectral_map(&self.eigenvalues, self.eigenvectors.entries(), |l| {
            Complex64::from_polar(1.0, -l * t)
        });
        OperatorMatrix::from_parts(self.space(), m).unitary()
    }

    /// Coefficients `V†ψ₀` of a state in the eigenbasis.
    pub fn project(&self, psi0: &StateVector) -> Result<CVector> {
        if psi0.space() != self.space() {
            return Err(Error::DimensionMismatch {
                expected: self.space().dim(),
                found: psi0.dim(),
            });
        }
        Ok(self.eigenvectors.entries().ad_mul(psi0.entries()))
    }

    /// `e^{−iλt}` applied to projected coefficients.
    pub fn phased(&self, projected: &CVector, t: f64) -> CVector {
        let mut out = projected.clone();
        for (z, &l) in out.iter_mut().zip(&self.eigenvalues) {
            *z *= Complex64::from_polar(1.0, -l * t);
        }
        out
    }

    /// `ψ(t) = V e^{−iλt} V† ψ₀`.
    pub fn evolve(&self, psi0: &StateVector, t: f64) -> Result<StateVector> {
        let c = self.project(psi0)?;
        let v = self.eigenvectors.entries() * self.phased(&c, t);
        StateVector::new(self.space(), v)
    }
}

/// Which Hamiltonian drives the composite pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HamiltonianChoice {
    /// `T̂† e^{−iĤ_int t} T̂`: the Jaynes-Cummings coupling in the interaction
    /// picture, evolved directly in scaled time.
    Rwa,
    /// `T̂† e^{iĤ₀t} e^{−iĤ't} T̂` with the exact transformed Hamiltonian
    /// `Ĥ'` and `Ĥ₀ = νn̂ + (ν/2)σ̂_z`: the same frame as `Rwa`, without
    /// dropping the counter-rotating and detuning terms.
    TransformedFull,
    /// `e^{−iĤt}` with the lab-frame Hamiltonian and no transformation.
    LabFull,
}

impl HamiltonianChoice {
    pub fn provenance(&self) -> Provenance {
        match self {
            HamiltonianChoice::Rwa => Provenance::OracleRwa,
            HamiltonianChoice::TransformedFull | HamiltonianChoice::LabFull => {
                Provenance::OracleFull
            }
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            HamiltonianChoice::Rwa => "rwa",
            HamiltonianChoice::TransformedFull => "transformed_full",
            HamiltonianChoice::LabFull => "lab_full",
        }
    }
}

/// Prepared matrix pipeline for the initial state `|e,α⟩`; evaluation at a
/// single `τ` is read-only, so one evaluator can serve many threads.
#[derive(Debug, Clone)]
pub struct PipelineEvaluator {
    params: IonParams,
    alpha: CoherentAmplitude,
    dims: SpaceDims,
    choice: HamiltonianChoice,
    propagator: SpectralPropagator,
    projected: CVector,
    /// Maps phased eigen-coefficients to the lab frame (`T̂†V` or `V`).
    readout: CMatrix,
    /// `T̂†`, only for the frame-subtracted path.
    t_dagger: Option<CMatrix>,
    /// Diagonal of `Ĥ₀`, only for the frame-subtracted path.
    free_diagonal: Vec<f64>,
    time_scale: f64,
}

impl PipelineEvaluator {
    pub fn new(
        params: IonParams,
        alpha: CoherentAmplitude,
        choice: HamiltonianChoice,
        dims: SpaceDims,
    ) -> Result<Self> {
        if alpha.eta() != params.eta() {
            return Err(Error::InvalidParameter {
                name: "alpha.eta",
                value: alpha.eta(),
            });
        }
        let n_max = dims.n_max();
        let required = alpha.required_n_max();
        if n_max < required {
            return Err(Error::TruncationTooSmall { required, n_max });
        }
        let vib = coherent_state(alpha.alpha(), n_max)?.state;
        let psi0 = StateVector::product(Electronic::Excited, &vib)?;

        let (hamiltonian, time_scale) = match choice {
            HamiltonianChoice::Rwa => {
                params.require_rwa_regime()?;
                (scaled_interaction(dims), 1.0)
            }
            HamiltonianChoice::TransformedFull => (
                build_transformed_hamiltonian(&params, dims)?,
                inverse_coupling(&params)?,
            ),
            HamiltonianChoice::LabFull => (
                build_full_hamiltonian(&params, dims),
                inverse_coupling(&params)?,
            ),
        };
        let propagator = SpectralPropagator::new(&hamiltonian)?;

        let (projected, readout, t_dagger, free_diagonal) = match choice {
            HamiltonianChoice::LabFull => {
                let c = propagator.project(&psi0)?;
                (
                    c,
                    propagator.eigenvectors().entries().clone(),
                    None,
                    Vec::new(),
                )
            }
            _ => {
                let t = build_t(&params, dims);
                let phi0 = StateVector::new(psi0.space(), t.apply(&psi0)?)?;
                let c = propagator.project(&phi0)?;
                let t_dag = t.entries().adjoint();
                if choice == HamiltonianChoice::Rwa {
                    let readout = &t_dag * propagator.eigenvectors().entries();
                    (c, readout, None, Vec::new())
                } else {
                    let nu = params.nu();
                    let diag = (0..dims.total_dim())
                        .map(|i| {
                            let (level, n) = dims.level_of(i);
                            let z = if level == Electronic::Excited {
                                0.5
                            } else {
                                -0.5
                            };
                            nu * (n as f64 + z)
                        })
                        .collect();
                    (
                        c,
                        propagator.eigenvectors().entries().clone(),
                        Some(t_dag),
                        diag,
                    )
                }
            }
        };

        Ok(Self {
            params,
            alpha,
            dims,
            choice,
            propagator,
            projected,
            readout,
            t_dagger,
            free_diagonal,
            time_scale,
        })
    }

    pub fn choice(&self) -> HamiltonianChoice {
        self.choice
    }

    pub fn dims(&self) -> SpaceDims {
        self.dims
    }

    pub fn propagator(&self) -> &SpectralPropagator {
        &self.propagator
    }

    /// Lab-frame state at scaled time `tau`.
    pub fn state_at(&self, tau: f64) -> CVector {
        let t = tau * self.time_scale;
        let mut v = &self.readout * self.propagator.phased(&self.projected, t);
        if let Some(t_dag) = &self.t_dagger {
            for (z, &e) in v.iter_mut().zip(&self.free_diagonal) {
                *z *= Complex64::from_polar(1.0, e * t);
            }
            v = t_dag * v;
        }
        v
    }

    /// Lab-frame `⟨n̂⟩` at scaled time `tau`.
    pub fn mean_excitation(&self, tau: f64) -> f64 {
        mean_phonon_number(Space::Full(self.dims), &self.state_at(tau))
    }

    /// Evaluates the whole grid sequentially.
    pub fn series(&self, tau_grid: &[f64]) -> Result<ExcitationSeries> {
        validate_grid(tau_grid)?;
        let values = tau_grid
            .iter()
            .map(|&tau| self.mean_excitation(tau))
            .collect();
        self.assemble(tau_grid.to_vec(), values)
    }

    /// Wraps externally evaluated values into a series.
    pub fn assemble(&self, tau: Vec<f64>, n_mean: Vec<f64>) -> Result<ExcitationSeries> {
        ExcitationSeries::new(
            tau,
            n_mean,
            self.choice.provenance(),
            self.params,
            self.alpha,
            self.dims.n_max(),
        )
    }
}

fn inverse_coupling(p: &IonParams) -> Result<f64> {
    let g = p.g();
    if g == 0.0 {
        return Err(Error::ZeroCoupling);
    }
    Ok(1.0 / g)
}

/// `⟨n̂⟩(τ)` from the explicit matrix pipeline for the initial state `|e,α⟩`.
pub fn evolve_pipeline(
    params: &IonParams,
    alpha: &CoherentAmplitude,
    tau_grid: &[f64],
    choice: HamiltonianChoice,
    dims: SpaceDims,
) -> Result<ExcitationSeries> {
    validate_grid(tau_grid)?;
    PipelineEvaluator::new(*params, *alpha, choice, dims)?.series(tau_grid)
}

/// Largest `|‖ψ(τ)‖ − 1|` over the grid.
pub fn norm_drift(evaluator: &PipelineEvaluator, tau_grid: &[f64]) -> f64 {
    tau_grid
        .iter()
        .map(|&tau| (evaluator.state_at(tau).norm() - 1.0).abs())
        .fold(0.0, f64::max)
}
