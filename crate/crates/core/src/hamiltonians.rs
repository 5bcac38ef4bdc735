//! Ion–laser Hamiltonians and the unitary transformation that maps the full
//! Hamiltonian onto a Jaynes-Cummings form. `ħ = 1` throughout.

use libm::sqrt;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fockspace::{
    build_annihilation, build_displacement, build_number, electronic, full_number,
    tensor_electronic, ElectronicPart, OperatorMatrix, Space, SpaceDims,
};
use crate::linalg::{self, re, CMatrix, I};

/// Default relative tolerance on `ν = 2Ω`.
pub const DEFAULT_RWA_TOLERANCE: f64 = 1e-9;

/// Physical parameters of the driven ion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IonParams {
    nu: f64,
    omega: f64,
    delta: f64,
    eta: f64,
    g: f64,
    beta: Complex64,
    rwa_tolerance: f64,
}

impl IonParams {
    /// `nu`: trap frequency, `omega`: Rabi frequency, `delta`: detuning,
    /// `eta`: Lamb-Dicke parameter.
    pub fn new(nu: f64, omega: f64, delta: f64, eta: f64) -> Result<Self> {
        if !(nu.is_finite() && nu > 0.0) {
            return Err(Error::InvalidParameter {
                name: "nu",
                value: nu,
            });
        }
        if !(omega.is_finite() && omega >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "omega",
                value: omega,
            });
        }
        if !delta.is_finite() {
            return Err(Error::InvalidParameter {
                name: "delta",
                value: delta,
            });
        }
        if !(eta.is_finite() && eta >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "eta",
                value: eta,
            });
        }
        Ok(Self {
            nu,
            omega,
            delta,
            eta,
            g: coupling(eta, nu),
            beta: Complex64::new(0.0, eta / 2.0),
            rwa_tolerance: DEFAULT_RWA_TOLERANCE,
        })
    }

    pub fn with_rwa_tolerance(mut self, tolerance: f64) -> Self {
        self.rwa_tolerance = tolerance;
        self
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Effective Jaynes-Cummings coupling `g = ην/2`.
    pub fn g(&self) -> f64 {
        self.g
    }

    /// Displacement argument `β = iη/2` of the transformation.
    pub fn beta(&self) -> Complex64 {
        self.beta
    }

    pub fn rwa_tolerance(&self) -> f64 {
        self.rwa_tolerance
    }

    /// `|ν − 2Ω| / ν`.
    pub fn regime_offset(&self) -> f64 {
        (self.nu - 2.0 * self.omega).abs() / self.nu
    }

    pub fn rwa_regime(&self) -> bool {
        self.regime_offset() <= self.rwa_tolerance
    }

    pub fn require_rwa_regime(&self) -> Result<()> {
        if self.rwa_regime() {
            Ok(())
        } else {
            Err(Error::RegimeViolation {
                relative_offset: self.regime_offset(),
                tolerance: self.rwa_tolerance,
            })
        }
    }

    /// Magnitudes of what the Jaynes-Cummings form leaves out.
    pub fn rwa_diagnostics(&self) -> RwaDiagnostics {
        RwaDiagnostics {
            dropped_detuning_ratio: if self.delta == 0.0 {
                0.0
            } else {
                self.delta.abs() / (2.0 * self.g)
            },
            sigma_z_detuning: 0.5 * (self.omega - self.nu),
        }
    }
}

fn coupling(eta: f64, nu: f64) -> f64 {
    eta * nu / 2.0
}

/// Terms neglected when replacing the transformed Hamiltonian by its
/// Jaynes-Cummings approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RwaDiagnostics {
    /// `|δ| / 2g`: size of the dropped `−(δ/2)σ̂_x` term relative to the coupling.
    pub dropped_detuning_ratio: f64,
    /// `(Ω − ν)/2`: coefficient of `σ̂_z` left over after subtracting the
    /// free part `(ν/2)σ̂_z` from the transformed Hamiltonian.
    pub sigma_z_detuning: f64,
}

impl RwaDiagnostics {
    pub fn has_warnings(&self) -> bool {
        self.dropped_detuning_ratio != 0.0 || self.sigma_z_detuning != 0.0
    }
}

/// `exp(iη(â+â†))` on the Fock space.
fn position_phase(eta: f64, n_max: usize) -> CMatrix {
    let a = build_annihilation(n_max).expect("validated dims");
    let x = a.entries() + a.entries().adjoint();
    linalg::exp_minus_i(&x, -eta)
}

fn fock(m: CMatrix, n_max: usize) -> OperatorMatrix {
    OperatorMatrix::from_parts(Space::Fock(n_max), m)
}

fn tensor(m: CMatrix, n_max: usize, part: ElectronicPart) -> OperatorMatrix {
    tensor_electronic(&fock(m, n_max), part).expect("Fock operator")
}

fn sum(terms: &[OperatorMatrix]) -> OperatorMatrix {
    let mut acc = terms[0].entries().clone();
    for t in &terms[1..] {
        acc += t.entries();
    }
    OperatorMatrix::from_parts(terms[0].space(), acc)
}

/// `Ĥ = ν n̂ + (δ/2)σ̂_z + (Ω/2)(σ̂₋ e^{−iη(â+â†)} + σ̂₊ e^{iη(â+â†)})`.
///
/// The exponentials are built by exact exponentiation of the truncated
/// position operator; no Lamb-Dicke expansion is made.
pub fn build_full_hamiltonian(p: &IonParams, dims: SpaceDims) -> OperatorMatrix {
    let n = dims.n_max();
    let e = position_phase(p.eta, n);
    let e_dag = e.adjoint();
    let half_omega = re(0.5 * p.omega);
    sum(&[
        full_number(dims).scale(re(p.nu)),
        electronic(dims, ElectronicPart::SigmaZ).scale(re(0.5 * p.delta)),
        tensor(e_dag * half_omega, n, ElectronicPart::SigmaMinus),
        tensor(e * half_omega, n, ElectronicPart::SigmaPlus),
    ])
    .hermitian()
}

/// `T̂ = (1/√2){ ½[D̂†+D̂]Î + ½[D̂†−D̂]σ̂_z + D̂σ̂₊ − D̂†σ̂₋ }` with `D̂ = D̂(iη/2)`.
pub fn build_t(p: &IonParams, dims: SpaceDims) -> OperatorMatrix {
    let n = dims.n_max();
    let d = build_displacement(p.beta, n)
        .expect("validated dims")
        .into_entries();
    let d_dag = d.adjoint();
    let s = re(1.0 / sqrt(2.0));
    let half = re(0.5) * s;
    sum(&[
        tensor((&d_dag + &d) * half, n, ElectronicPart::Identity),
        tensor((&d_dag - &d) * half, n, ElectronicPart::SigmaZ),
        tensor(&d * s, n, ElectronicPart::SigmaPlus),
        tensor(&d_dag * (-s), n, ElectronicPart::SigmaMinus),
    ])
    .unitary()
}

/// `σ̂_x = σ̂₊ + σ̂₋` with vibrational factor `vib`.
fn with_sigma_x(vib: &CMatrix, n_max: usize) -> OperatorMatrix {
    sum(&[
        tensor(vib.clone(), n_max, ElectronicPart::SigmaPlus),
        tensor(vib.clone(), n_max, ElectronicPart::SigmaMinus),
    ])
}

/// Transformed Hamiltonian `Ĥ' = T̂ĤT̂†`, assembled term by term:
///
/// `Ĥ' = ν n̂ + (Ω/2)σ̂_z − i(ην/2)[(â†−â) − iδ/(ην)](σ̂₋+σ̂₊) + νη²/4`.
///
/// The `σ̂_z` coefficient is `Ω/2`, the value fixed by conjugating `Ĥ`
/// (`T̂σ̂_xT̂†` keeps the spectrum `±1`, so `(Ω/2)σ̂_x` maps to `(Ω/2)σ̂_z`).
pub fn build_transformed_hamiltonian(p: &IonParams, dims: SpaceDims) -> Result<OperatorMatrix> {
    if p.eta == 0.0 && p.delta != 0.0 {
        return Err(Error::EtaZeroUndefined);
    }
    let n = dims.n_max();
    let a = build_annihilation(n)?.into_entries();
    let quadrature = a.adjoint() - &a;
    let mut bracket = quadrature * re(1.0);
    if p.delta != 0.0 {
        let shift = -I * (p.delta / (p.eta * p.nu));
        for k in 0..n {
            bracket[(k, k)] += shift;
        }
    }
    let prefactor = -I * (p.eta * p.nu / 2.0);
    Ok(sum(&[
        full_number(dims).scale(re(p.nu)),
        electronic(dims, ElectronicPart::SigmaZ).scale(re(0.5 * p.omega)),
        with_sigma_x(&(bracket * prefactor), n),
        electronic(dims, ElectronicPart::Identity).scale(re(p.nu * p.eta * p.eta / 4.0)),
    ])
    .hermitian())
}

/// Free part `ν n̂ + (ν/2)σ̂_z` of the Jaynes-Cummings Hamiltonian.
pub fn free_hamiltonian(p: &IonParams, dims: SpaceDims) -> OperatorMatrix {
    sum(&[
        full_number(dims).scale(re(p.nu)),
        electronic(dims, ElectronicPart::SigmaZ).scale(re(0.5 * p.nu)),
    ])
    .hermitian()
}

/// `−i(â†σ̂₋ − âσ̂₊)`: the Jaynes-Cummings coupling per unit `g`.
pub fn scaled_interaction(dims: SpaceDims) -> OperatorMatrix {
    let n = dims.n_max();
    let a = build_annihilation(n)
        .expect("validated dims")
        .into_entries();
    sum(&[
        tensor(a.adjoint() * (-I), n, ElectronicPart::SigmaMinus),
        tensor(a * I, n, ElectronicPart::SigmaPlus),
    ])
    .hermitian()
}

/// Interaction-picture coupling `−ig(â†σ̂₋ − âσ̂₊)`.
pub fn interaction_coupling(p: &IonParams, dims: SpaceDims) -> OperatorMatrix {
    scaled_interaction(dims).scale(re(p.g))
}

/// Counter-rotating coupling `−ig(â†σ̂₊ − âσ̂₋)` removed by the RWA.
pub fn counter_rotating_coupling(p: &IonParams, dims: SpaceDims) -> OperatorMatrix {
    let n = dims.n_max();
    let a = build_annihilation(n)
        .expect("validated dims")
        .into_entries();
    let g = p.g;
    sum(&[
        tensor(a.adjoint() * (-I * g), n, ElectronicPart::SigmaPlus),
        tensor(a * (I * g), n, ElectronicPart::SigmaMinus),
    ])
    .hermitian()
}

/// Jaynes-Cummings Hamiltonian `ν n̂ + (ν/2)σ̂_z − ig(â†σ̂₋ − âσ̂₊)`.
///
/// The constant `νη²/4` is omitted (global phase). Detuning does not appear;
/// its dropped contribution is reported by [`IonParams::rwa_diagnostics`].
pub fn build_rwa_hamiltonian(p: &IonParams, dims: SpaceDims) -> Result<OperatorMatrix> {
    p.require_rwa_regime()?;
    Ok(sum(&[free_hamiltonian(p, dims), interaction_coupling(p, dims)]).hermitian())
}

/// `n̂ + σ̂_z/2`, conserved by the Jaynes-Cummings Hamiltonian.
pub fn excitation_number(dims: SpaceDims) -> OperatorMatrix {
    let n = build_number(dims.n_max()).expect("validated dims");
    sum(&[
        tensor_electronic(&n, ElectronicPart::Identity).expect("Fock operator"),
        electronic(dims, ElectronicPart::SigmaZ).scale(re(0.5)),
    ])
    .hermitian()
}
