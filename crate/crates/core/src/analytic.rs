//! Closed-form Jaynes-Cummings dynamics for the initial state `|e⟩|α⟩`.
//!
//! In the transformed frame the initial state is `(|e⟩ − |g⟩)/√2 ⊗ |α̃⟩`
//! with `α̃ = α − iη/2`. Each doublet `{|e,n⟩, |g,n+1⟩}` rotates under the
//! interaction-picture propagator with angle `τ√(n+1)`, `τ = gt`, which gives
//!
//! ```text
//! c_{n,e}(τ) = [ p_n cos(τ√(n+1)) − p_{n+1} sin(τ√(n+1)) ] / √2
//! c_{n,g}(τ) = [ −p_{n−1} sin(τ√n) − p_n cos(τ√n) ] / √2
//! ```
//!
//! with `p_n = e^{−|α̃|²/2} α̃ⁿ/√n!`. Mapping back to the lab frame,
//! `T̂ n̂ T̂† = (n̂ + η²/4) − i(η/2)(â† − â)σ̂_x`, so
//!
//! ```text
//! ⟨n̂⟩ = Σ (|c_{n,e}|² + |c_{n,g}|²)(n + η²/4)
//!       + η Σ √(n+1) Im[c*_{n+1,e} c_{n,g} − c*_{n,e} c_{n+1,g}].
//! ```
//!
//! These signs and prefactors are the ones that reproduce the explicit
//! matrix pipeline `T̂† Û_I T̂ |e,α⟩`; see [`CONVENTION`].

use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use libm::{cos, sin, sqrt};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fockspace::{
    coherent_amplitudes, truncation_rule, CoherentAmplitude, Electronic, OperatorMatrix, Space,
    SpaceDims,
};
use crate::hamiltonians::IonParams;
use crate::linalg::{re, CMatrix};

/// Normalization and sign convention of the closed-form coefficients,
/// relative to the bare forms `p_n cos + p_{n+1} sin` and
/// `p_{n−1} sin − p_n cos` and an interference prefactor `+iη/4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Convention {
    /// Overall factor applied to both coefficient families.
    pub coefficient_prefactor: f64,
    /// Sign multiplying the `sin` terms.
    pub sine_sign: f64,
    /// Sign multiplying the interference sum (in units of `iη/4` with
    /// unnormalized coefficients, i.e. `iη/2` with normalized ones).
    pub interference_sign: f64,
    /// Overall factor applied to the propagator.
    pub propagator_prefactor: f64,
}

pub const CONVENTION: Convention = Convention {
    coefficient_prefactor: FRAC_1_SQRT_2,
    sine_sign: -1.0,
    interference_sign: -1.0,
    propagator_prefactor: 1.0,
};

/// Where an [`ExcitationSeries`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    Analytic,
    OracleRwa,
    OracleFull,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::Analytic => "analytic",
            Provenance::OracleRwa => "oracle_rwa",
            Provenance::OracleFull => "oracle_full",
        }
    }
}

/// Sampled mean phonon number `⟨n̂⟩(τ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcitationSeries {
    tau: Vec<f64>,
    n_mean: Vec<f64>,
    provenance: Provenance,
    params: IonParams,
    alpha: CoherentAmplitude,
    n_max: usize,
}

impl ExcitationSeries {
    pub fn new(
        tau: Vec<f64>,
        n_mean: Vec<f64>,
        provenance: Provenance,
        params: IonParams,
        alpha: CoherentAmplitude,
        n_max: usize,
    ) -> Result<Self> {
        validate_grid(&tau)?;
        if n_mean.len() != tau.len() {
            return Err(Error::DimensionMismatch {
                expected: tau.len(),
                found: n_mean.len(),
            });
        }
        Ok(Self {
            tau,
            n_mean,
            provenance,
            params,
            alpha,
            n_max,
        })
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    pub fn n_mean(&self) -> &[f64] {
        &self.n_mean
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn params(&self) -> &IonParams {
        &self.params
    }

    pub fn alpha(&self) -> &CoherentAmplitude {
        &self.alpha
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    /// Span `τ_last − τ_first`.
    pub fn span(&self) -> f64 {
        match (self.tau.first(), self.tau.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    /// Copy with every `⟨n̂⟩` value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.n_mean.iter_mut().for_each(|v| *v *= factor);
        out
    }

    /// Largest `|self − other|` over a shared grid.
    pub fn max_abs_deviation(&self, other: &Self) -> Result<f64> {
        if self.tau != other.tau {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(self
            .n_mean
            .iter()
            .zip(&other.n_mean)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs())))
    }
}

/// Grid must be non-empty, finite and strictly increasing.
pub fn validate_grid(tau: &[f64]) -> Result<()> {
    if tau.is_empty() || tau.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidGrid);
    }
    if tau.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid);
    }
    Ok(())
}

/// `τ_k = k·step` for `k = 0, 1, …` while `τ_k ≤ tau_max` (with a relative
/// slack of `1e-9` steps so that `tau_max` itself is included).
pub fn uniform_grid(tau_max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step.is_finite() && step > 0.0 && tau_max.is_finite() && tau_max >= 0.0) {
        return Err(Error::InvalidGrid);
    }
    let count = libm::floor(tau_max / step + 1e-9) as usize + 1;
    Ok((0..count).map(|k| k as f64 * step).collect())
}

/// Interaction-picture Jaynes-Cummings propagator at scaled time `τ = gt`:
///
/// `Û_I = Ĉ_{n+1}|e⟩⟨e| + Ĉ_n|g⟩⟨g| + Ŝ_{n+1}â σ̂₊ − â†Ŝ_{n+1} σ̂₋`
///
/// with `Ĉ_{n+1} = cos(τ√(ââ†))`, `Ĉ_n = cos(τ√(â†â))` and
/// `Ŝ_{n+1} = sin(τ√(ââ†))/√(ââ†)`. The operator functions are taken of the
/// truncated `ââ†`, whose top eigenvalue is zero, so the result is exactly
/// unitary on the truncated space.
pub fn jc_propagator(tau: f64, dims: SpaceDims) -> OperatorMatrix {
    let n = dims.n_max();
    let mut u = CMatrix::zeros(dims.total_dim(), dims.total_dim());
    for k in 0..n {
        let m = if k + 1 < n { (k + 1) as f64 } else { 0.0 };
        let root = sqrt(m);
        let e = dims.index(Electronic::Excited, k);
        let g = dims.index(Electronic::Ground, k);
        u[(e, e)] = re(cos(tau * root));
        u[(g, g)] = re(cos(tau * sqrt(k as f64)));
        if k + 1 < n {
            // √(k+1) · sin(τ√(k+1))/√(k+1)
            let s = sin(tau * root);
            let g_up = dims.index(Electronic::Ground, k + 1);
            u[(e, g_up)] = re(s);
            u[(g_up, e)] = re(-s);
        }
    }
    OperatorMatrix::from_parts(Space::Full(dims), u).unitary()
}

/// Coefficients of the transformed-frame state at one scaled time.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    pub tau: f64,
    pub c_e: Vec<Complex64>,
    pub c_g: Vec<Complex64>,
    pub alpha_tilde: Complex64,
}

impl CoefficientTable {
    /// `Σ |c_{n,e}|² + |c_{n,g}|²`.
    pub fn norm_sqr(&self) -> f64 {
        self.c_e.iter().chain(&self.c_g).map(|z| z.norm_sqr()).sum()
    }

    /// Lab-frame `⟨n̂⟩` for Lamb-Dicke parameter `eta`.
    pub fn mean_excitation(&self, eta: f64) -> f64 {
        mean_from_coefficients(&self.c_e, &self.c_g, eta)
    }
}

fn mean_from_coefficients(c_e: &[Complex64], c_g: &[Complex64], eta: f64) -> f64 {
    let shift = eta * eta / 4.0;
    let mut population = 0.0;
    for (n, (e, g)) in c_e.iter().zip(c_g).enumerate() {
        population += (e.norm_sqr() + g.norm_sqr()) * (n as f64 + shift);
    }
    let mut interference = 0.0;
    for n in 0..c_e.len().saturating_sub(1) {
        let x = c_e[n + 1].conj() * c_g[n] - c_e[n].conj() * c_g[n + 1];
        interference += sqrt((n + 1) as f64) * x.im;
    }
    population + eta * interference
}

/// Closed-form evaluator for `⟨n̂⟩(τ)`; immutable and shareable across threads.
#[derive(Debug, Clone)]
pub struct AnalyticEvaluator {
    params: IonParams,
    alpha: CoherentAmplitude,
    n_max: usize,
    /// `p_k` for `k = 0..=n_max`.
    amplitudes: Vec<Complex64>,
    roots: Vec<f64>,
}

impl AnalyticEvaluator {
    pub fn new(alpha: CoherentAmplitude, params: IonParams, dims: SpaceDims) -> Result<Self> {
        if alpha.eta() != params.eta() {
            return Err(Error::InvalidParameter {
                name: "alpha.eta",
                value: alpha.eta(),
            });
        }
        // the closed form rests on the rotating-wave approximation
        params.require_rwa_regime()?;
        let n_max = dims.n_max();
        let required = truncation_rule(alpha.alpha_tilde().norm());
        if n_max < required {
            return Err(Error::TruncationTooSmall { required, n_max });
        }
        let amplitudes = coherent_amplitudes(alpha.alpha_tilde(), n_max + 1);
        let roots = (0..=n_max).map(|k| sqrt(k as f64)).collect();
        Ok(Self {
            params,
            alpha,
            n_max,
            amplitudes,
            roots,
        })
    }

    pub fn coefficients(&self, tau: f64) -> CoefficientTable {
        let mut c_e = Vec::with_capacity(self.n_max);
        let mut c_g = Vec::with_capacity(self.n_max);
        self.fill(tau, &mut c_e, &mut c_g);
        CoefficientTable {
            tau,
            c_e,
            c_g,
            alpha_tilde: self.alpha.alpha_tilde(),
        }
    }

    fn fill(&self, tau: f64, c_e: &mut Vec<Complex64>, c_g: &mut Vec<Complex64>) {
        let s = CONVENTION.coefficient_prefactor;
        let sign = CONVENTION.sine_sign;
        let p = &self.amplitudes;
        c_e.clear();
        c_g.clear();
        for n in 0..self.n_max {
            let (sin_up, cos_up) = libm::sincos(tau * self.roots[n + 1]);
            let (sin_n, cos_n) = libm::sincos(tau * self.roots[n]);
            c_e.push((p[n] * cos_up + p[n + 1] * (sign * sin_up)) * s);
            // n = 0: the p_{n−1} term carries sin(0) and vanishes
            let lower = if n == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                p[n - 1] * (sign * sin_n)
            };
            c_g.push((lower - p[n] * cos_n) * s);
        }
    }

    /// `⟨n̂⟩` at scaled time `tau`.
    pub fn mean_excitation(&self, tau: f64) -> f64 {
        let mut c_e = Vec::with_capacity(self.n_max);
        let mut c_g = Vec::with_capacity(self.n_max);
        self.fill(tau, &mut c_e, &mut c_g);
        mean_from_coefficients(&c_e, &c_g, self.params.eta())
    }

    /// Evaluates the whole grid sequentially.
    pub fn series(&self, tau_grid: &[f64]) -> Result<ExcitationSeries> {
        validate_grid(tau_grid)?;
        let mut c_e = Vec::with_capacity(self.n_max);
        let mut c_g = Vec::with_capacity(self.n_max);
        let eta = self.params.eta();
        let n_mean = tau_grid
            .iter()
            .map(|&tau| {
                self.fill(tau, &mut c_e, &mut c_g);
                mean_from_coefficients(&c_e, &c_g, eta)
            })
            .collect();
        self.assemble(tau_grid.to_vec(), n_mean)
    }

    /// Wraps externally evaluated values (e.g. a parallel map over
    /// [`AnalyticEvaluator::mean_excitation`]) into a series.
    pub fn assemble(&self, tau: Vec<f64>, n_mean: Vec<f64>) -> Result<ExcitationSeries> {
        ExcitationSeries::new(
            tau,
            n_mean,
            Provenance::Analytic,
            self.params,
            self.alpha,
            self.n_max,
        )
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }
}

/// Coefficient table at scaled time `tau`.
pub fn coefficients(
    alpha: &CoherentAmplitude,
    params: &IonParams,
    tau: f64,
    dims: SpaceDims,
) -> Result<CoefficientTable> {
    Ok(AnalyticEvaluator::new(*alpha, *params, dims)?.coefficients(tau))
}

/// Closed-form `⟨n̂⟩(τ)` for the initial state `|e⟩|α⟩`.
pub fn mean_excitation_analytic(
    alpha: &CoherentAmplitude,
    params: &IonParams,
    tau_grid: &[f64],
    dims: SpaceDims,
) -> Result<ExcitationSeries> {
    AnalyticEvaluator::new(*alpha, *params, dims)?.series(tau_grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::{coherent_state, Interior, StateVector};
    use crate::hamiltonians::{excitation_number, scaled_interaction};
    use crate::linalg::{self, CVector};
    use approx::assert_abs_diff_eq;

    fn imag_case() -> (CoherentAmplitude, IonParams) {
        let p = IonParams::new(1.0, 0.5, 0.0, 0.5).unwrap();
        (CoherentAmplitude::new(Complex64::new(0.5, 5.0), 0.5), p)
    }

    #[test]
    fn propagator_at_zero_is_identity() {
        let u = jc_propagator(0.0, SpaceDims::new(10).unwrap());
        assert_eq!(u.distance_to_identity(&Interior::full(10), re(1.0)), 0.0);
    }

    #[test]
    fn propagator_inverse_and_unitarity() {
        let d = SpaceDims::new(40).unwrap();
        let u = jc_propagator(1.3, d);
        let v = jc_propagator(-1.3, d);
        let interior = Interior::propagation(40);
        assert!((&u * &v).distance_to_identity(&interior, re(1.0)) < 1e-10);
        assert!(u.unitarity_defect(&Interior::full(40)) < 1e-12);
    }

    #[test]
    fn propagator_is_exponential_of_coupling() {
        let d = SpaceDims::new(30).unwrap();
        let tau = 2.7;
        let exact = linalg::exp_minus_i(scaled_interaction(d).entries(), tau);
        let u = jc_propagator(tau, d);
        assert!(linalg::max_abs(&(u.entries() - exact)) < 1e-8);
    }

    #[test]
    fn propagator_group_property() {
        let d = SpaceDims::new(30).unwrap();
        let lhs = &jc_propagator(0.7, d) * &jc_propagator(1.9, d);
        let rhs = jc_propagator(2.6, d);
        assert!(linalg::max_abs(&(lhs.entries() - rhs.entries())) < 1e-9);
    }

    #[test]
    fn propagator_conserves_excitations() {
        let d = SpaceDims::new(48).unwrap();
        let excitations = excitation_number(d);
        let alpha = coherent_state(Complex64::new(2.0, 1.0), 48).unwrap().state;
        let psi = StateVector::product(Electronic::Excited, &alpha).unwrap();
        let k0 = psi.expectation(&excitations).unwrap().re;
        for &tau in &[0.5, 3.0, 11.0] {
            let out = jc_propagator(tau, d).apply(&psi).unwrap();
            let evolved = StateVector::new(psi.space(), out).unwrap();
            let k = evolved.expectation(&excitations).unwrap().re;
            assert_abs_diff_eq!(k, k0, epsilon = 1e-9);
        }
    }

    #[test]
    fn coefficients_at_zero_time() {
        let (alpha, p) = imag_case();
        let table = coefficients(&alpha, &p, 0.0, SpaceDims::new(80).unwrap()).unwrap();
        let pn = coherent_amplitudes(alpha.alpha_tilde(), 80);
        for (n, p_n) in pn.iter().enumerate() {
            let want = p_n * FRAC_1_SQRT_2;
            assert_abs_diff_eq!((table.c_e[n] - want).norm(), 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!((table.c_g[n] + want).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn coefficients_match_propagated_state() {
        let (alpha, p) = imag_case();
        let n_max = 80;
        let d = SpaceDims::new(n_max).unwrap();
        let tilde = coherent_state(alpha.alpha_tilde(), n_max).unwrap().state;
        let e = StateVector::product(Electronic::Excited, &tilde)
            .unwrap()
            .into_entries();
        let g = StateVector::product(Electronic::Ground, &tilde)
            .unwrap()
            .into_entries();
        let prepared: CVector = (e - g) * re(FRAC_1_SQRT_2);
        let tau = 1.7;
        let evolved = jc_propagator(tau, d).entries() * prepared;
        let table = coefficients(&alpha, &p, tau, d).unwrap();
        for n in 0..n_max {
            let de = evolved[d.index(Electronic::Excited, n)] - table.c_e[n];
            let dg = evolved[d.index(Electronic::Ground, n)] - table.c_g[n];
            assert!(de.norm() < 1e-8 && dg.norm() < 1e-8, "n = {n}");
        }
    }

    #[test]
    fn initial_mean_is_alpha_squared() {
        let (alpha, p) = imag_case();
        let d = SpaceDims::new(alpha.auto_n_max()).unwrap();
        let s = mean_excitation_analytic(&alpha, &p, &[0.0, 0.05], d).unwrap();
        assert_abs_diff_eq!(s.n_mean()[0], 25.25, epsilon = 1e-6);
        assert_eq!(s.provenance(), Provenance::Analytic);
    }

    #[test]
    fn evaluator_requires_truncation() {
        let (alpha, p) = imag_case();
        let err = AnalyticEvaluator::new(alpha, p, SpaceDims::new(32).unwrap()).unwrap_err();
        assert!(matches!(err, Error::TruncationTooSmall { .. }));
    }

    #[test]
    fn evaluator_requires_regime() {
        let (alpha, _) = imag_case();
        let p = IonParams::new(1.0, 0.7, 0.0, 0.5).unwrap();
        let d = SpaceDims::new(80).unwrap();
        let err = AnalyticEvaluator::new(alpha, p, d).unwrap_err();
        assert!(matches!(err, Error::RegimeViolation { .. }));
    }

    #[test]
    fn evaluator_rejects_mismatched_eta() {
        let p = IonParams::new(1.0, 0.5, 0.0, 0.5).unwrap();
        let alpha = CoherentAmplitude::new(Complex64::new(1.0, 0.0), 0.3);
        assert!(AnalyticEvaluator::new(alpha, p, SpaceDims::new(32).unwrap()).is_err());
    }

    #[test]
    fn grid_validation() {
        assert_eq!(validate_grid(&[]), Err(Error::InvalidGrid));
        assert_eq!(validate_grid(&[0.0, 0.0]), Err(Error::InvalidGrid));
        assert_eq!(validate_grid(&[0.0, f64::NAN]), Err(Error::InvalidGrid));
        let g = uniform_grid(300.0, 0.05).unwrap();
        assert_eq!(g.len(), 6001);
        assert_eq!(*g.last().unwrap(), 300.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn coefficient_normalization(tau in 0.0f64..5000.0) {
                let (alpha, p) = imag_case();
                let table = coefficients(&alpha, &p, tau, SpaceDims::new(80).unwrap()).unwrap();
                prop_assert!((table.norm_sqr() - 1.0).abs() < 1e-8);
            }

            #[test]
            fn mean_excitation_bounds(tau in 0.0f64..5000.0, re_a in -4.0f64..4.0, im_a in -4.0f64..4.0) {
                let p = IonParams::new(1.0, 0.5, 0.0, 0.5).unwrap();
                let alpha = CoherentAmplitude::new(Complex64::new(re_a, im_a), 0.5);
                let d = SpaceDims::new(alpha.auto_n_max()).unwrap();
                let v = AnalyticEvaluator::new(alpha, p, d).unwrap().mean_excitation(tau);
                let t = alpha.alpha_tilde().norm();
                prop_assert!(v >= -1e-10);
                prop_assert!(v <= t * t + t + 1.0 + 0.0625 + 1.0);
            }
        }
    }
}
