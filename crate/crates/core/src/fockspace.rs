//! Truncated Hilbert space of a two-level ion with one motional mode.
//!
//! The vibrational (Fock) space keeps levels `0..n_max`. The full space is
//! the electronic pair `{g, e}` tensored with it, with the basis ordered as
//! the whole `|g,n⟩` block followed by the whole `|e,n⟩` block:
//!
//! ```text
//! index(g, n) = n
//! index(e, n) = n_max + n
//! ```
//!
//! All identities of the untruncated algebra only hold away from the top
//! levels; [`Interior`] names the block of levels on which they are checked.

use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};

use libm::{ceil, exp, floor, lgamma, sqrt};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, re, CMatrix, CVector, I};

/// Basis ordering used by every operator and state, and written into output
/// headers by the command-line front end.
pub const BASIS_ORDERING: &str = "|g,0>..|g,N-1>,|e,0>..|e,N-1>";

/// Hermiticity tolerance relative to the largest entry.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Unitarity tolerance on the interior block.
pub const UNITARY_TOL: f64 = 1e-10;
/// Normalization tolerance for state vectors.
pub const NORM_TOL: f64 = 1e-10;

/// Dimensions of the electronic ⊗ truncated-Fock space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpaceDims {
    n_max: usize,
}

impl SpaceDims {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 2 {
            return Err(Error::InvalidDims { n_max });
        }
        Ok(Self { n_max })
    }

    /// Number of retained Fock levels.
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn total_dim(&self) -> usize {
        2 * self.n_max
    }

    pub fn index(&self, level: Electronic, n: usize) -> usize {
        debug_assert!(n < self.n_max);
        match level {
            Electronic::Ground => n,
            Electronic::Excited => self.n_max + n,
        }
    }

    /// Inverse of [`SpaceDims::index`].
    pub fn level_of(&self, index: usize) -> (Electronic, usize) {
        if index < self.n_max {
            (Electronic::Ground, index)
        } else {
            (Electronic::Excited, index - self.n_max)
        }
    }
}

/// Electronic level of the effective two-level ion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Electronic {
    Ground,
    Excited,
}

/// Space an operator or state lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Space {
    /// Vibrational levels only.
    Fock(usize),
    /// Electronic ⊗ vibrational.
    Full(SpaceDims),
}

impl Space {
    pub fn dim(&self) -> usize {
        match self {
            Space::Fock(n) => *n,
            Space::Full(d) => d.total_dim(),
        }
    }

    pub fn n_max(&self) -> usize {
        match self {
            Space::Fock(n) => *n,
            Space::Full(d) => d.n_max(),
        }
    }

    /// Fock level carried by basis index `i`.
    pub fn fock_level(&self, i: usize) -> usize {
        i % self.n_max()
    }
}

/// Block of low Fock levels `0..levels` on which truncation artifacts are
/// negligible.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interior {
    n_max: usize,
    levels: usize,
}

impl Interior {
    pub fn new(n_max: usize, levels: usize) -> Self {
        Self {
            n_max,
            levels: levels.min(n_max),
        }
    }

    pub fn full(n_max: usize) -> Self {
        Self::new(n_max, n_max)
    }

    /// Interior for products involving displacements of total magnitude
    /// `reach`: levels `n` with `√n + reach ≤ √n_max`.
    ///
    /// A displacement by `|β|` moves amplitude `√n` by at most `|β|`, so the
    /// truncated exponential is exact (to tail precision) for these levels.
    /// At least [`Interior::DISPLACEMENT_MARGIN`] top levels are always
    /// dropped, since even a small displacement leaks through the last few.
    pub fn displacement(n_max: usize, reach: f64) -> Self {
        let root = sqrt(n_max as f64) - reach;
        let levels = if root <= 0.0 {
            0
        } else {
            floor(root * root) as usize
        };
        Self::new(
            n_max,
            levels.min(n_max.saturating_sub(Self::DISPLACEMENT_MARGIN)),
        )
    }

    pub const DISPLACEMENT_MARGIN: usize = 8;

    /// Levels `0..=n_max-6` used for propagation checks.
    pub fn propagation(n_max: usize) -> Self {
        Self::new(n_max, n_max.saturating_sub(5))
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Basis indices of the interior block in `space`.
    pub fn indices(&self, space: Space) -> Vec<usize> {
        let n = space.n_max();
        debug_assert_eq!(n, self.n_max);
        match space {
            Space::Fock(_) => (0..self.levels).collect(),
            Space::Full(_) => (0..self.levels).chain(n..n + self.levels).collect(),
        }
    }
}

/// Dense complex square matrix on a [`Space`], with structural hints.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    space: Space,
    entries: CMatrix,
    hermitian: bool,
    unitary: bool,
}

impl OperatorMatrix {
    pub fn new(space: Space, entries: CMatrix) -> Result<Self> {
        let dim = space.dim();
        if entries.nrows() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: entries.nrows(),
            });
        }
        if entries.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: entries.ncols(),
            });
        }
        Ok(Self {
            space,
            entries,
            hermitian: false,
            unitary: false,
        })
    }

    pub(crate) fn from_parts(space: Space, entries: CMatrix) -> Self {
        debug_assert_eq!(entries.nrows(), space.dim());
        Self {
            space,
            entries,
            hermitian: false,
            unitary: false,
        }
    }

    pub(crate) fn hermitian(mut self) -> Self {
        self.hermitian = true;
        self
    }

    pub(crate) fn unitary(mut self) -> Self {
        self.unitary = true;
        self
    }

    pub fn zeros(space: Space) -> Self {
        let d = space.dim();
        Self::from_parts(space, CMatrix::zeros(d, d)).hermitian()
    }

    pub fn identity(space: Space) -> Self {
        let d = space.dim();
        Self::from_parts(space, CMatrix::identity(d, d))
            .hermitian()
            .unitary()
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn is_hermitian_hint(&self) -> bool {
        self.hermitian
    }

    pub fn is_unitary_hint(&self) -> bool {
        self.unitary
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self {
            space: self.space,
            entries: self.entries.adjoint(),
            hermitian: self.hermitian,
            unitary: self.unitary,
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let hermitian = self.hermitian && factor.im == 0.0;
        Self {
            space: self.space,
            entries: &self.entries * factor,
            hermitian,
            unitary: false,
        }
    }

    pub fn max_abs(&self) -> f64 {
        linalg::max_abs(&self.entries)
    }

    /// `max|M − M†| / max|M|` (zero for the zero matrix).
    pub fn hermiticity_defect(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        linalg::max_abs(&(&self.entries - self.entries.adjoint())) / scale
    }

    /// Largest entry over the interior rows and columns.
    pub fn max_abs_on(&self, interior: &Interior) -> f64 {
        linalg::max_abs_restricted(&self.entries, &interior.indices(self.space))
    }

    /// `max|M†M − I|` on the interior block.
    pub fn unitarity_defect(&self, interior: &Interior) -> f64 {
        let d = self.dim();
        let gram = self.entries.adjoint() * &self.entries - CMatrix::identity(d, d);
        linalg::max_abs_restricted(&gram, &interior.indices(self.space))
    }

    /// `max|M − c I|` on the interior block.
    pub fn distance_to_identity(&self, interior: &Interior, c: Complex64) -> f64 {
        let d = self.dim();
        let diff = &self.entries - CMatrix::identity(d, d) * c;
        linalg::max_abs_restricted(&diff, &interior.indices(self.space))
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        let e = &self.entries * &other.entries - &other.entries * &self.entries;
        Ok(Self::from_parts(self.space, e))
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(Self::from_parts(self.space, &self.entries * &other.entries))
    }

    /// Applies the operator to a vector living on the same space.
    pub fn apply(&self, psi: &StateVector) -> Result<CVector> {
        if psi.space() != self.space {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: psi.dim(),
            });
        }
        Ok(&self.entries * psi.entries())
    }

    fn check_same_space(&self, other: &Self) -> Result<()> {
        if self.space != other.space {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;

    /// Panics on mismatched spaces; use [`OperatorMatrix::compose`] to get an error instead.
    fn mul(self, rhs: Self) -> OperatorMatrix {
        assert_eq!(self.space, rhs.space, "operator spaces differ");
        let unitary = self.unitary && rhs.unitary;
        OperatorMatrix {
            space: self.space,
            entries: &self.entries * &rhs.entries,
            hermitian: false,
            unitary,
        }
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;

    fn add(self, rhs: Self) -> OperatorMatrix {
        assert_eq!(self.space, rhs.space, "operator spaces differ");
        OperatorMatrix {
            space: self.space,
            entries: &self.entries + &rhs.entries,
            hermitian: self.hermitian && rhs.hermitian,
            unitary: false,
        }
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;

    fn sub(self, rhs: Self) -> OperatorMatrix {
        assert_eq!(self.space, rhs.space, "operator spaces differ");
        OperatorMatrix {
            space: self.space,
            entries: &self.entries - &rhs.entries,
            hermitian: self.hermitian && rhs.hermitian,
            unitary: false,
        }
    }
}

/// Normalized complex state on a [`Space`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    space: Space,
    entries: CVector,
}

impl StateVector {
    /// Wraps `entries`, which must already have unit norm.
    pub fn new(space: Space, entries: CVector) -> Result<Self> {
        if entries.len() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: entries.len(),
            });
        }
        let norm = entries.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { space, entries })
    }

    /// Rescales `entries` to unit norm.
    pub fn normalized(space: Space, mut entries: CVector) -> Result<Self> {
        if entries.len() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: entries.len(),
            });
        }
        let norm = entries.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized { norm });
        }
        entries.unscale_mut(norm);
        Ok(Self { space, entries })
    }

    /// Fock state `|n⟩`.
    pub fn fock(n_max: usize, n: usize) -> Result<Self> {
        if n >= n_max {
            return Err(Error::DimensionMismatch {
                expected: n_max,
                found: n + 1,
            });
        }
        let mut v = CVector::zeros(n_max);
        v[n] = re(1.0);
        Ok(Self {
            space: Space::Fock(n_max),
            entries: v,
        })
    }

    /// `|level⟩ ⊗ vib`.
    pub fn product(level: Electronic, vib: &StateVector) -> Result<Self> {
        let Space::Fock(n_max) = vib.space else {
            return Err(Error::DimensionMismatch {
                expected: vib.dim() / 2,
                found: vib.dim(),
            });
        };
        let dims = SpaceDims::new(n_max)?;
        let mut v = CVector::zeros(dims.total_dim());
        let offset = dims.index(level, 0);
        v.rows_mut(offset, n_max).copy_from(&vib.entries);
        Ok(Self {
            space: Space::Full(dims),
            entries: v,
        })
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn entries(&self) -> &CVector {
        &self.entries
    }

    pub fn into_entries(self) -> CVector {
        self.entries
    }

    pub fn norm(&self) -> f64 {
        self.entries.norm()
    }

    /// `⟨ψ|A|ψ⟩`.
    pub fn expectation(&self, op: &OperatorMatrix) -> Result<Complex64> {
        let v = op.apply(self)?;
        Ok(self.entries.dotc(&v))
    }

    /// `⟨ψ|n̂|ψ⟩`, with `n̂` acting on the vibrational factor.
    pub fn mean_phonon_number(&self) -> f64 {
        mean_phonon_number(self.space, &self.entries)
    }
}

/// `⟨v|n̂|v⟩` for a raw coefficient vector.
pub(crate) fn mean_phonon_number(space: Space, v: &CVector) -> f64 {
    v.iter()
        .enumerate()
        .map(|(i, z)| z.norm_sqr() * space.fock_level(i) as f64)
        .sum()
}

/// Coherent amplitude `α` together with the shifted amplitude
/// `α̃ = α − iη/2` seen in the transformed frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentAmplitude {
    alpha: Complex64,
    eta: f64,
    alpha_tilde: Complex64,
}

impl CoherentAmplitude {
    pub fn new(alpha: Complex64, eta: f64) -> Self {
        Self {
            alpha,
            eta,
            alpha_tilde: shifted_amplitude(alpha, eta),
        }
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn alpha_tilde(&self) -> Complex64 {
        self.alpha_tilde
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `|α|²`, the mean phonon number of `|α⟩`.
    pub fn n_bar(&self) -> f64 {
        self.alpha.norm_sqr()
    }

    /// Smallest `n_max` capturing both `|α⟩` and `|α̃⟩`.
    pub fn required_n_max(&self) -> usize {
        truncation_rule(self.alpha.norm()).max(truncation_rule(self.alpha_tilde.norm()))
    }

    /// [`CoherentAmplitude::required_n_max`] rounded up to a multiple of 16.
    pub fn auto_n_max(&self) -> usize {
        self.required_n_max().div_ceil(16) * 16
    }
}

fn shifted_amplitude(alpha: Complex64, eta: f64) -> Complex64 {
    alpha - Complex64::new(0.0, eta / 2.0)
}

/// `ceil(|a|² + 6|a| + 10)`: Poisson mean plus six standard deviations plus
/// a fixed margin for transient spreading.
pub fn truncation_rule(amplitude: f64) -> usize {
    ceil(amplitude * amplitude + 6.0 * amplitude + 10.0) as usize
}

/// Poisson-weighted amplitudes `e^{-|a|²/2} aⁿ/√n!` for `n = 0..len`,
/// evaluated in log space.
pub fn coherent_amplitudes(a: Complex64, len: usize) -> Vec<Complex64> {
    let r = a.norm();
    if r == 0.0 {
        let mut v = alloc::vec![Complex64::new(0.0, 0.0); len];
        if let Some(first) = v.first_mut() {
            *first = re(1.0);
        }
        return v;
    }
    let log_r = libm::log(r);
    let theta = a.arg();
    (0..len)
        .map(|n| {
            let nf = n as f64;
            let log_mag = -0.5 * r * r + nf * log_r - 0.5 * lgamma(nf + 1.0);
            Complex64::from_polar(exp(log_mag), nf * theta)
        })
        .collect()
}

/// A truncated, renormalized coherent state.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentState {
    pub state: StateVector,
    /// `1 − ‖ψ‖²` before renormalization.
    pub norm_deficit: f64,
}

/// `|α⟩` on the Fock levels `0..n_max`.
pub fn coherent_state(alpha: Complex64, n_max: usize) -> Result<CoherentState> {
    let required = truncation_rule(alpha.norm());
    if n_max < required {
        return Err(Error::TruncationTooSmall { required, n_max });
    }
    let v = CVector::from_vec(coherent_amplitudes(alpha, n_max));
    let norm_deficit = 1.0 - v.norm_squared();
    let state = StateVector::normalized(Space::Fock(n_max), v)?;
    Ok(CoherentState {
        state,
        norm_deficit,
    })
}

/// `â` with `⟨m|â|n⟩ = √n δ_{m,n−1}`.
pub fn build_annihilation(n_max: usize) -> Result<OperatorMatrix> {
    SpaceDims::new(n_max)?;
    let mut m = CMatrix::zeros(n_max, n_max);
    for n in 1..n_max {
        m[(n - 1, n)] = re(sqrt(n as f64));
    }
    Ok(OperatorMatrix::from_parts(Space::Fock(n_max), m))
}

pub fn build_creation(n_max: usize) -> Result<OperatorMatrix> {
    Ok(build_annihilation(n_max)?.adjoint())
}

/// `n̂ = â†â`, diagonal.
pub fn build_number(n_max: usize) -> Result<OperatorMatrix> {
    SpaceDims::new(n_max)?;
    let m = CMatrix::from_diagonal(&CVector::from_fn(n_max, |n, _| re(n as f64)));
    Ok(OperatorMatrix::from_parts(Space::Fock(n_max), m).hermitian())
}

/// Hermitian generator `i(βâ† − β*â)` of the displacement `D̂(β) = exp(−iK)`.
fn displacement_generator(beta: Complex64, n_max: usize) -> CMatrix {
    let mut k = CMatrix::zeros(n_max, n_max);
    for n in 0..n_max - 1 {
        let amp = I * beta * sqrt((n + 1) as f64);
        k[(n + 1, n)] = amp;
        k[(n, n + 1)] = amp.conj();
    }
    k
}

/// Glauber displacement `D̂(β) = exp(βâ† − β*â)`, exponentiated exactly on
/// the truncated space so the result is unitary there.
pub fn build_displacement(beta: Complex64, n_max: usize) -> Result<OperatorMatrix> {
    SpaceDims::new(n_max)?;
    let k = displacement_generator(beta, n_max);
    let d = linalg::exp_minus_i(&k, 1.0);
    Ok(OperatorMatrix::from_parts(Space::Fock(n_max), d).unitary())
}

/// Electronic factor of a product operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElectronicPart {
    Identity,
    /// `σ̂₊ = |e⟩⟨g|`
    SigmaPlus,
    /// `σ̂₋ = |g⟩⟨e|`
    SigmaMinus,
    /// `σ̂_z = |e⟩⟨e| − |g⟩⟨g|`
    SigmaZ,
}

/// `vib ⊗ part` on the full space.
pub fn tensor_electronic(vib: &OperatorMatrix, part: ElectronicPart) -> Result<OperatorMatrix> {
    let Space::Fock(n) = vib.space() else {
        return Err(Error::DimensionMismatch {
            expected: vib.dim() / 2,
            found: vib.dim(),
        });
    };
    let dims = SpaceDims::new(n)?;
    let mut m = CMatrix::zeros(2 * n, 2 * n);
    let a = vib.entries();
    let (g, e) = (
        dims.index(Electronic::Ground, 0),
        dims.index(Electronic::Excited, 0),
    );
    match part {
        ElectronicPart::Identity => {
            m.view_mut((g, g), (n, n)).copy_from(a);
            m.view_mut((e, e), (n, n)).copy_from(a);
        }
        ElectronicPart::SigmaZ => {
            m.view_mut((g, g), (n, n)).copy_from(&(-a));
            m.view_mut((e, e), (n, n)).copy_from(a);
        }
        ElectronicPart::SigmaPlus => m.view_mut((e, g), (n, n)).copy_from(a),
        ElectronicPart::SigmaMinus => m.view_mut((g, e), (n, n)).copy_from(a),
    }
    let hermitian = vib.is_hermitian_hint()
        && matches!(part, ElectronicPart::Identity | ElectronicPart::SigmaZ);
    let op = OperatorMatrix::from_parts(Space::Full(dims), m);
    Ok(if hermitian { op.hermitian() } else { op })
}

/// `n̂ ⊗ Î` on the full space.
pub fn full_number(dims: SpaceDims) -> OperatorMatrix {
    let n = build_number(dims.n_max()).expect("validated dims");
    tensor_electronic(&n, ElectronicPart::Identity).expect("Fock operator")
}

/// `Î ⊗ part` on the full space.
pub fn electronic(dims: SpaceDims, part: ElectronicPart) -> OperatorMatrix {
    let id = OperatorMatrix::identity(Space::Fock(dims.n_max()));
    tensor_electronic(&id, part).expect("Fock operator")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn dims_reject_tiny_truncation() {
        assert_eq!(SpaceDims::new(1), Err(Error::InvalidDims { n_max: 1 }));
        let d = SpaceDims::new(7).unwrap();
        assert_eq!(d.total_dim(), 14);
        assert_eq!(d.index(Electronic::Excited, 3), 10);
        assert_eq!(d.level_of(10), (Electronic::Excited, 3));
    }

    #[test]
    fn annihilation_two_levels() {
        let a = build_annihilation(2).unwrap();
        assert_eq!(a.get(0, 1), c(1.0, 0.0));
        assert_eq!(a.get(0, 0), c(0.0, 0.0));
        assert_eq!(a.get(1, 0), c(0.0, 0.0));
        assert_eq!(a.get(1, 1), c(0.0, 0.0));
    }

    #[test]
    fn annihilation_kills_vacuum() {
        let a = build_annihilation(8).unwrap();
        let vac = StateVector::fock(8, 0).unwrap();
        let out = a.apply(&vac).unwrap();
        assert!(out.iter().all(|z| *z == c(0.0, 0.0)));
    }

    #[test]
    fn ladder_commutator_is_identity_below_top_level() {
        let n_max = 12;
        let a = build_annihilation(n_max).unwrap();
        let comm = a.commutator(&a.adjoint()).unwrap();
        let interior = Interior::new(n_max, n_max - 1);
        // exact up to the rounding of √n·√n
        assert!(comm.distance_to_identity(&interior, c(1.0, 0.0)) < 1e-14);
        // the top level carries the truncation artifact 1 - n_max
        assert_abs_diff_eq!(
            comm.get(n_max - 1, n_max - 1).re,
            1.0 - n_max as f64,
            epsilon = 1e-13
        );
    }

    #[test]
    fn displacement_at_zero_is_identity() {
        let d = build_displacement(c(0.0, 0.0), 10).unwrap();
        assert!(d.distance_to_identity(&Interior::full(10), c(1.0, 0.0)) < 1e-15);
        assert!(d.is_unitary_hint());
    }

    #[test]
    fn displacement_first_column_is_coherent_state() {
        let beta = c(0.3, -0.4);
        let n_max = 40;
        let d = build_displacement(beta, n_max).unwrap();
        let expected = coherent_amplitudes(beta, n_max);
        for (n, want) in expected.iter().enumerate().take(20) {
            assert_abs_diff_eq!(d.get(n, 0).re, want.re, epsilon = 1e-12);
            assert_abs_diff_eq!(d.get(n, 0).im, want.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn displacement_inverse_pair() {
        let n_max = 64;
        let beta = c(0.0, 0.25);
        let d = build_displacement(beta, n_max).unwrap();
        let dm = build_displacement(-beta, n_max).unwrap();
        let interior = Interior::displacement(n_max, 2.0 * beta.norm());
        assert!((&d * &dm).distance_to_identity(&interior, c(1.0, 0.0)) < 1e-8);
        assert!(d.unitarity_defect(&Interior::full(n_max)) < 1e-12);
    }

    #[test]
    fn vacuum_coherent_state() {
        let s = coherent_state(c(0.0, 0.0), 10).unwrap();
        assert_eq!(s.state.entries()[0], c(1.0, 0.0));
        assert_eq!(s.norm_deficit, 0.0);
    }

    #[test]
    fn coherent_state_truncation_guard() {
        let alpha = c(0.5, 5.0);
        let err = coherent_state(alpha, 40).unwrap_err();
        assert!(matches!(
            err,
            Error::TruncationTooSmall {
                required: 66,
                n_max: 40
            }
        ));
    }

    #[test]
    fn coherent_state_matches_displaced_vacuum() {
        let alpha = c(1.5, -0.7);
        let n_max = 48;
        let s = coherent_state(alpha, n_max).unwrap();
        let d = build_displacement(alpha, n_max).unwrap();
        let vac = StateVector::fock(n_max, 0).unwrap();
        let displaced = d.apply(&vac).unwrap();
        let dev = linalg::max_abs_vec(&(displaced - s.state.entries()));
        assert!(dev < 1e-8, "deviation {dev:e}");
    }

    #[test]
    fn coherent_state_poisson_mean() {
        let alpha = c(0.5, 5.0);
        let s = coherent_state(alpha, 128).unwrap();
        assert_abs_diff_eq!(s.state.mean_phonon_number(), 25.25, epsilon = 1e-8);
        assert!(s.norm_deficit.abs() < 1e-12);
    }

    #[test]
    fn sigma_z_ordering() {
        let dims = SpaceDims::new(5).unwrap();
        let sz = electronic(dims, ElectronicPart::SigmaZ);
        for i in 0..10 {
            let want = if i < 5 { -1.0 } else { 1.0 };
            assert_eq!(sz.get(i, i), c(want, 0.0));
        }
        assert!(sz.is_hermitian_hint());
    }

    #[test]
    fn number_operator_spectrum_doubled() {
        let dims = SpaceDims::new(6).unwrap();
        let n = full_number(dims);
        let mut diag: Vec<f64> = (0..12).map(|i| n.get(i, i).re).collect();
        diag.sort_by(f64::total_cmp);
        let want: Vec<f64> = (0..6).flat_map(|k| [k as f64, k as f64]).collect();
        assert_eq!(diag, want);
    }

    #[test]
    fn lowering_times_sigma_plus_matrix_element() {
        let dims = SpaceDims::new(6).unwrap();
        let a = build_annihilation(6).unwrap();
        let op = tensor_electronic(&a, ElectronicPart::SigmaPlus).unwrap();
        let row = dims.index(Electronic::Excited, 0);
        let col = dims.index(Electronic::Ground, 1);
        assert_eq!(op.get(row, col), c(1.0, 0.0));
        assert!(!op.is_hermitian_hint());
    }

    #[test]
    fn pauli_algebra() {
        let dims = SpaceDims::new(4).unwrap();
        let sp = electronic(dims, ElectronicPart::SigmaPlus);
        let sm = electronic(dims, ElectronicPart::SigmaMinus);
        let sz = electronic(dims, ElectronicPart::SigmaZ);
        let anti = &(&sp * &sm) + &(&sm * &sp);
        assert_eq!(
            anti.distance_to_identity(&Interior::full(4), c(1.0, 0.0)),
            0.0
        );
        let z = &(&sp * &sm) - &(&sm * &sp);
        assert_eq!(z.entries(), sz.entries());
    }

    #[test]
    fn tensor_rejects_full_space_operand() {
        let dims = SpaceDims::new(3).unwrap();
        let sz = electronic(dims, ElectronicPart::SigmaZ);
        assert!(tensor_electronic(&sz, ElectronicPart::Identity).is_err());
    }

    #[test]
    fn state_vector_rejects_unnormalized() {
        let v = CVector::from_element(4, c(1.0, 0.0));
        assert!(matches!(
            StateVector::new(Space::Fock(4), v.clone()),
            Err(Error::NotNormalized { .. })
        ));
        let s = StateVector::normalized(Space::Fock(4), v).unwrap();
        assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn alpha_tilde_shift() {
        let amp = CoherentAmplitude::new(c(0.5, 5.0), 0.5);
        assert_eq!(amp.alpha_tilde(), c(0.5, 4.75));
        assert_eq!(
            amp.alpha_tilde(),
            CoherentAmplitude::new(amp.alpha(), amp.eta()).alpha_tilde()
        );
        assert_eq!(amp.required_n_max(), 66);
        assert_eq!(amp.auto_n_max(), 80);
    }

    #[test]
    fn interior_rules() {
        assert_eq!(Interior::propagation(64).levels(), 59);
        assert_eq!(Interior::displacement(64, 0.0).levels(), 56);
        assert_eq!(Interior::displacement(64, 2.0).levels(), 36);
        assert_eq!(Interior::displacement(4, 3.0).levels(), 0);
        let idx = Interior::new(4, 2).indices(Space::Full(SpaceDims::new(4).unwrap()));
        assert_eq!(idx, [0, 1, 4, 5]);
    }
}
