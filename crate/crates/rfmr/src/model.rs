//! Core model: the ribosome flow model on a ring (RFMR).
//!
//! `n` sites sit on a cycle; site `i` holds an occupancy `x_i ∈ [0, 1]` and
//! passes mass to its successor at rate `λ_i x_i (1 − x_{i+1})`, indices
//! cyclic. The dynamics are
//!
//! ```text
//! dx_i/dt = λ_{i−1} x_{i−1} (1 − x_i) − λ_i x_i (1 − x_{i+1})
//! ```
//!
//! Total occupancy `s = Σ x_i` is conserved, so equilibria are naturally
//! indexed by the level sets of `s`. An interior point `e` is an equilibrium
//! iff all `n` transition fluxes agree, which this module encodes as the
//! `(n−1)`-dimensional residual
//!
//! ```text
//! f_i(λ, e) = λ_n e_n (1 − e_1) − λ_i e_i (1 − e_{i+1}),   i = 1, …, n−1.
//! ```
//!
//! All public functions take validated wrapper types ([`ParamVector`],
//! [`StateVector`]) so that dimension and range checks happen exactly once,
//! at the boundary.

use crate::error::{Error, Result};
use serde::Serialize;

/// Default tolerance for membership in the closed unit cube.
pub const DEFAULT_BOX_TOL: f64 = 1e-12;

/// Tolerance used when re-wrapping states produced by the integrator or the
/// Newton corrector, whose iterates may overshoot the cube by roundoff.
pub(crate) const STATE_BAND: f64 = 1e-9;

/// Strictly positive transition rates `λ_1, …, λ_n`, `n ≥ 2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    /// Wraps `values`, rejecting vectors shorter than 2 or containing an
    /// entry that is not strictly positive and finite.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::TooShort {
                required: 2,
                got: values.len(),
            });
        }
        for (index, &value) in values.iter().enumerate() {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::NonPositiveParameter { index, value });
            }
        }
        Ok(ParamVector(values))
    }

    /// The vector `(1, …, 1)` of length `n`.
    pub fn ones(n: usize) -> Result<Self> {
        ParamVector::new(vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false // the constructor enforces n >= 2
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.0.clone()
    }

    /// Entrywise scaling by a strictly positive factor.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "scale factor must be strictly positive and finite, got {factor}"
            )));
        }
        ParamVector::new(self.0.iter().map(|v| factor * v).collect())
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Convex combination `(1 − t)·self + t·other`; both endpoints positive
    /// make every intermediate vector positive for `t ∈ [0, 1]`.
    pub fn lerp(&self, other: &ParamVector, t: f64) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidArgument(format!(
                "interpolation parameter must lie in [0, 1], got {t}"
            )));
        }
        ParamVector::new(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| (1.0 - t) * a + t * b)
                .collect(),
        )
    }
}

impl std::ops::Index<usize> for ParamVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// How strictly [`StateVector::with_mode`] interprets the unit cube.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidationMode {
    /// Entries in `[−tol, 1 + tol]`.
    Closed,
    /// Entries in `(tol, 1 − tol)`: strictly interior with margin `tol`.
    Interior,
}

/// An occupancy vector in the closed unit cube `[0, 1]^n`, `n ≥ 2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct StateVector(Vec<f64>);

impl StateVector {
    /// Wraps `values`, requiring every entry in `[0, 1]` up to
    /// [`DEFAULT_BOX_TOL`].
    pub fn new(values: Vec<f64>) -> Result<Self> {
        StateVector::with_mode(values, ValidationMode::Closed, DEFAULT_BOX_TOL)
    }

    /// Wraps `values` under an explicit validation mode and tolerance.
    pub fn with_mode(values: Vec<f64>, mode: ValidationMode, tol: f64) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::TooShort {
                required: 2,
                got: values.len(),
            });
        }
        for (index, &value) in values.iter().enumerate() {
            let (ok, range) = match mode {
                ValidationMode::Closed => (
                    value.is_finite() && value >= -tol && value <= 1.0 + tol,
                    "[0, 1]",
                ),
                ValidationMode::Interior => (
                    value.is_finite() && value > tol && value < 1.0 - tol,
                    "(0, 1)",
                ),
            };
            if !ok {
                return Err(Error::StateOutOfRange {
                    index,
                    value,
                    range,
                    tol,
                });
            }
        }
        Ok(StateVector(values))
    }

    /// The constant vector `(value, …, value)` of length `n`.
    pub fn uniform(n: usize, value: f64) -> Result<Self> {
        StateVector::new(vec![value; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false // the constructor enforces n >= 2
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.0.clone()
    }
}

impl std::ops::Index<usize> for StateVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// The flux-balance residual `f(λ, e) ∈ R^{n−1}`; zero exactly at the
/// equilibria on the level set of `e`'s total occupancy.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Residual(Vec<f64>);

impl Residual {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Max-norm `‖f‖_∞`.
    pub fn norm_inf(&self) -> f64 {
        norm_inf(&self.0)
    }
}

/// Where a state sits relative to the boundary of the unit cube.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryClass {
    /// All entries strictly inside `(tol, 1 − tol)`.
    Interior,
    /// Every entry within `tol` of 0: the empty-ring equilibrium.
    AllZero,
    /// Every entry within `tol` of 1: the full-ring equilibrium.
    AllOne,
    /// Touches the boundary without being a corner equilibrium.
    MixedBoundary,
}

/// Right-hand side of the dynamics at `x`: component `i` receives flux from
/// site `i−1` and sheds flux to site `i+1` (cyclically).
pub fn vector_field(lam: &ParamVector, x: &StateVector) -> Result<Vec<f64>> {
    check_dims(lam, x)?;
    let mut out = vec![0.0; x.len()];
    field_into(lam.as_slice(), x.as_slice(), &mut out);
    Ok(out)
}

/// The equilibrium residual `f(λ, e) ∈ R^{n−1}`: flux `n → 1` minus flux
/// `i → i+1` for `i = 1, …, n−1`.
pub fn equilibrium_residual(lam: &ParamVector, e: &StateVector) -> Result<Residual> {
    check_dims(lam, e)?;
    let mut out = vec![0.0; e.len() - 1];
    residual_into(lam.as_slice(), e.as_slice(), &mut out);
    Ok(Residual(out))
}

/// The conserved total occupancy `s = Σ x_i`.
pub fn first_integral(x: &StateVector) -> f64 {
    x.as_slice().iter().sum()
}

/// Classifies `e` against the cube boundary with absolute tolerance `tol`
/// (negative tolerances are treated as zero).
pub fn classify_boundary(e: &StateVector, tol: f64) -> BoundaryClass {
    let tol = tol.max(0.0);
    let xs = e.as_slice();
    if xs.iter().all(|&v| v.abs() <= tol) {
        return BoundaryClass::AllZero;
    }
    if xs.iter().all(|&v| (v - 1.0).abs() <= tol) {
        return BoundaryClass::AllOne;
    }
    if xs.iter().all(|&v| v > tol && v < 1.0 - tol) {
        return BoundaryClass::Interior;
    }
    BoundaryClass::MixedBoundary
}

pub(crate) fn check_dims(lam: &ParamVector, x: &StateVector) -> Result<()> {
    if lam.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: lam.len(),
            got: x.len(),
        });
    }
    Ok(())
}

/// Transition flux out of site `i` (cyclic successor).
#[inline]
pub(crate) fn flux(lam: &[f64], x: &[f64], i: usize) -> f64 {
    let n = x.len();
    lam[i] * x[i] * (1.0 - x[(i + 1) % n])
}

/// `out[i] = flux(i−1) − flux(i)`, written without allocating.
pub(crate) fn field_into(lam: &[f64], x: &[f64], out: &mut [f64]) {
    let n = x.len();
    for (i, slot) in out.iter_mut().enumerate() {
        let prev = (i + n - 1) % n;
        *slot = flux(lam, x, prev) - flux(lam, x, i);
    }
}

/// `out[i] = flux(n−1) − flux(i)` for `i = 0, …, n−2` (zero-based).
pub(crate) fn residual_into(lam: &[f64], e: &[f64], out: &mut [f64]) {
    let n = e.len();
    let closing = flux(lam, e, n - 1);
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = closing - flux(lam, e, i);
    }
}

pub(crate) fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |acc, &x| acc.max(x.abs()))
}
