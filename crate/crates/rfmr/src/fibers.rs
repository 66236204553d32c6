//! Fibers over a state point: which rate vectors make `e` an equilibrium.
//!
//! For a strictly interior `e`, requiring all transition fluxes to be equal
//! (`λ_i e_i (1 − e_{i+1})` constant around the ring) pins `λ` down to a ray
//!
//! ```text
//! σ_e = R₊* · ω_e,    (ω_e)_i ∝ 1 / (e_i (1 − e_{i+1})),
//! ```
//!
//! normalized here to unit Euclidean norm so the representative is unique.
//! The two corner states 0 and 1 are equilibria for *every* rate vector, so
//! their fiber is all of `(R₊*)^n`; any other boundary contact admits no
//! positive rate vector at all. [`fiber_direction`] distinguishes the three
//! cases rather than papering over them.

use crate::error::{Error, Result};
use crate::model::{
    classify_boundary, equilibrium_residual, BoundaryClass, ParamVector, StateVector,
};
use serde::Serialize;

/// The normalized generator of the fiber ray over an interior state.
#[derive(Debug, Clone, Serialize)]
pub struct FiberDirection {
    omega: ParamVector,
    anchor: StateVector,
}

impl FiberDirection {
    /// Unit-norm, entrywise-positive ray generator.
    pub fn omega(&self) -> &ParamVector {
        &self.omega
    }

    /// The state this direction was computed from.
    pub fn anchor(&self) -> &StateVector {
        &self.anchor
    }
}

/// The fiber over a state point.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Fiber {
    /// Interior state: the ray `R₊*·ω`.
    Ray(FiberDirection),
    /// Corner state (all-zero or all-one): every positive rate vector fixes
    /// it.
    AllParameters,
}

/// Computes the fiber over `e`. Interior states yield a [`Fiber::Ray`]; the
/// corner equilibria yield [`Fiber::AllParameters`]; any other boundary
/// contact is an error because no positive rate vector fixes such a state.
pub fn fiber_direction(e: &StateVector) -> Result<Fiber> {
    match classify_boundary(e, 0.0) {
        BoundaryClass::AllZero | BoundaryClass::AllOne => Ok(Fiber::AllParameters),
        BoundaryClass::MixedBoundary => Err(Error::MixedBoundaryState),
        BoundaryClass::Interior => {
            let xs = e.as_slice();
            let n = xs.len();
            let mut w: Vec<f64> = (0..n)
                .map(|i| 1.0 / (xs[i] * (1.0 - xs[(i + 1) % n])))
                .collect();
            let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            for v in &mut w {
                *v /= norm;
            }
            let omega = ParamVector::new(w)?;
            Ok(Fiber::Ray(FiberDirection {
                omega,
                anchor: e.clone(),
            }))
        }
    }
}

/// Whether two rate vectors generate the same fiber, i.e. are collinear up
/// to positive scale. Tested through the angle: `1 − cos(λ₁, λ₂) ≤ tol`.
pub fn fibers_coincide(lam1: &ParamVector, lam2: &ParamVector, tol: f64) -> Result<bool> {
    if lam1.len() != lam2.len() {
        return Err(Error::DimensionMismatch {
            expected: lam1.len(),
            got: lam2.len(),
        });
    }
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "collinearity tolerance must be nonnegative and finite, got {tol}"
        )));
    }
    let dot: f64 = lam1
        .as_slice()
        .iter()
        .zip(lam2.as_slice())
        .map(|(a, b)| a * b)
        .sum();
    // Both vectors are strictly positive, so the cosine is in (0, 1].
    let cosine = dot / (lam1.norm() * lam2.norm());
    Ok(1.0 - cosine <= tol)
}

/// Residual norm of the anchor under the computed direction — the quality
/// witness carried alongside the fiber in reports.
pub fn direction_residual_norm(dir: &FiberDirection) -> f64 {
    equilibrium_residual(dir.omega(), dir.anchor())
        .map(|r| r.norm_inf())
        .unwrap_or(f64::NAN)
}
