//! Equilibria of the ribosome flow model on a ring (RFMR).
//!
//! The RFMR moves mass around a cycle of `n` sites at rates
//! `λ_i x_i (1 − x_{i+1})`; total occupancy is conserved and each occupancy
//! slice carries exactly one equilibrium for each positive rate vector.
//! This crate computes those equilibria and the objects around them:
//!
//! * [`model`] — the vector field, the flux-balance residual, the conserved
//!   total occupancy, and boundary classification.
//! * [`jacobians`] — analytic Jacobians of the residual, the reduced matrix
//!   `A` with its positive closed-form determinant, the augmented Newton
//!   matrix `W`, and SVD-backed rank certificates.
//! * [`fibers`] — the ray of rate vectors fixing a given interior state, and
//!   the collinearity test for fiber coincidence.
//! * [`homotopy`] — predictor–corrector continuation from the closed-form
//!   equilibrium at unit rates to the equilibrium for arbitrary rates.
//! * [`simulate`] — fixed-step RK4 integration for validating conservation,
//!   cube invariance, and convergence.
//! * [`control`] — open-loop steering: reachability on the occupancy slice
//!   and constant-rate plans built from fiber directions.
//! * [`oracle`] — independent verifiers (finite differences, Newton
//!   multistart) used by the test suite.
//! * [`io`] — round-trip-exact number formatting, CSV layouts, atomic file
//!   writes.
//!
//! The `rfmr` binary exposes all of this behind a scriptable CLI with
//! deterministic, versioned outputs.

pub mod control;
pub mod error;
pub mod fibers;
pub mod homotopy;
pub mod io;
pub mod jacobians;
pub mod model;
pub mod oracle;
pub mod simulate;

pub use control::{plan, reachable, ControlPlan};
pub use error::{Error, Result};
pub use fibers::{fiber_direction, fibers_coincide, Fiber, FiberDirection};
pub use homotopy::{
    equilibrium_at, newton_correct, start_point, trace_path, HomotopyProblem, PathTrace, TraceNode,
    TraceStatus, TracerOptions,
};
pub use jacobians::{
    augmented_w, det_a_closed_form, jac_e, jac_lambda, rank_certificate, rank_certificate_scaled,
    reduced_matrix_a, MatrixKind, RankCertificate,
};
pub use model::{
    classify_boundary, equilibrium_residual, first_integral, vector_field, BoundaryClass,
    ParamVector, Residual, StateVector, ValidationMode,
};
pub use oracle::{fd_jacobian, newton_multistart, JacobianWrt, MultistartReport};
pub use simulate::{converge_to_equilibrium, integrate, integrate_until, Trajectory};
