//! Jacobians of the equilibrium residual and rank certificates.
//!
//! Everything here derives from the residual `f(λ, e) ∈ R^{n−1}` of
//! [`crate::model`]. Four matrices matter:
//!
//! * `J_λ = ∂f/∂λ` (`n−1 × n`) — sensitivity in the rates; its kernel is the
//!   ray of rate vectors sharing the same equilibrium.
//! * `J_e = ∂f/∂e` (`n−1 × n`) — sensitivity in the state.
//! * `A` (`n−1 × n−1`) — `J_e` with its first column removed. On the open
//!   cube `det A` expands into a sum of strictly positive monomials, so `A`
//!   is always invertible there; [`det_a_closed_form`] evaluates that
//!   expansion directly.
//! * `W` (`n × n`) — `J_e` stacked over a row of ones. This is the Newton
//!   matrix for the residual augmented with the total-occupancy constraint,
//!   and `det W ≠ 0` is what makes corrector steps well-posed.
//!
//! [`rank_certificate`] packages an SVD-based full-rank check with the
//! threshold it used, so callers can log exactly what was verified.

use crate::error::{Error, Result};
use crate::model::{check_dims, ParamVector, StateVector};
use nalgebra::DMatrix;
use serde::Serialize;

/// Relative factor applied to the largest singular value when no explicit
/// rank threshold is supplied.
pub const RANK_THRESHOLD_SCALE: f64 = 1e-10;

/// Which Jacobian-derived matrix an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    JLambda,
    JE,
    A,
    W,
}

impl MatrixKind {
    pub fn is_square(self) -> bool {
        matches!(self, MatrixKind::A | MatrixKind::W)
    }

    pub fn label(self) -> &'static str {
        match self {
            MatrixKind::JLambda => "j_lambda",
            MatrixKind::JE => "j_e",
            MatrixKind::A => "a",
            MatrixKind::W => "w",
        }
    }
}

/// Outcome of a numerical full-rank check: the smallest singular value, the
/// threshold it was compared against, and (for square matrices) an LU
/// determinant as a second, independent witness.
#[derive(Debug, Clone, Serialize)]
pub struct RankCertificate {
    pub matrix_kind: MatrixKind,
    pub smallest_singular_value: f64,
    /// LU determinant; `None` for the non-square kinds.
    pub determinant: Option<f64>,
    /// Absolute threshold the smallest singular value was compared against.
    pub threshold: f64,
    /// `smallest_singular_value > threshold`.
    pub full_rank: bool,
}

/// `∂f/∂λ` at `(λ, e)`, shape `n−1 × n`. Row `i` carries the closing-flux
/// term in column `n` and the local flux term on the diagonal.
pub fn jac_lambda(lam: &ParamVector, e: &StateVector) -> Result<DMatrix<f64>> {
    check_dims(lam, e)?;
    let e = e.as_slice();
    let n = e.len();
    let mut m = DMatrix::zeros(n - 1, n);
    for r in 0..n - 1 {
        m[(r, r)] += -e[r] * (1.0 - e[r + 1]);
        m[(r, n - 1)] += e[n - 1] * (1.0 - e[0]);
    }
    Ok(m)
}

/// `∂f/∂e` at `(λ, e)`, shape `n−1 × n`. Each row touches at most four
/// columns; terms are accumulated because they collide at `n = 3` and in the
/// first and last rows.
pub fn jac_e(lam: &ParamVector, e: &StateVector) -> Result<DMatrix<f64>> {
    check_dims(lam, e)?;
    Ok(jac_e_raw(lam.as_slice(), e.as_slice()))
}

/// `J_e` with its first column removed (`n−1 × n−1`).
pub fn reduced_matrix_a(lam: &ParamVector, e: &StateVector) -> Result<DMatrix<f64>> {
    let je = jac_e(lam, e)?;
    let n = e.len();
    Ok(je.columns(1, n - 1).into_owned())
}

/// `det A` through its monomial expansion
///
/// ```text
/// det A = Π_{k<n} λ_k e_k
///       + λ_n (1 − e_1) · Σ_{k<n} [Π_{m<k} λ_m e_m] · [Π_{m>k} λ_m (1 − e_{m+1})]
/// ```
///
/// (one-based indices, `k`, `m` ranging over `1..n−1`). Every summand is a
/// product of strictly positive factors on the open cube, which is the
/// structural reason `A` never degenerates there.
pub fn det_a_closed_form(lam: &ParamVector, e: &StateVector) -> Result<f64> {
    check_dims(lam, e)?;
    require_n3(lam.len())?;
    let lam = lam.as_slice();
    let e = e.as_slice();
    let n = e.len();

    // d[k] = λ_k e_k and t[k] = λ_k (1 − e_{k+1}) for k = 0..n-2 (zero-based).
    let d: Vec<f64> = (0..n - 1).map(|k| lam[k] * e[k]).collect();
    let t: Vec<f64> = (0..n - 1).map(|k| lam[k] * (1.0 - e[k + 1])).collect();

    // suffix[k] = Π_{m>k} t[m]
    let mut suffix = vec![1.0; n - 1];
    for k in (0..n - 2).rev() {
        suffix[k] = suffix[k + 1] * t[k + 1];
    }

    let mut sum = 0.0;
    let mut prefix = 1.0; // Π_{m<k} d[m]
    for k in 0..n - 1 {
        sum += prefix * suffix[k];
        prefix *= d[k];
    }
    // After the loop `prefix` is the full product Π d[k].
    Ok(prefix + lam[n - 1] * (1.0 - e[0]) * sum)
}

/// `J_e` stacked over a row of ones (`n × n`): the Newton matrix of the
/// residual augmented with the total-occupancy constraint.
pub fn augmented_w(lam: &ParamVector, e: &StateVector) -> Result<DMatrix<f64>> {
    check_dims(lam, e)?;
    Ok(w_raw(lam.as_slice(), e.as_slice()))
}

/// Determinant via LU with partial pivoting; the generic cross-check for
/// [`det_a_closed_form`].
pub fn det_lu(m: &DMatrix<f64>) -> f64 {
    assert_eq!(m.nrows(), m.ncols(), "determinant of a non-square matrix");
    m.clone().lu().determinant()
}

/// Runs the SVD-based full-rank check for `kind` at `(λ, e)` against an
/// explicit absolute `threshold` (which must be strictly positive).
pub fn rank_certificate(
    kind: MatrixKind,
    lam: &ParamVector,
    e: &StateVector,
    threshold: f64,
) -> Result<RankCertificate> {
    if !(threshold > 0.0 && threshold.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "rank threshold must be strictly positive and finite, got {threshold}"
        )));
    }
    let m = build_matrix(kind, lam, e)?;
    Ok(certificate_for_matrix(kind, &m, Some(threshold)))
}

/// Like [`rank_certificate`], with the threshold chosen relative to the
/// matrix itself: [`RANK_THRESHOLD_SCALE`] times the largest singular value.
pub fn rank_certificate_scaled(
    kind: MatrixKind,
    lam: &ParamVector,
    e: &StateVector,
) -> Result<RankCertificate> {
    let m = build_matrix(kind, lam, e)?;
    Ok(certificate_for_matrix(kind, &m, None))
}

fn build_matrix(kind: MatrixKind, lam: &ParamVector, e: &StateVector) -> Result<DMatrix<f64>> {
    match kind {
        MatrixKind::JLambda => jac_lambda(lam, e),
        MatrixKind::JE => jac_e(lam, e),
        MatrixKind::A => reduced_matrix_a(lam, e),
        MatrixKind::W => augmented_w(lam, e),
    }
}

/// Certificate for an already-built matrix; `threshold = None` selects the
/// scaled default. Also used by the corrector's singular-matrix error path,
/// where the state may sit outside the cube and cannot be re-wrapped.
pub(crate) fn certificate_for_matrix(
    kind: MatrixKind,
    m: &DMatrix<f64>,
    threshold: Option<f64>,
) -> RankCertificate {
    let svd = m.clone().svd(false, false);
    let (mut smin, mut smax) = (f64::INFINITY, 0.0_f64);
    for &s in svd.singular_values.iter() {
        smin = smin.min(s);
        smax = smax.max(s);
    }
    let threshold = threshold.unwrap_or(RANK_THRESHOLD_SCALE * smax);
    let determinant = kind.is_square().then(|| det_lu(m));
    RankCertificate {
        matrix_kind: kind,
        smallest_singular_value: smin,
        determinant,
        threshold,
        full_rank: smin > threshold,
    }
}

pub(crate) fn jac_e_raw(lam: &[f64], e: &[f64]) -> DMatrix<f64> {
    let n = e.len();
    let mut m = DMatrix::zeros(n - 1, n);
    fill_jac_e(lam, e, &mut m);
    m
}

pub(crate) fn w_raw(lam: &[f64], e: &[f64]) -> DMatrix<f64> {
    let n = e.len();
    let mut m = DMatrix::zeros(n, n);
    fill_jac_e(lam, e, &mut m);
    for j in 0..n {
        m[(n - 1, j)] = 1.0;
    }
    m
}

/// Writes `J_e` into the first `n−1` rows of `m` (which may have `n−1` or
/// `n` rows). Uses accumulation: at `n = 3` every row touches a column twice.
fn fill_jac_e(lam: &[f64], e: &[f64], m: &mut DMatrix<f64>) {
    let n = e.len();
    for r in 0..n - 1 {
        m[(r, 0)] += -lam[n - 1] * e[n - 1];
        m[(r, n - 1)] += lam[n - 1] * (1.0 - e[0]);
        m[(r, r)] += -lam[r] * (1.0 - e[r + 1]);
        m[(r, (r + 1) % n)] += lam[r] * e[r];
    }
}

fn require_n3(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::DimensionTooSmall {
            required: 3,
            got: n,
        });
    }
    Ok(())
}
