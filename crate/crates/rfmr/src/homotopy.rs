//! Predictor–corrector continuation of equilibria along a segment of rate
//! vectors.
//!
//! Fix a total occupancy `s ∈ (0, n)`. On the slice `Σe = s` the equilibrium
//! for `λ = (1, …, 1)` is known in closed form — the diagonal point
//! `(s/n, …, s/n)` — and the equilibrium for any other rate vector is the
//! unique zero of the augmented map
//!
//! ```text
//! g(λ, e) = (f(λ, e), Σe − s) ∈ R^n.
//! ```
//!
//! Sliding `λ` along the segment `λ(t) = (1−t)λ₁ + tλ₂` defines the homotopy
//! `H(e, t) = g(λ(t), e)`, whose zero set is a smooth curve `γ(t)` with
//! tangent `W·γ′ = −∂H/∂t` (`W` from [`crate::jacobians::augmented_w`]).
//! [`trace_path`] follows it with an Euler predictor, a full-Newton
//! corrector, and an adaptive step in `t`: halve on corrector failure, grow
//! by 1.5× after two consecutive cheap corrections. The corrector residual
//! `‖g‖∞ ≤ corrector_tol` is the quality contract at every accepted node.

use crate::error::{Error, Result};
use crate::jacobians::{certificate_for_matrix, w_raw, MatrixKind};
use crate::model::{
    self, check_dims, norm_inf, ParamVector, StateVector, ValidationMode, STATE_BAND,
};
use nalgebra::DVector;
use serde::Serialize;

/// Corrector iterates may overshoot the unit cube transiently; beyond this
/// margin the iteration is declared lost instead of chasing it.
const CORRECTOR_GUARD: f64 = 0.1;

/// Total occupancies within this distance of 0 or n are legal but flagged
/// in the trace metadata: the equilibrium hugs a corner of the cube there.
const BOUNDARY_S_BAND: f64 = 1e-6;

/// Step-size policy and corrector limits for [`trace_path`].
#[derive(Debug, Clone, Serialize)]
pub struct TracerOptions {
    /// First predictor step in `t`.
    pub initial_step: f64,
    /// Giving-up threshold: halving below this reports `StepUnderflow`.
    pub min_step: f64,
    /// Cap for step growth.
    pub max_step: f64,
    /// Acceptance threshold on `‖g‖∞` for corrected points.
    pub corrector_tol: f64,
    /// Newton iterations allowed per correction.
    pub max_corrector_iters: usize,
    /// Predictor attempts (accepted or rejected) before giving up.
    pub max_steps: usize,
}

impl Default for TracerOptions {
    fn default() -> Self {
        TracerOptions {
            initial_step: 1e-2,
            min_step: 1e-8,
            max_step: 0.1,
            corrector_tol: 1e-10,
            max_corrector_iters: 8,
            max_steps: 100_000,
        }
    }
}

impl TracerOptions {
    pub fn validate(&self) -> Result<()> {
        let ordered = 0.0 < self.min_step
            && self.min_step <= self.initial_step
            && self.initial_step <= self.max_step
            && self.max_step <= 1.0;
        if !ordered {
            return Err(Error::InvalidOptions(format!(
                "step sizes must satisfy 0 < min_step <= initial_step <= max_step <= 1, \
                 got min {}, initial {}, max {}",
                self.min_step, self.initial_step, self.max_step
            )));
        }
        if !(self.corrector_tol > 0.0 && self.corrector_tol.is_finite()) {
            return Err(Error::InvalidOptions(format!(
                "corrector_tol must be strictly positive and finite, got {}",
                self.corrector_tol
            )));
        }
        if self.max_corrector_iters == 0 {
            return Err(Error::InvalidOptions(
                "max_corrector_iters must be at least 1".into(),
            ));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidOptions("max_steps must be at least 1".into()));
        }
        Ok(())
    }
}

/// A continuation problem: both segment endpoints and the occupancy slice.
#[derive(Debug, Clone, Serialize)]
pub struct HomotopyProblem {
    lam_start: ParamVector,
    lam_end: ParamVector,
    s: f64,
}

impl HomotopyProblem {
    /// Builds a problem, requiring matching dimensions and `0 < s < n`.
    pub fn new(lam_start: ParamVector, lam_end: ParamVector, s: f64) -> Result<Self> {
        if lam_start.len() != lam_end.len() {
            return Err(Error::DimensionMismatch {
                expected: lam_start.len(),
                got: lam_end.len(),
            });
        }
        let n = lam_start.len();
        if !(s > 0.0 && s < n as f64) {
            return Err(Error::InvalidFirstIntegral { s, n });
        }
        Ok(HomotopyProblem {
            lam_start,
            lam_end,
            s,
        })
    }

    /// The conventional problem: from unit rates to `lam_end`.
    pub fn from_unit(lam_end: ParamVector, s: f64) -> Result<Self> {
        let ones = ParamVector::ones(lam_end.len())?;
        HomotopyProblem::new(ones, lam_end, s)
    }

    pub fn lam_start(&self) -> &ParamVector {
        &self.lam_start
    }

    pub fn lam_end(&self) -> &ParamVector {
        &self.lam_end
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn n(&self) -> usize {
        self.lam_start.len()
    }

    /// Whether `s` sits within [`BOUNDARY_S_BAND`] of the degenerate values
    /// 0 and n.
    pub fn near_boundary_s(&self) -> bool {
        self.s <= BOUNDARY_S_BAND || self.s >= self.n() as f64 - BOUNDARY_S_BAND
    }
}

/// How a trace ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceStatus {
    /// Reached `t = 1` with the corrector tolerance met.
    Converged,
    /// Step halving fell below `min_step` before reaching `t = 1`.
    StepUnderflow,
    /// Ran out of predictor attempts.
    MaxSteps,
}

/// One accepted point on the path.
#[derive(Debug, Clone, Serialize)]
pub struct TraceNode {
    pub t: f64,
    pub state: StateVector,
    /// `‖g(λ(t), state)‖∞` at acceptance.
    pub residual_norm: f64,
}

/// The full record of a continuation run.
#[derive(Debug, Clone, Serialize)]
pub struct PathTrace {
    pub s: f64,
    pub lam_start: ParamVector,
    pub lam_end: ParamVector,
    pub nodes: Vec<TraceNode>,
    pub status: TraceStatus,
    /// See [`HomotopyProblem::near_boundary_s`].
    pub near_boundary_s: bool,
}

impl PathTrace {
    pub fn is_converged(&self) -> bool {
        self.status == TraceStatus::Converged
    }

    /// The last accepted state (the equilibrium for `lam_end` when the
    /// status is `Converged`).
    pub fn final_node(&self) -> &TraceNode {
        self.nodes
            .last()
            .expect("a trace always has its t = 0 node")
    }
}

/// The known equilibrium at unit rates on the slice `Σe = s`: the diagonal
/// point `(s/n, …, s/n)`.
pub fn start_point(n: usize, s: f64) -> Result<StateVector> {
    if !(s > 0.0 && s < n as f64) {
        return Err(Error::InvalidFirstIntegral { s, n });
    }
    StateVector::uniform(n, s / n as f64)
}

/// `H(e, t) = g(λ(t), e)` as a length-`n` vector: the flux-balance residual
/// followed by the occupancy defect `Σe − s`.
pub fn homotopy_residual(prob: &HomotopyProblem, e: &StateVector, t: f64) -> Result<Vec<f64>> {
    let lam_t = prob.lam_start.lerp(&prob.lam_end, t)?;
    check_dims(&lam_t, e)?;
    let mut out = vec![0.0; e.len()];
    g_into(lam_t.as_slice(), e.as_slice(), prob.s, &mut out);
    Ok(out)
}

/// The path tangent at `(e, t)`: solves `W(λ(t), e)·v = −(g(λ₂,e) − g(λ₁,e))`.
/// The right-hand side's last component is identically zero (the slice
/// constraint does not move with `t`), so `Σv = 0`: the tangent stays in the
/// hyperplane.
pub fn path_tangent(prob: &HomotopyProblem, e: &StateVector, t: f64) -> Result<Vec<f64>> {
    let lam_t = prob.lam_start.lerp(&prob.lam_end, t)?;
    check_dims(&lam_t, e)?;
    tangent_core(
        prob.lam_start.as_slice(),
        prob.lam_end.as_slice(),
        lam_t.as_slice(),
        e.as_slice(),
    )
}

/// Newton correction of `guess` onto `g(λ, ·) = 0` at fixed occupancy `s`.
pub fn newton_correct(
    lam: &ParamVector,
    s: f64,
    guess: &StateVector,
    opts: &TracerOptions,
) -> Result<StateVector> {
    opts.validate()?;
    check_dims(lam, guess)?;
    let (e, _, _) = newton_core(lam.as_slice(), s, guess.to_vec(), opts, None)?;
    wrap_state(e)
}

/// Like [`newton_correct`], also returning every iterate (the initial guess
/// first, the accepted point last) for convergence diagnostics.
pub fn newton_correct_traced(
    lam: &ParamVector,
    s: f64,
    guess: &StateVector,
    opts: &TracerOptions,
) -> Result<(StateVector, Vec<Vec<f64>>)> {
    opts.validate()?;
    check_dims(lam, guess)?;
    let mut log = vec![guess.to_vec()];
    let (e, _, _) = newton_core(lam.as_slice(), s, guess.to_vec(), opts, Some(&mut log))?;
    Ok((wrap_state(e)?, log))
}

/// Traces the lifted segment from the equilibrium at `lam_start` to the one
/// at `lam_end`. The first node is the corrected start at `t = 0`; on
/// `Converged` the last node sits exactly at `t = 1`.
pub fn trace_path(prob: &HomotopyProblem, opts: &TracerOptions) -> Result<PathTrace> {
    opts.validate()?;
    let n = prob.n();
    let lam1 = prob.lam_start.as_slice();
    let lam2 = prob.lam_end.as_slice();
    let s = prob.s;

    // Correct the diagonal point onto the t = 0 slice equilibrium. For the
    // conventional unit lam_start this converges in zero iterations.
    let diag = vec![s / n as f64; n];
    let (mut e, _, r0) = newton_core(lam1, s, diag, opts, None)?;
    check_node_invertible(lam1, &e)?;
    let mut nodes = vec![TraceNode {
        t: 0.0,
        state: wrap_state(e.clone())?,
        residual_norm: r0,
    }];

    let mut t = 0.0;
    let mut h = opts.initial_step;
    let mut easy_streak = 0usize;
    let mut attempts = 0usize;
    let mut status = TraceStatus::Converged;

    while t < 1.0 {
        attempts += 1;
        if attempts > opts.max_steps {
            status = TraceStatus::MaxSteps;
            break;
        }
        let step = h.min(1.0 - t);
        // Land on t = 1 exactly rather than creeping up to it.
        let t_new = if 1.0 - t <= h { 1.0 } else { t + step };
        let lam_t = lerp_raw(lam1, lam2, t);
        let v = tangent_core(lam1, lam2, &lam_t, &e)?;
        let mut predicted = e.clone();
        for i in 0..n {
            predicted[i] += step * v[i];
        }
        let lam_new = lerp_raw(lam1, lam2, t_new);
        match newton_core(&lam_new, s, predicted, opts, None) {
            Ok((corrected, iters, r)) => {
                check_node_invertible(&lam_new, &corrected)?;
                t = t_new;
                e = corrected;
                nodes.push(TraceNode {
                    t,
                    state: wrap_state(e.clone())?,
                    residual_norm: r,
                });
                easy_streak = if iters <= 2 { easy_streak + 1 } else { 0 };
                if easy_streak >= 2 {
                    h = (h * 1.5).min(opts.max_step);
                }
            }
            Err(Error::NoConvergence { .. }) => {
                easy_streak = 0;
                h = step * 0.5;
                if h < opts.min_step {
                    status = TraceStatus::StepUnderflow;
                    break;
                }
            }
            Err(other) => return Err(other),
        }
    }

    Ok(PathTrace {
        s,
        lam_start: prob.lam_start.clone(),
        lam_end: prob.lam_end.clone(),
        nodes,
        status,
        near_boundary_s: prob.near_boundary_s(),
    })
}

/// The equilibrium for `lam` on the slice `Σe = s`, found by continuation
/// from unit rates. Unlike [`trace_path`], an unfinished path is an error
/// here, not a status.
pub fn equilibrium_at(lam: &ParamVector, s: f64, opts: &TracerOptions) -> Result<StateVector> {
    let prob = HomotopyProblem::from_unit(lam.clone(), s)?;
    let trace = trace_path(&prob, opts)?;
    let last = trace.final_node();
    match trace.status {
        TraceStatus::Converged => Ok(last.state.clone()),
        TraceStatus::StepUnderflow => Err(Error::StepUnderflow {
            t: last.t,
            min_step: opts.min_step,
        }),
        TraceStatus::MaxSteps => Err(Error::MaxSteps {
            t: last.t,
            max_steps: opts.max_steps,
        }),
    }
}

/// `out = g(λ, e)`: flux-balance rows then the occupancy defect.
pub(crate) fn g_into(lam: &[f64], e: &[f64], s: f64, out: &mut [f64]) {
    let n = e.len();
    model::residual_into(lam, e, &mut out[..n - 1]);
    out[n - 1] = e.iter().sum::<f64>() - s;
}

fn lerp_raw(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter()
        .zip(b)
        .map(|(x, y)| (1.0 - t) * x + t * y)
        .collect()
}

/// Full-Newton iteration on `g(λ, ·) = 0` starting from `e`. Returns the
/// accepted point, the number of iterations spent, and the final `‖g‖∞`.
/// Iterates leaving the guarded cube are treated as corrector failure.
fn newton_core(
    lam: &[f64],
    s: f64,
    mut e: Vec<f64>,
    opts: &TracerOptions,
    mut log: Option<&mut Vec<Vec<f64>>>,
) -> Result<(Vec<f64>, usize, f64)> {
    let n = e.len();
    let mut g = vec![0.0; n];
    for iter in 0..=opts.max_corrector_iters {
        g_into(lam, &e, s, &mut g);
        let r = norm_inf(&g);
        if r <= opts.corrector_tol {
            return Ok((e, iter, r));
        }
        if iter == opts.max_corrector_iters {
            return Err(Error::NoConvergence {
                iterations: iter,
                residual: r,
            });
        }
        let w = w_raw(lam, &e);
        let lu = w.clone().lu();
        let Some(delta) = lu.solve(&DVector::from_column_slice(&g)) else {
            return Err(Error::SingularMatrix {
                certificate: Box::new(certificate_for_matrix(MatrixKind::W, &w, None)),
            });
        };
        for i in 0..n {
            e[i] -= delta[i];
        }
        if let Some(log) = log.as_mut() {
            log.push(e.clone());
        }
        if e.iter()
            .any(|&x| !(-CORRECTOR_GUARD..=1.0 + CORRECTOR_GUARD).contains(&x))
        {
            g_into(lam, &e, s, &mut g);
            return Err(Error::NoConvergence {
                iterations: iter + 1,
                residual: norm_inf(&g),
            });
        }
    }
    unreachable!("loop returns on success or exhaustion");
}

/// Solves `W(λ_t, e)·v = −(g(λ₂, e) − g(λ₁, e))`. Only the flux rows of the
/// right-hand side are nonzero; the slice row is pinned to exactly 0.
fn tangent_core(lam1: &[f64], lam2: &[f64], lam_t: &[f64], e: &[f64]) -> Result<Vec<f64>> {
    let n = e.len();
    let mut rhs = DVector::zeros(n);
    let mut f1 = vec![0.0; n - 1];
    let mut f2 = vec![0.0; n - 1];
    model::residual_into(lam1, e, &mut f1);
    model::residual_into(lam2, e, &mut f2);
    for i in 0..n - 1 {
        rhs[i] = -(f2[i] - f1[i]);
    }
    let w = w_raw(lam_t, e);
    let lu = w.clone().lu();
    match lu.solve(&rhs) {
        Some(v) => Ok(v.iter().copied().collect()),
        None => Err(Error::SingularMatrix {
            certificate: Box::new(certificate_for_matrix(MatrixKind::W, &w, None)),
        }),
    }
}

/// Accepted nodes must have an invertible Newton matrix — a zero LU pivot
/// here means the path hit a genuinely singular point.
fn check_node_invertible(lam: &[f64], e: &[f64]) -> Result<()> {
    let w = w_raw(lam, e);
    if w.clone().lu().determinant() == 0.0 {
        return Err(Error::SingularMatrix {
            certificate: Box::new(certificate_for_matrix(MatrixKind::W, &w, None)),
        });
    }
    Ok(())
}

fn wrap_state(e: Vec<f64>) -> Result<StateVector> {
    StateVector::with_mode(e, ValidationMode::Closed, STATE_BAND)
}
