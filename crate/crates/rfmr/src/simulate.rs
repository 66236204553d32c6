//! Fixed-step time integration of the flow.
//!
//! The integrator exists to *validate* the model's structural claims —
//! conservation of total occupancy, forward invariance of the unit cube,
//! convergence to the slice equilibrium — so it favors determinism over
//! adaptivity: classical RK4 with a fixed step, no clamping, no projection.
//! Invariance is checked, not enforced; a state leaving the roundoff band
//! around the cube is reported as an error (the step was too large), never
//! silently repaired.

use crate::error::{Error, Result};
use crate::model::{
    self, check_dims, norm_inf, ParamVector, StateVector, ValidationMode, STATE_BAND,
};

/// Default integration step.
pub const DEFAULT_DT: f64 = 1e-2;

/// A recorded integration run. `times` and `states` have equal length and
/// start at `(0, x0)`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub lam: ParamVector,
}

impl Trajectory {
    pub fn final_state(&self) -> &StateVector {
        self.states.last().expect("a trajectory records its start")
    }
}

/// Integrates the flow from `x0` over `[0, t_end]` with step `dt`,
/// recording every step (plus a shorter final step when `dt` does not
/// divide `t_end`).
pub fn integrate(lam: &ParamVector, x0: &StateVector, t_end: f64, dt: f64) -> Result<Trajectory> {
    integrate_until(lam, x0, t_end, dt, None)
}

/// Like [`integrate`], but stops early once `‖vector_field‖∞ ≤ field_tol`
/// when a tolerance is supplied. The stopping check runs before each step,
/// so an `x0` already at equilibrium yields a single-entry trajectory.
pub fn integrate_until(
    lam: &ParamVector,
    x0: &StateVector,
    t_end: f64,
    dt: f64,
    field_tol: Option<f64>,
) -> Result<Trajectory> {
    check_dims(lam, x0)?;
    validate_horizon(t_end, dt)?;
    if let Some(tol) = field_tol {
        validate_tol(tol)?;
    }

    let full_steps = (t_end / dt).floor() as usize;
    let leftover = t_end - full_steps as f64 * dt;
    let take_leftover = leftover > dt * 1e-9;

    let mut stepper = Stepper::new(lam.len());
    let mut x = x0.to_vec();
    let mut times = Vec::with_capacity(full_steps + 2);
    let mut states = Vec::with_capacity(full_steps + 2);
    times.push(0.0);
    states.push(x0.clone());

    let mut field = vec![0.0; x.len()];
    for k in 0..full_steps {
        if let Some(tol) = field_tol {
            model::field_into(lam.as_slice(), &x, &mut field);
            if norm_inf(&field) <= tol {
                return Ok(Trajectory {
                    times,
                    states,
                    lam: lam.clone(),
                });
            }
        }
        let t_next = (k + 1) as f64 * dt;
        stepper.rk4(lam.as_slice(), &mut x, dt);
        check_band(&x, t_next)?;
        times.push(t_next);
        states.push(wrap_state(&x)?);
    }
    if take_leftover {
        let done_early = match field_tol {
            Some(tol) => {
                model::field_into(lam.as_slice(), &x, &mut field);
                norm_inf(&field) <= tol
            }
            None => false,
        };
        if !done_early {
            stepper.rk4(lam.as_slice(), &mut x, leftover);
            check_band(&x, t_end)?;
            times.push(t_end);
            states.push(wrap_state(&x)?);
        }
    }
    Ok(Trajectory {
        times,
        states,
        lam: lam.clone(),
    })
}

/// Integrates with the default step until the field's sup-norm drops to
/// `tol`, returning the final state, or fails with `Timeout` at `t_max`.
/// The check runs before stepping, so an exact equilibrium is returned
/// unchanged.
pub fn converge_to_equilibrium(
    lam: &ParamVector,
    x0: &StateVector,
    tol: f64,
    t_max: f64,
) -> Result<StateVector> {
    check_dims(lam, x0)?;
    validate_tol(tol)?;
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "t_max must be strictly positive and finite, got {t_max}"
        )));
    }

    let mut stepper = Stepper::new(lam.len());
    let mut x = x0.to_vec();
    let mut field = vec![0.0; x.len()];
    let mut t = 0.0;
    loop {
        model::field_into(lam.as_slice(), &x, &mut field);
        let r = norm_inf(&field);
        if r <= tol {
            return wrap_state(&x);
        }
        if t >= t_max {
            return Err(Error::Timeout {
                t_max,
                residual: r,
                tol,
            });
        }
        let dt = DEFAULT_DT.min(t_max - t);
        stepper.rk4(lam.as_slice(), &mut x, dt);
        t += dt;
        check_band(&x, t)?;
    }
}

/// Scratch buffers for the RK4 stages, reused across steps.
struct Stepper {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Stepper {
    fn new(n: usize) -> Self {
        Stepper {
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }

    fn rk4(&mut self, lam: &[f64], x: &mut [f64], dt: f64) {
        model::field_into(lam, x, &mut self.k1);
        stage(&mut self.tmp, x, &self.k1, 0.5 * dt);
        model::field_into(lam, &self.tmp, &mut self.k2);
        stage(&mut self.tmp, x, &self.k2, 0.5 * dt);
        model::field_into(lam, &self.tmp, &mut self.k3);
        stage(&mut self.tmp, x, &self.k3, dt);
        model::field_into(lam, &self.tmp, &mut self.k4);
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += dt / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }
}

/// One explicit stage: `tmp = x + h·k`.
fn stage(tmp: &mut [f64], x: &[f64], k: &[f64], h: f64) {
    for (t, (xv, kv)) in tmp.iter_mut().zip(x.iter().zip(k)) {
        *t = xv + h * kv;
    }
}

fn check_band(x: &[f64], t: f64) -> Result<()> {
    for (index, &value) in x.iter().enumerate() {
        if !(-STATE_BAND..=1.0 + STATE_BAND).contains(&value) {
            return Err(Error::StateEscaped { t, index, value });
        }
    }
    Ok(())
}

fn wrap_state(x: &[f64]) -> Result<StateVector> {
    StateVector::with_mode(x.to_vec(), ValidationMode::Closed, STATE_BAND)
}

fn validate_horizon(t_end: f64, dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "dt must be strictly positive and finite, got {dt}"
        )));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "t_end must be strictly positive and finite, got {t_end}"
        )));
    }
    Ok(())
}

fn validate_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be strictly positive and finite, got {tol}"
        )));
    }
    Ok(())
}
