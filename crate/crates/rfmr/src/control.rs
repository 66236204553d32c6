//! Open-loop steering to a chosen equilibrium.
//!
//! Because total occupancy is conserved, the reachable set from `x0` under
//! *any* rate schedule is the slice `Σx = Σx0` intersected with the cube —
//! [`reachable`] is just that membership test. Within the slice, steering is
//! embarrassingly direct: pick any rate vector on the fiber ray of the
//! target ([`crate::fibers::fiber_direction`]) and hold it constant; the
//! flow then converges to the target on its own. [`plan`] packages that
//! choice, with the scale factor selecting the representative on the ray
//! (larger scale, faster transient, same limit).

use crate::error::{Error, Result};
use crate::fibers::{fiber_direction, Fiber};
use crate::model::{equilibrium_residual, first_integral, ParamVector, StateVector};
use serde::Serialize;

/// Default tolerance on the first-integral match: the slice is invariant,
/// so any real mismatch is unrecoverable in open loop.
pub const DEFAULT_REACH_TOL: f64 = 1e-9;

/// The canonical ray representative: `√n` maps the symmetric target
/// `(0.5, …, 0.5)` to unit rates.
pub fn default_scale(n: usize) -> f64 {
    (n as f64).sqrt()
}

/// A constant-rate plan steering the flow to `target` from anywhere on its
/// slice.
#[derive(Debug, Clone, Serialize)]
pub struct ControlPlan {
    pub target: StateVector,
    /// `scale · ω_target`: a point on the target's fiber ray.
    pub lam: ParamVector,
    pub scale: f64,
}

/// Whether `target` can be reached from `x0`: they must share the conserved
/// total occupancy to within `tol` (the cube membership is carried by the
/// types).
pub fn reachable(x0: &StateVector, target: &StateVector, tol: f64) -> Result<bool> {
    if x0.len() != target.len() {
        return Err(Error::DimensionMismatch {
            expected: x0.len(),
            got: target.len(),
        });
    }
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "reachability tolerance must be nonnegative and finite, got {tol}"
        )));
    }
    Ok((first_integral(x0) - first_integral(target)).abs() <= tol)
}

/// Builds the constant-rate plan for a strictly interior `target`. The two
/// corner equilibria are rejected: they are fixed by *every* rate vector,
/// so no choice of rates selects them dynamically.
pub fn plan(target: &StateVector, scale: f64) -> Result<ControlPlan> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "plan scale must be strictly positive and finite, got {scale}"
        )));
    }
    let dir = match fiber_direction(target)? {
        Fiber::Ray(dir) => dir,
        Fiber::AllParameters => return Err(Error::BoundaryTarget),
    };
    let lam = dir.omega().scaled(scale)?;
    debug_assert!(
        equilibrium_residual(&lam, target)?.norm_inf() <= 1e-10,
        "planned rates must fix the target"
    );
    Ok(ControlPlan {
        target: target.clone(),
        lam,
        scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fibers::fibers_coincide;
    use crate::homotopy::{equilibrium_at, TracerOptions};
    use crate::simulate::converge_to_equilibrium;
    use approx::assert_abs_diff_eq;

    fn sv(v: &[f64]) -> StateVector {
        StateVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn reachability_is_the_first_integral_test() {
        let x0 = sv(&[0.3, 0.3, 0.4]);
        assert!(reachable(&x0, &sv(&[0.5, 0.25, 0.25]), 1e-9).unwrap());
        assert!(!reachable(&x0, &sv(&[0.5, 0.5, 0.5]), 1e-9).unwrap());
        assert!(reachable(&x0, &sv(&[0.5, 0.5, 0.5]), 0.6).unwrap());
        assert!(reachable(&x0, &sv(&[0.1, 0.2]), 1e-9).is_err());
        assert!(reachable(&x0, &x0, -1.0).is_err());
    }

    #[test]
    fn traced_equilibria_are_reachable_from_their_slice() {
        let lam = ParamVector::new(vec![0.4, 2.7, 1.3, 0.8]).unwrap();
        let x0 = sv(&[0.7, 0.2, 0.45, 0.15]);
        let s = first_integral(&x0);
        let target = equilibrium_at(&lam, s, &TracerOptions::default()).unwrap();
        assert!(reachable(&x0, &target, 1e-9).unwrap());
    }

    #[test]
    fn symmetric_target_plans_unit_rates() {
        for n in [3usize, 6] {
            let target = StateVector::uniform(n, 0.5).unwrap();
            let plan = plan(&target, default_scale(n)).unwrap();
            for &l in plan.lam.as_slice() {
                assert_abs_diff_eq!(l, 1.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn plans_land_on_the_fiber_of_known_rates() {
        // The target is the traced equilibrium of these rates, so the plan's
        // rates must be collinear with them.
        let ref_lam = ParamVector::new(vec![1.39328599, 8.30098374, 3.98355604]).unwrap();
        let target = sv(&[0.53112814, 0.1203633, 0.34850856]);
        let p = plan(&target, ref_lam.norm()).unwrap();
        assert!(fibers_coincide(&p.lam, &ref_lam, 1e-6).unwrap());
    }

    #[test]
    fn plan_rates_fix_the_target() {
        let targets = [
            vec![0.21, 0.73, 0.35],
            vec![0.5, 0.12, 0.81, 0.33, 0.6],
            vec![0.15, 0.85, 0.4, 0.62, 0.29, 0.5, 0.71],
        ];
        for t in targets {
            let target = sv(&t);
            for scale in [0.5, 1.0, 4.0] {
                let p = plan(&target, scale).unwrap();
                let r = equilibrium_residual(&p.lam, &target).unwrap();
                assert!(r.norm_inf() <= 1e-10, "residual {:e}", r.norm_inf());
            }
        }
    }

    #[test]
    fn different_scales_share_a_fiber_and_a_limit() {
        let target = sv(&[0.3, 0.45, 0.6]);
        let slow = plan(&target, 1.0).unwrap();
        let fast = plan(&target, 5.0).unwrap();
        assert!(fibers_coincide(&slow.lam, &fast.lam, 1e-12).unwrap());

        let x0 = sv(&[0.45, 0.45, 0.45]); // same total occupancy 1.35
        for p in [&slow, &fast] {
            let limit = converge_to_equilibrium(&p.lam, &x0, 1e-9, 2000.0).unwrap();
            for i in 0..3 {
                assert_abs_diff_eq!(limit[i], target[i], epsilon = 1e-4);
            }
        }
    }

    #[test]
    fn boundary_targets_are_rejected() {
        let corner = StateVector::uniform(3, 0.0).unwrap();
        assert!(matches!(plan(&corner, 1.0), Err(Error::BoundaryTarget)));
        let full = StateVector::uniform(3, 1.0).unwrap();
        assert!(matches!(plan(&full, 1.0), Err(Error::BoundaryTarget)));
        let mixed = sv(&[0.0, 0.4, 0.6]);
        assert!(matches!(plan(&mixed, 1.0), Err(Error::MixedBoundaryState)));
    }

    #[test]
    fn bad_scales_are_rejected() {
        let target = sv(&[0.3, 0.4, 0.3]);
        assert!(plan(&target, 0.0).is_err());
        assert!(plan(&target, -2.0).is_err());
        assert!(plan(&target, f64::INFINITY).is_err());
    }
}
