//! Independent brute-force verifiers backing the test suite.
//!
//! Nothing here shares code paths with the methods it checks: Jacobians are
//! re-derived by central differences of the residual, and equilibrium
//! uniqueness is probed by Newton multistart from many random points of the
//! occupancy slice. The samplers draw from a ChaCha stream through a local
//! `u64 → (0,1)` mapping, so every reported number is reproducible from the
//! recorded seed alone — independent of RNG-library distribution details.

use crate::error::{Error, Result};
use crate::homotopy::{newton_correct, TracerOptions};
use crate::model::{self, ParamVector, StateVector};
use nalgebra::DMatrix;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::Serialize;

/// Converged multistart points closer than this are considered the same
/// equilibrium (an order of magnitude above the corrector tolerance).
pub const CLUSTER_RADIUS: f64 = 1e-6;

/// Outcome of a multistart uniqueness probe.
#[derive(Debug, Clone, Serialize)]
pub struct MultistartReport {
    pub seeds_tried: usize,
    pub converged: usize,
    /// One representative per distinct limit found; a single entry is the
    /// uniqueness witness.
    pub cluster_centers: Vec<StateVector>,
    /// Largest distance from a converged point to its cluster's center.
    pub max_cluster_radius: f64,
    /// The RNG seed, recorded so the report is regenerable.
    pub rng_seed: u64,
}

/// Which variable block a finite-difference Jacobian differentiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JacobianWrt {
    Lambda,
    E,
}

/// Runs Newton from `num_seeds` random points of the slice `Σx = s` and
/// clusters the limits. Newton failures are counted, not raised; a report
/// with one cluster and a healthy `converged` count certifies a unique
/// slice equilibrium for `lam`.
pub fn newton_multistart(
    lam: &ParamVector,
    s: f64,
    num_seeds: usize,
    rng_seed: u64,
) -> Result<MultistartReport> {
    let n = lam.len();
    if !(s > 0.0 && s < n as f64) {
        return Err(Error::InvalidFirstIntegral { s, n });
    }
    if num_seeds == 0 {
        return Err(Error::InvalidArgument(
            "multistart needs at least one seed".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    // A generous iteration budget: seeds land far from the equilibrium, and
    // this is an oracle, not the production corrector.
    let opts = TracerOptions {
        max_corrector_iters: 25,
        ..TracerOptions::default()
    };

    let mut converged = 0usize;
    let mut centers: Vec<StateVector> = Vec::new();
    let mut max_radius = 0.0_f64;
    for _ in 0..num_seeds {
        let seed_point = StateVector::new(sample_slice_point(&mut rng, n, s)?)?;
        // Failures here include out-of-cube limits: the corrected state is
        // re-validated against the cube band on the way out.
        let Ok(limit) = newton_correct(lam, s, &seed_point, &opts) else {
            continue;
        };
        converged += 1;
        let assigned = centers.iter().find_map(|c| {
            let d = distance(c.as_slice(), limit.as_slice());
            (d <= CLUSTER_RADIUS).then_some(d)
        });
        match assigned {
            Some(d) => max_radius = max_radius.max(d),
            None => centers.push(limit),
        }
    }
    Ok(MultistartReport {
        seeds_tried: num_seeds,
        converged,
        cluster_centers: centers,
        max_cluster_radius: max_radius,
        rng_seed,
    })
}

/// Central-difference Jacobian of the equilibrium residual, `(n−1) × n`.
/// Works on raw values (the residual is polynomial, defined beyond the
/// cube), so perturbations near the boundary need no special casing.
pub fn fd_jacobian(
    which: JacobianWrt,
    lam: &ParamVector,
    e: &StateVector,
    h: f64,
) -> Result<DMatrix<f64>> {
    model::check_dims(lam, e)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "finite-difference step must be strictly positive and finite, got {h}"
        )));
    }
    let n = e.len();
    let mut m = DMatrix::zeros(n - 1, n);
    let mut plus = vec![0.0; n - 1];
    let mut minus = vec![0.0; n - 1];
    let (mut lam_v, mut e_v) = (lam.to_vec(), e.to_vec());
    let set = |lam_v: &mut [f64], e_v: &mut [f64], j: usize, value: f64| match which {
        JacobianWrt::Lambda => lam_v[j] = value,
        JacobianWrt::E => e_v[j] = value,
    };
    for j in 0..n {
        let base = match which {
            JacobianWrt::Lambda => lam_v[j],
            JacobianWrt::E => e_v[j],
        };
        set(&mut lam_v, &mut e_v, j, base + h);
        model::residual_into(&lam_v, &e_v, &mut plus);
        set(&mut lam_v, &mut e_v, j, base - h);
        model::residual_into(&lam_v, &e_v, &mut minus);
        set(&mut lam_v, &mut e_v, j, base);
        for i in 0..n - 1 {
            m[(i, j)] = (plus[i] - minus[i]) / (2.0 * h);
        }
    }
    Ok(m)
}

/// A uniform draw from the open interval (0, 1), built directly on the
/// generator's `u64` output so sampled values never depend on RNG-library
/// distribution code.
pub fn unit_open(rng: &mut impl RngCore) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Log-uniform draw from `[lo, hi]`, `0 < lo < hi`.
pub fn log_uniform(rng: &mut impl RngCore, lo: f64, hi: f64) -> f64 {
    assert!(
        0.0 < lo && lo < hi && hi.is_finite(),
        "bad range [{lo}, {hi}]"
    );
    (lo.ln() + unit_open(rng) * (hi / lo).ln()).exp()
}

/// Uniform draw from the slice `{x ∈ (0,1)^n : Σx = s}`: a Dirichlet-style
/// simplex sample rescaled to the slice (mirrored through `x ↦ 1 − x` for
/// `s > n/2`), rejecting draws that leave the open cube.
pub fn sample_slice_point(rng: &mut impl RngCore, n: usize, s: f64) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::TooShort {
            required: 2,
            got: n,
        });
    }
    if !(s > 0.0 && s < n as f64) {
        return Err(Error::InvalidFirstIntegral { s, n });
    }
    let mirror = s > n as f64 / 2.0;
    let scale = if mirror { n as f64 - s } else { s };
    for _ in 0..10_000 {
        let g: Vec<f64> = (0..n).map(|_| -unit_open(rng).ln()).collect();
        let total: f64 = g.iter().sum();
        let mut x: Vec<f64> = g.iter().map(|v| scale * v / total).collect();
        if mirror {
            for v in &mut x {
                *v = 1.0 - *v;
            }
        }
        if x.iter().all(|&v| v > 0.0 && v < 1.0) {
            return Ok(x);
        }
    }
    Err(Error::SamplingFailed(format!(
        "no slice point found in 10000 draws (n = {n}, s = {s})"
    )))
}

/// Log-uniform rate vector in `[lo, hi]^n`.
pub fn random_params(rng: &mut impl RngCore, n: usize, lo: f64, hi: f64) -> Result<ParamVector> {
    ParamVector::new((0..n).map(|_| log_uniform(rng, lo, hi)).collect())
}

/// Uniform state in `[lo, hi]^n ⊂ (0, 1)^n`.
pub fn random_interior_state(
    rng: &mut impl RngCore,
    n: usize,
    lo: f64,
    hi: f64,
) -> Result<StateVector> {
    StateVector::new(
        (0..n)
            .map(|_| lo + unit_open(rng) * (hi - lo))
            .collect::<Vec<_>>(),
    )
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
