//! Sphere-constrained ℓ1 sparsification.
//!
//! `soft_threshold` is the proximal map of `ω‖·‖₁`. `sphere_l1_maximize`
//! solves `max ⟨a,x⟩ − ω‖x‖₁ over ‖x‖ = 1` in closed form: normalize the
//! soft-thresholded vector when anything survives the threshold,
//! otherwise fall back to a signed standard basis vector at an argmax of
//! `|a|`. `xi_lower_bound` evaluates the flat-vector lower bound
//! `n(1/√n − ω)²` for the minimum of `Σ(|x_i|−ω)₊²` on the unit sphere,
//! and `xi_empirical` estimates that minimum by multi-start projected
//! gradient descent (test support).

use crate::error::{Error, Result};
use crate::seed::splitmix64;
use crate::vecmath;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Which case of the closed form produced the maximizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `‖S(a,ω)‖ ≠ 0`: the normalized soft threshold.
    SoftThresholdNormalized,
    /// `S(a,ω) = 0`: a signed standard basis vector.
    StandardBasisFallback,
}

/// Maximizer and optimum of `⟨a,x⟩ − ω‖x‖₁` on the unit sphere.
#[derive(Debug, Clone)]
pub struct SparsifyResult {
    /// Unit-norm maximizer.
    pub x_star: Vec<f64>,
    /// The maximum value. Negative only in the fallback branch.
    pub value: f64,
    pub branch: Branch,
}

/// Entrywise shrinkage `sgn(a_i)·max(|a_i| − ω, 0)`.
///
/// Entries with `|a_i|` exactly equal to `ω` map to exactly `+0.0`.
pub fn soft_threshold(a: &[f64], omega: f64) -> Result<Vec<f64>> {
    check_omega(omega)?;
    Ok(a.iter()
        .map(|&v| {
            if v.abs() > omega {
                v.signum() * (v.abs() - omega)
            } else {
                0.0
            }
        })
        .collect())
}

/// Closed-form solution of `max ⟨a,x⟩ − ω‖x‖₁ s.t. ‖x‖ = 1` for a ≠ 0.
///
/// The fallback tie-break picks the smallest argmax index, and the sign
/// of a zero entry counts as positive, so the result is deterministic.
pub fn sphere_l1_maximize(a: &[f64], omega: f64) -> Result<SparsifyResult> {
    check_omega(omega)?;
    if a.is_empty() {
        return Err(Error::InvalidArgument("input vector is empty".into()));
    }
    if a.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroInput(
            "sphere_l1_maximize requires a nonzero vector",
        ));
    }
    let s = soft_threshold(a, omega)?;
    let ns = vecmath::norm(&s);
    // Thresholded entries are exactly zero, so ns == 0.0 is an exact test
    // for an empty support.
    if ns != 0.0 {
        let x_star = s.iter().map(|v| v / ns).collect();
        Ok(SparsifyResult {
            x_star,
            value: ns,
            branch: Branch::SoftThresholdNormalized,
        })
    } else {
        let ihat = vecmath::argmax_abs(a);
        let sign = if a[ihat] < 0.0 { -1.0 } else { 1.0 };
        let mut x_star = vec![0.0; a.len()];
        x_star[ihat] = sign;
        Ok(SparsifyResult {
            x_star,
            value: a[ihat].abs() - omega,
            branch: Branch::StandardBasisFallback,
        })
    }
}

/// The flat-vector bound `n(1/√n − ω)²`, valid for `0 < ω < 1/√n`.
///
/// This lower-bounds (and, by the support-size analysis, equals) the
/// minimum of `Σ(|x_i|−ω)₊²` over the unit sphere.
pub fn xi_lower_bound(n: usize, omega: f64) -> Result<f64> {
    let inv_sqrt_n = check_xi_domain(n, omega)?;
    Ok(n as f64 * (inv_sqrt_n - omega).powi(2))
}

/// Multi-start projected-gradient estimate of the sphere minimum of
/// `f(x) = Σ(|x_i|−ω)₊²`. Deterministic for fixed `(n, ω, trials)`.
///
/// Test support: any feasible iterate upper-bounds the true minimum, so
/// the returned value can only sit above `xi_lower_bound` (up to
/// rounding), never below it.
pub fn xi_empirical(n: usize, omega: f64, trials: usize) -> Result<f64> {
    check_xi_domain(n, omega)?;
    if n == 1 {
        // the unit sphere in one dimension is {±1}
        return Ok((1.0 - omega) * (1.0 - omega));
    }
    let seed = splitmix64(0x5BA1_2E00 ^ (n as u64) ^ ((trials as u64) << 20) ^ omega.to_bits());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let iters = 400;
    let mut best = f64::INFINITY;
    for _ in 0..trials.max(1) {
        let mut x = random_unit(&mut rng, n);
        for t in 1..=iters {
            best = best.min(xi_objective(&x, omega));
            let step = 0.3 / (t as f64).sqrt();
            for xi in x.iter_mut() {
                let g = if xi.abs() > omega {
                    2.0 * xi.signum() * (xi.abs() - omega)
                } else {
                    0.0
                };
                *xi -= step * g;
            }
            let nr = vecmath::norm(&x);
            if nr < 1e-12 {
                x = random_unit(&mut rng, n);
            } else {
                vecmath::scale_in_place(&mut x, 1.0 / nr);
            }
        }
        best = best.min(xi_objective(&x, omega));
    }
    Ok(best)
}

fn xi_objective(x: &[f64], omega: f64) -> f64 {
    x.iter()
        .map(|v| {
            let t = v.abs() - omega;
            if t > 0.0 {
                t * t
            } else {
                0.0
            }
        })
        .sum()
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let nr = vecmath::norm(&v);
        if nr > 1e-12 {
            return v.into_iter().map(|x| x / nr).collect();
        }
    }
}

fn check_omega(omega: f64) -> Result<()> {
    if omega.is_nan() || omega < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "omega must be nonnegative, got {omega}"
        )));
    }
    Ok(())
}

fn check_xi_domain(n: usize, omega: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let inv_sqrt_n = 1.0 / (n as f64).sqrt();
    if !(omega > 0.0 && omega < inv_sqrt_n) {
        return Err(Error::InvalidArgument(format!(
            "omega must lie in (0, 1/sqrt(n)) = (0, {inv_sqrt_n}), got {omega}"
        )));
    }
    Ok(inv_sqrt_n)
}
