//! The two sparse rank-1 approximation algorithms, their guaranteed
//! lower-bound coefficients, the regularized objective, and the
//! unfolding-based upper bound.
//!
//! Both algorithms run the same multilinear relaxation: unfold, extract
//! a unit candidate vector, sparsify it on the sphere, contract, and
//! reshape the contraction into the next unfolding. V1 extracts the
//! dominant singular pair of each unfolding; V2 takes the max-energy row
//! and one matrix-vector product, which keeps its cost linear in the
//! tensor size.

use crate::error::{Error, Result};
use crate::linalg::{self, leading_singular_pair, max_energy_row};
use crate::sparsify::sphere_l1_maximize;
use crate::tensor::{DenseTensor, Matrix};
use crate::vecmath;
use serde::Serialize;
use std::time::Instant;

/// Which extraction strategy an approximation run used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Dominant singular pair per unfolding.
    V1,
    /// Max-energy row per unfolding.
    V2,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Variant::V1 => write!(f, "v1"),
            Variant::V2 => write!(f, "v2"),
        }
    }
}

/// Per-mode regularization weights `ω_1..ω_d`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegParams {
    omegas: Vec<f64>,
}

impl RegParams {
    /// Nonnegative weights, one per mode.
    pub fn new(omegas: Vec<f64>) -> Result<Self> {
        if omegas.is_empty() {
            return Err(Error::InvalidArgument(
                "at least one regularization weight is required".into(),
            ));
        }
        if let Some(w) = omegas.iter().find(|w| w.is_nan() || **w < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "regularization weights must be nonnegative, got {w}"
            )));
        }
        Ok(Self { omegas })
    }

    /// The default rule `ω_j = 1/√n_j − 1e-5`, which keeps every weight
    /// strictly inside the range the lower-bound guarantees require.
    pub fn default_rule(shape: &[usize]) -> Self {
        Self {
            omegas: shape
                .iter()
                .map(|&n| (1.0 / (n as f64).sqrt() - 1e-5).max(0.0))
                .collect(),
        }
    }

    /// `ω_j = c/√n_j` for a fixed `c ≥ 0`.
    pub fn scaled_rule(shape: &[usize], c: f64) -> Result<Self> {
        if c.is_nan() || c < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "scale must be nonnegative, got {c}"
            )));
        }
        Ok(Self {
            omegas: shape.iter().map(|&n| c / (n as f64).sqrt()).collect(),
        })
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    /// Per-mode flags: `ω_j < 1/√n_j`.
    pub fn validity(&self, shape: &[usize]) -> Vec<bool> {
        self.omegas
            .iter()
            .zip(shape)
            .map(|(&w, &n)| w < 1.0 / (n as f64).sqrt())
            .collect()
    }

    /// True when every weight sits strictly below `1/√n_j`, the range
    /// required by both lower-bound guarantees.
    pub fn is_valid(&self, shape: &[usize]) -> bool {
        self.omegas.len() == shape.len() && self.validity(shape).iter().all(|&b| b)
    }

    fn check_shape(&self, shape: &[usize]) -> Result<()> {
        if self.omegas.len() != shape.len() {
            return Err(Error::DimMismatch(format!(
                "{} regularization weights for an order-{} tensor",
                self.omegas.len(),
                shape.len()
            )));
        }
        Ok(())
    }
}

/// A unit-factor rank-1 approximation with its metrics.
#[derive(Debug, Clone, Serialize)]
pub struct Rank1Solution {
    /// Unit vectors, one per mode.
    pub xs: Vec<Vec<f64>>,
    /// The multilinear value `⟨T, x_1 ∘ ... ∘ x_d⟩`.
    pub lambda: f64,
    /// `lambda − Σ_j ω_j ‖x_j‖₁`.
    pub objective: f64,
    /// Fraction of exactly-zero entries per factor.
    pub sparsity_ratios: Vec<f64>,
}

impl Rank1Solution {
    /// Assembles a solution's metrics from a tensor and unit factors.
    pub fn from_factors(t: &DenseTensor, xs: Vec<Vec<f64>>, params: &RegParams) -> Result<Self> {
        let lambda = t.multilinear_value(&xs)?;
        let objective = objective_from_lambda(lambda, &xs, params)?;
        let sparsity_ratios = xs
            .iter()
            .map(|x| x.iter().filter(|v| **v == 0.0).count() as f64 / x.len() as f64)
            .collect();
        Ok(Self {
            xs,
            lambda,
            objective,
            sparsity_ratios,
        })
    }
}

/// Knobs for one approximation run.
#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Divide by `‖T‖_∞` internally and rescale outputs; disable only to
    /// test scale equivariance.
    pub prescale: bool,
    pub power_tol: f64,
    pub power_max_iter: usize,
    /// Compute the unfolding upper bound for the report. Skipping it
    /// lets a driver share one bound across several runs on the same
    /// tensor.
    pub compute_upper_bound: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            prescale: true,
            power_tol: linalg::DEFAULT_POWER_TOL,
            power_max_iter: linalg::DEFAULT_POWER_MAX_ITER,
            compute_upper_bound: true,
        }
    }
}

/// Outcome of one approximation run.
#[derive(Debug, Clone, Serialize)]
pub struct AlgoReport {
    pub variant: Variant,
    pub solution: Rank1Solution,
    /// Guaranteed fraction of the reference value, when every `ω_j`
    /// is inside the valid range; `None` otherwise.
    pub bound_ratio: Option<f64>,
    /// The reference the guarantee multiplies: the dominant singular
    /// value of the first unfolding for V1, the Frobenius norm for V2.
    pub lower_bound_reference: f64,
    /// `min_j λ_max` over mode unfoldings, if requested.
    pub upper_bound: Option<f64>,
    /// Time spent in the approximation itself (excludes the upper bound).
    pub wall_time_ms: f64,
    /// False when some dominant-pair extraction hit its iteration cap.
    pub extraction_converged: bool,
}

/// V1 with default options.
pub fn algorithm_v1(t: &DenseTensor, params: &RegParams) -> Result<AlgoReport> {
    run_approx(t, params, Variant::V1, &RunOptions::default())
}

/// V2 with default options.
pub fn algorithm_v2(t: &DenseTensor, params: &RegParams) -> Result<AlgoReport> {
    run_approx(t, params, Variant::V2, &RunOptions::default())
}

/// Runs one approximation variant.
pub fn run_approx(
    t: &DenseTensor,
    params: &RegParams,
    variant: Variant,
    opts: &RunOptions,
) -> Result<AlgoReport> {
    let shape = t.shape().to_vec();
    let d = shape.len();
    if d < 3 {
        return Err(Error::InvalidArgument(format!(
            "approximation requires an order-3 or higher tensor, got order {d}"
        )));
    }
    params.check_shape(&shape)?;
    if t.is_zero() {
        return Err(Error::ZeroInput("approximation requires a nonzero tensor"));
    }

    let started = Instant::now();
    let scale = if opts.prescale { t.inf_norm() } else { 1.0 };
    let scaled: Vec<f64> = t.data().iter().map(|v| v / scale).collect();

    let total = scaled.len();
    let mut a = Matrix::new(shape[0], total / shape[0], scaled)?;
    let mut xs: Vec<Vec<f64>> = Vec::with_capacity(d);
    let mut sigma1 = 0.0;
    let mut extraction_converged = true;

    // contraction of the current unfolding against the sparsified factor
    let mut tail: Vec<f64> = Vec::new();
    for j in 0..d - 1 {
        if a.is_zero() {
            return Err(Error::Numeric(format!(
                "unfolding {} vanished during the relaxation",
                j + 1
            )));
        }
        let mut x_star = match variant {
            Variant::V1 => {
                let pair = leading_singular_pair(&a, opts.power_tol, opts.power_max_iter)?;
                extraction_converged &= pair.converged;
                if j == 0 {
                    sigma1 = pair.sigma;
                }
                pair.left
            }
            Variant::V2 => {
                let (_, row) = max_energy_row(&a)?;
                let z = a.mul_vec(&row)?;
                let nz = vecmath::norm(&z);
                if nz == 0.0 {
                    return Err(Error::Numeric(
                        "max-energy extraction produced a null vector".into(),
                    ));
                }
                z.into_iter().map(|v| v / nz).collect()
            }
        };
        orient_largest_entry_positive(&mut x_star);
        let sparsified = sphere_l1_maximize(&x_star, params.omegas[j])?.x_star;
        tail = a.tr_mul(&sparsified)?;
        xs.push(sparsified);
        if j < d - 2 {
            let rows = shape[j + 1];
            let cols = tail.len() / rows;
            a = Matrix::new(rows, cols, std::mem::take(&mut tail))?;
        }
    }

    // final mode: normalize the last contraction and sparsify it; the
    // alignment with the contraction is what keeps lambda positive
    let tail_norm = vecmath::norm(&tail);
    if tail_norm == 0.0 {
        return Err(Error::Numeric(
            "final contraction vanished during the relaxation".into(),
        ));
    }
    let x_star_last: Vec<f64> = tail.iter().map(|v| v / tail_norm).collect();
    let sparsified_last = sphere_l1_maximize(&x_star_last, params.omegas[d - 1])?.x_star;
    xs.push(sparsified_last);

    if xs.iter().any(|x| x.iter().all(|&v| v == 0.0)) {
        return Err(Error::Numeric("a sparsified factor vanished".into()));
    }

    let solution = Rank1Solution::from_factors(t, xs, params)?;
    let wall_time_ms = started.elapsed().as_secs_f64() * 1e3;

    let bound_ratio = if params.is_valid(&shape) {
        Some(match variant {
            Variant::V1 => bound_ratio_v1(&shape, params)?,
            Variant::V2 => bound_ratio_v2(&shape, params)?,
        })
    } else {
        None
    };
    let lower_bound_reference = match variant {
        Variant::V1 => sigma1 * scale,
        Variant::V2 => t.fro_norm(),
    };
    let upper_bound = if opts.compute_upper_bound {
        Some(upper_bound_vub_with(
            t,
            opts.power_tol,
            opts.power_max_iter,
        )?)
    } else {
        None
    };

    Ok(AlgoReport {
        variant,
        solution,
        bound_ratio,
        lower_bound_reference,
        upper_bound,
        wall_time_ms,
        extraction_converged,
    })
}

/// `⟨T, x_1 ∘ ... ∘ x_d⟩ − Σ_j ω_j ‖x_j‖₁`.
pub fn objective_value(t: &DenseTensor, xs: &[Vec<f64>], params: &RegParams) -> Result<f64> {
    let lambda = t.multilinear_value(xs)?;
    objective_from_lambda(lambda, xs, params)
}

fn objective_from_lambda(lambda: f64, xs: &[Vec<f64>], params: &RegParams) -> Result<f64> {
    if params.len() != xs.len() {
        return Err(Error::DimMismatch(format!(
            "{} regularization weights for {} factors",
            params.len(),
            xs.len()
        )));
    }
    let penalty: f64 = params
        .omegas()
        .iter()
        .zip(xs)
        .map(|(&w, x)| w * vecmath::l1_norm(x))
        .sum();
    Ok(lambda - penalty)
}

/// Guaranteed ratio for V1:
/// `∏_j (1 − ω_j√n_j + ω_j) / √(n_2 ··· n_{d−1})`.
pub fn bound_ratio_v1(shape: &[usize], params: &RegParams) -> Result<f64> {
    bound_ratio(shape, params, 1)
}

/// Guaranteed ratio for V2: the V1 ratio divided by `√n_1`
/// (denominator `√(n_1 ··· n_{d−1})`).
pub fn bound_ratio_v2(shape: &[usize], params: &RegParams) -> Result<f64> {
    bound_ratio(shape, params, 0)
}

fn bound_ratio(shape: &[usize], params: &RegParams, den_start: usize) -> Result<f64> {
    params.check_shape(shape)?;
    let d = shape.len();
    if d < 3 {
        return Err(Error::InvalidArgument(format!(
            "bound ratios require order >= 3, got {d}"
        )));
    }
    if !params.is_valid(shape) {
        return Err(Error::InvalidArgument(
            "bound ratios require omega_j < 1/sqrt(n_j) for every mode".into(),
        ));
    }
    let numerator: f64 = shape
        .iter()
        .zip(params.omegas())
        .map(|(&n, &w)| 1.0 - w * (n as f64).sqrt() + w)
        .product();
    let denominator: f64 = shape[den_start..d - 1]
        .iter()
        .map(|&n| n as f64)
        .product::<f64>()
        .sqrt();
    Ok(numerator / denominator)
}

/// `min_j λ_max(unfolding_j)`: an upper bound on the multilinear value
/// of any unit-factor rank-1 tensor.
pub fn upper_bound_vub(t: &DenseTensor) -> Result<f64> {
    upper_bound_vub_with(t, linalg::DEFAULT_POWER_TOL, linalg::DEFAULT_POWER_MAX_ITER)
}

pub fn upper_bound_vub_with(t: &DenseTensor, tol: f64, max_iter: usize) -> Result<f64> {
    if t.is_zero() {
        return Err(Error::ZeroInput("upper bound requires a nonzero tensor"));
    }
    let mut best = f64::INFINITY;
    for mode in 0..t.order() {
        let unfolding = t.mode_unfolding(mode)?;
        let sigma = leading_singular_pair(&unfolding, tol, max_iter)?.sigma;
        best = best.min(sigma);
    }
    Ok(best)
}

/// Flips the sign so the largest-magnitude entry is positive (ties to
/// the smallest index). Applied to every extracted candidate except the
/// final contraction, whose orientation carries the value's sign.
fn orient_largest_entry_positive(x: &mut [f64]) {
    let imax = vecmath::argmax_abs(x);
    if x[imax] < 0.0 {
        for v in x.iter_mut() {
            *v = -*v;
        }
    }
}
