//! Alternating maximization refiner for the regularized objective.
//!
//! Each block update solves the sphere-constrained subproblem in one
//! factor exactly (the contraction of the tensor against the other
//! factors is the linear term), so the objective never decreases. A
//! sweep updates factors in mode order 1..d; the solve stops once the
//! largest per-mode movement in a sweep drops below `stop_tol`.

use crate::algo::{run_approx, Rank1Solution, RegParams, RunOptions, Variant};
use crate::error::{Error, Result};
use crate::sparsify::sphere_l1_maximize;
use crate::tensor::DenseTensor;
use crate::vecmath;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

/// Where the starting factors come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AmmInit {
    FromV1,
    FromV2,
    Random { seed: u64 },
}

/// Solver configuration.
#[derive(Debug, Clone)]
pub struct AmmConfig {
    /// Sweep-level movement threshold (max over modes of the Euclidean
    /// distance between consecutive block vectors).
    pub stop_tol: f64,
    pub max_sweeps: usize,
    pub init: AmmInit,
    /// Optimize on the ∞-norm-normalized tensor, like the
    /// approximation algorithms do. Final metrics are always reported
    /// against the original tensor.
    pub prescale: bool,
}

impl AmmConfig {
    pub fn new(init: AmmInit) -> Self {
        Self {
            stop_tol: 1e-6,
            max_sweeps: 200,
            init,
            prescale: true,
        }
    }
}

/// Solve trace and final solution.
#[derive(Debug, Clone, Serialize)]
pub struct AmmTrace {
    /// Objective of the solved (prescaled) problem: entry 0 is the
    /// initial point, then one entry per completed sweep. Nondecreasing
    /// up to rounding.
    pub objective_per_sweep: Vec<f64>,
    pub sweeps: usize,
    pub converged: bool,
    /// A block contraction vanished and the solve stopped early with
    /// the last iterate.
    pub degenerate: bool,
    /// Metrics recomputed against the original tensor.
    pub final_solution: Rank1Solution,
}

/// Exact maximizer of the objective in block `j`, all other factors
/// fixed: `sphere_l1_maximize` applied to the contraction against the
/// other factors. Errors if that contraction is zero.
pub fn amm_block_update(
    t: &DenseTensor,
    xs: &[Vec<f64>],
    j: usize,
    omega_j: f64,
) -> Result<Vec<f64>> {
    let a = t.contract_all_but(xs, j)?;
    if a.iter().all(|&v| v == 0.0) {
        return Err(Error::Numeric(format!(
            "block {} contraction is zero; the subproblem is degenerate",
            j + 1
        )));
    }
    Ok(sphere_l1_maximize(&a, omega_j)?.x_star)
}

/// Unit starting factors: per mode, a normalized standard normal draw
/// pushed through the sphere sparsifier.
pub fn random_init(shape: &[usize], params: &RegParams, seed: u64) -> Result<Vec<Vec<f64>>> {
    if params.len() != shape.len() {
        return Err(Error::DimMismatch(format!(
            "{} regularization weights for an order-{} tensor",
            params.len(),
            shape.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(shape.len());
    for (j, &n) in shape.iter().enumerate() {
        let x: Vec<f64> = loop {
            let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let nv = vecmath::norm(&v);
            if nv > 0.0 {
                break v.into_iter().map(|u| u / nv).collect();
            }
        };
        out.push(sphere_l1_maximize(&x, params.omegas()[j])?.x_star);
    }
    Ok(out)
}

/// Runs alternating maximization from the configured start.
pub fn amm_solve(t: &DenseTensor, params: &RegParams, config: &AmmConfig) -> Result<AmmTrace> {
    let shape = t.shape().to_vec();
    if params.len() != shape.len() {
        return Err(Error::DimMismatch(format!(
            "{} regularization weights for an order-{} tensor",
            params.len(),
            shape.len()
        )));
    }
    if t.is_zero() {
        return Err(Error::ZeroInput(
            "alternating maximization requires a nonzero tensor",
        ));
    }
    if config.stop_tol.is_nan() || config.stop_tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "stop_tol must be positive, got {}",
            config.stop_tol
        )));
    }

    let run_opts = RunOptions {
        compute_upper_bound: false,
        prescale: config.prescale,
        ..RunOptions::default()
    };
    let mut xs: Vec<Vec<f64>> = match config.init {
        AmmInit::FromV1 => run_approx(t, params, Variant::V1, &run_opts)?.solution.xs,
        AmmInit::FromV2 => run_approx(t, params, Variant::V2, &run_opts)?.solution.xs,
        AmmInit::Random { seed } => random_init(&shape, params, seed)?,
    };

    let scale = if config.prescale { t.inf_norm() } else { 1.0 };
    let working = if config.prescale {
        t.scaled(1.0 / scale)
    } else {
        t.clone()
    };

    let objective =
        |xs: &[Vec<f64>]| -> Result<f64> { crate::algo::objective_value(&working, xs, params) };

    let mut trace = vec![objective(&xs)?];
    let mut converged = false;
    let mut degenerate = false;
    let mut sweeps = 0;

    'outer: for _ in 0..config.max_sweeps {
        let mut max_move = 0.0f64;
        for j in 0..shape.len() {
            let updated = match amm_block_update(&working, &xs, j, params.omegas()[j]) {
                Ok(x) => x,
                Err(Error::Numeric(_)) => {
                    degenerate = true;
                    break 'outer;
                }
                Err(e) => return Err(e),
            };
            max_move = max_move.max(vecmath::distance(&updated, &xs[j]));
            xs[j] = updated;
        }
        sweeps += 1;
        trace.push(objective(&xs)?);
        if max_move < config.stop_tol {
            converged = true;
            break;
        }
    }

    let final_solution = Rank1Solution::from_factors(t, xs, params)?;
    Ok(AmmTrace {
        objective_per_sweep: trace,
        sweeps,
        converged,
        degenerate,
        final_solution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn unit(v: Vec<f64>) -> Vec<f64> {
        let n = vecmath::norm(&v);
        v.into_iter().map(|x| x / n).collect()
    }

    fn random_tensor(shape: Vec<usize>, seed: u64) -> DenseTensor {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n: usize = shape.iter().product();
        let data = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        DenseTensor::new(shape, data).unwrap()
    }

    #[test]
    fn fixed_point_moves_nothing() {
        let u = unit(vec![1.0, 0.0, 2.0]);
        let v = unit(vec![0.0, 1.0, 0.0]);
        let w = unit(vec![1.0, -1.0, 0.0, 0.5]);
        let t = DenseTensor::rank_one(&[u.clone(), v.clone(), w.clone()])
            .unwrap()
            .scaled(2.0);

        // start exactly at the factors with no regularization: every
        // block update returns its own input
        let mut cur = vec![u, v, w];
        let mut moved = 0.0f64;
        for j in 0..3 {
            let nx = amm_block_update(&t, &cur, j, 0.0).unwrap();
            moved = moved.max(vecmath::distance(&nx, &cur[j]));
            cur[j] = nx;
        }
        assert!(moved < 1e-12, "moved {moved}");
    }

    #[test]
    fn block_update_recovers_missing_factor() {
        let u = unit(vec![1.0, 2.0]);
        let v = unit(vec![-1.0, 0.5, 0.25]);
        let w = unit(vec![0.0, 1.0]);
        let t = DenseTensor::rank_one(&[u.clone(), v.clone(), w.clone()]).unwrap();
        let xs = vec![u, v, vec![1.0, 0.0]];
        let got = amm_block_update(&t, &xs, 2, 0.0).unwrap();
        for (g, e) in got.iter().zip(&w) {
            assert_abs_diff_eq!(*g, *e, epsilon = 1e-12);
        }
    }

    #[test]
    fn block_update_fallback_for_large_omega() {
        let t = random_tensor(vec![3, 3, 3], 1);
        let xs = vec![
            unit(vec![1.0, 1.0, 1.0]),
            unit(vec![1.0, -1.0, 0.5]),
            unit(vec![0.3, 0.3, 0.9]),
        ];
        let a = t.contract_all_but(&xs, 1).unwrap();
        let huge = a.iter().fold(0.0f64, |m, v| m.max(v.abs())) + 1.0;
        let x = amm_block_update(&t, &xs, 1, huge).unwrap();
        let nnz = x.iter().filter(|v| **v != 0.0).count();
        assert_eq!(nnz, 1);
        assert_abs_diff_eq!(vecmath::norm(&x), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn block_update_never_decreases_objective() {
        for seed in 0..10 {
            let t = random_tensor(vec![4, 3, 5], 100 + seed);
            let params = RegParams::default_rule(t.shape());
            let xs = random_init(t.shape(), &params, seed).unwrap();
            let before = crate::algo::objective_value(&t, &xs, &params).unwrap();
            for j in 0..3 {
                let mut trial = xs.clone();
                trial[j] = amm_block_update(&t, &xs, j, params.omegas()[j]).unwrap();
                let after = crate::algo::objective_value(&t, &trial, &params).unwrap();
                assert!(after >= before - 1e-12, "block {j}: {after} < {before}");
            }
        }
    }

    #[test]
    fn trace_is_monotone_and_converges() {
        for seed in 0..5 {
            let t = random_tensor(vec![5, 4, 6], 200 + seed);
            let params = RegParams::default_rule(t.shape());
            let config = AmmConfig::new(AmmInit::Random { seed });
            let trace = amm_solve(&t, &params, &config).unwrap();
            assert!(trace.converged);
            assert!(!trace.degenerate);
            for w in trace.objective_per_sweep.windows(2) {
                assert!(w[1] >= w[0] - 1e-12, "objective decreased: {w:?}");
            }
            assert_eq!(trace.objective_per_sweep.len(), trace.sweeps + 1);
        }
    }

    #[test]
    fn converged_solve_is_a_fixed_point() {
        let t = random_tensor(vec![4, 4, 4], 300);
        let params = RegParams::default_rule(t.shape());
        let config = AmmConfig::new(AmmInit::FromV1);
        let trace = amm_solve(&t, &params, &config).unwrap();
        assert!(trace.converged);

        let scale = t.inf_norm();
        let working = t.scaled(1.0 / scale);
        let mut moved = 0.0f64;
        let mut xs = trace.final_solution.xs.clone();
        for j in 0..3 {
            let nx = amm_block_update(&working, &xs, j, params.omegas()[j]).unwrap();
            moved = moved.max(vecmath::distance(&nx, &xs[j]));
            xs[j] = nx;
        }
        assert!(moved < config.stop_tol, "moved {moved}");
    }

    #[test]
    fn random_init_is_unit_norm_sparse_and_deterministic() {
        let shape = [50usize, 50, 50, 50];
        let params = RegParams::default_rule(&shape);
        let a = random_init(&shape, &params, 77).unwrap();
        let b = random_init(&shape, &params, 77).unwrap();
        assert_eq!(a, b);
        for x in &a {
            assert_abs_diff_eq!(vecmath::norm(x), 1.0, epsilon = 1e-12);
        }
        // thresholding at ~1/sqrt(n) keeps roughly a third of the entries
        let mut nnz_ratio_sum = 0.0;
        let mut vectors = 0usize;
        for seed in 0..100 {
            for x in random_init(&shape, &params, seed).unwrap() {
                nnz_ratio_sum += x.iter().filter(|v| **v != 0.0).count() as f64 / x.len() as f64;
                vectors += 1;
            }
        }
        let mean_nnz_ratio = nnz_ratio_sum / vectors as f64;
        assert!(mean_nnz_ratio < 1.0, "mean nnz ratio {mean_nnz_ratio}");
        assert!(mean_nnz_ratio > 0.0);
    }

    #[test]
    fn init_from_v1_starts_at_least_as_high() {
        let t = random_tensor(vec![6, 5, 4], 400);
        let params = RegParams::default_rule(t.shape());
        let from_v1 = amm_solve(&t, &params, &AmmConfig::new(AmmInit::FromV1)).unwrap();
        let random = amm_solve(&t, &params, &AmmConfig::new(AmmInit::Random { seed: 5 })).unwrap();
        assert!(
            from_v1.objective_per_sweep[0] >= random.objective_per_sweep[0] - 1e-9,
            "v1 init should not start below a random start on average-sized problems"
        );
    }

    #[test]
    fn zero_tensor_errors() {
        let t = DenseTensor::new(vec![2, 2, 2], vec![0.0; 8]).unwrap();
        let params = RegParams::new(vec![0.1; 3]).unwrap();
        assert!(amm_solve(&t, &params, &AmmConfig::new(AmmInit::FromV2)).is_err());
    }
}
