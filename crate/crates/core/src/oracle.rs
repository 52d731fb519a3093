//! Brute-force reference implementations.
//!
//! These back the test suite and the hidden CLI self-check. They share
//! no numerical kernels with the production code paths they cross-check
//! (only scalar arithmetic), and they trade speed for transparency:
//! keep inputs small.

use crate::tensor::{DenseTensor, Matrix};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Result of a randomized oracle search.
#[derive(Debug, Clone)]
pub struct OracleReport {
    pub value: f64,
    pub argopt: Vec<f64>,
    pub starts_used: usize,
    pub iterations: usize,
}

/// `⟨T, x_1 ∘ ... ∘ x_d⟩` by plain summation over every entry, with no
/// reshaping or contraction chain.
pub fn oracle_multilinear(t: &DenseTensor, xs: &[Vec<f64>]) -> f64 {
    let d = t.order();
    assert_eq!(xs.len(), d);
    let shape = t.shape();
    let mut idx = vec![0usize; d];
    let mut sum = 0.0;
    for &v in t.data() {
        let mut p = v;
        for (k, &i) in idx.iter().enumerate() {
            p *= xs[k][i];
        }
        sum += p;
        for (k, i) in idx.iter_mut().enumerate() {
            *i += 1;
            if *i < shape[k] {
                break;
            }
            *i = 0;
        }
    }
    sum
}

/// Largest singular value via cyclic Jacobi rotations on the smaller
/// Gram matrix. Sweeps until the off-diagonal Frobenius norm falls
/// below `1e-13` relative to the Gram scale.
pub fn oracle_lambda_max(m: &Matrix) -> f64 {
    let (gram, n) = if m.rows() <= m.cols() {
        // G = M Mᵀ
        let n = m.rows();
        let mut g = vec![0.0; n * n];
        for c in 0..m.cols() {
            let col = &m.data()[c * n..(c + 1) * n];
            for p in 0..n {
                for q in 0..n {
                    g[p + q * n] += col[p] * col[q];
                }
            }
        }
        (g, n)
    } else {
        // G = Mᵀ M
        let n = m.cols();
        let rows = m.rows();
        let mut g = vec![0.0; n * n];
        for p in 0..n {
            let cp = &m.data()[p * rows..(p + 1) * rows];
            for q in 0..n {
                let cq = &m.data()[q * rows..(q + 1) * rows];
                g[p + q * n] = cp.iter().zip(cq).map(|(a, b)| a * b).sum();
            }
        }
        (g, n)
    };
    jacobi_max_eigenvalue(gram, n).max(0.0).sqrt()
}

/// Largest eigenvalue of a symmetric matrix by cyclic Jacobi sweeps.
fn jacobi_max_eigenvalue(mut a: Vec<f64>, n: usize) -> f64 {
    if n == 1 {
        return a[0];
    }
    let scale: f64 = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    if scale == 0.0 {
        return 0.0;
    }
    let tol = 1e-13 * scale;
    for _sweep in 0..100 {
        let off: f64 = {
            let mut s = 0.0;
            for p in 0..n {
                for q in 0..n {
                    if p != q {
                        s += a[p + q * n] * a[p + q * n];
                    }
                }
            }
            s.sqrt()
        };
        if off <= tol {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[p + q * n];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q + q * n] - a[p + p * n]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k + p * n];
                    let akq = a[k + q * n];
                    a[k + p * n] = c * akp - s * akq;
                    a[k + q * n] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p + k * n];
                    let aqk = a[q + k * n];
                    a[p + k * n] = c * apk - s * aqk;
                    a[q + k * n] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n)
        .map(|i| a[i + i * n])
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Searches `max ⟨a,x⟩ − ω‖x‖₁ over ‖x‖=1` with projected subgradient
/// ascent from `starts` random unit points, plus the closed-form
/// candidate (re-derived here from the shrinkage definition). Every
/// candidate is scored by direct evaluation of the objective.
pub fn oracle_sphere_l1(a: &[f64], omega: f64, starts: usize, seed: u64) -> OracleReport {
    assert!(omega >= 0.0);
    assert!(a.iter().any(|&v| v != 0.0), "zero input vector");
    let n = a.len();
    let iters = 400;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let eval = |x: &[f64]| -> f64 {
        let ip: f64 = a.iter().zip(x).map(|(u, v)| u * v).sum();
        let l1: f64 = x.iter().map(|v| v.abs()).sum();
        ip - omega * l1
    };

    // Closed-form candidate, written out locally.
    let mut cand: Vec<f64> = a
        .iter()
        .map(|&v| {
            if v.abs() > omega {
                v.signum() * (v.abs() - omega)
            } else {
                0.0
            }
        })
        .collect();
    let ns: f64 = cand.iter().map(|v| v * v).sum::<f64>().sqrt();
    if ns != 0.0 {
        for v in cand.iter_mut() {
            *v /= ns;
        }
    } else {
        let mut ihat = 0;
        for (i, v) in a.iter().enumerate() {
            if v.abs() > a[ihat].abs() {
                ihat = i;
            }
        }
        cand = vec![0.0; n];
        cand[ihat] = if a[ihat] < 0.0 { -1.0 } else { 1.0 };
    }
    let mut best_val = eval(&cand);
    let mut best_x = cand;

    for _ in 0..starts {
        let mut x: Vec<f64> = loop {
            let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let nv: f64 = v.iter().map(|u| u * u).sum::<f64>().sqrt();
            if nv > 1e-12 {
                break v.into_iter().map(|u| u / nv).collect();
            }
        };
        for t in 1..=iters {
            let step = 0.5 / (t as f64).sqrt();
            for (xi, &ai) in x.iter_mut().zip(a) {
                let sg = if *xi > 0.0 {
                    1.0
                } else if *xi < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                *xi += step * (ai - omega * sg);
            }
            let nv: f64 = x.iter().map(|u| u * u).sum::<f64>().sqrt();
            if nv > 1e-12 {
                for u in x.iter_mut() {
                    *u /= nv;
                }
            }
            let h = eval(&x);
            if h > best_val {
                best_val = h;
                best_x = x.clone();
            }
        }
    }

    OracleReport {
        value: best_val,
        argopt: best_x,
        starts_used: starts,
        iterations: iters,
    }
}

/// Minimum of `Σ(|x_i|−ω)₊²` on the unit sphere by enumerating the
/// stationary support sizes: a stationary point with `k` nonzeros has
/// entries of magnitude `1/√k`, giving the value `k(1/√k − ω)²`.
pub fn oracle_xi(n: usize, omega: f64) -> f64 {
    assert!(n >= 1);
    assert!(omega >= 0.0);
    let inv_sqrt_n = 1.0 / (n as f64).sqrt();
    if omega >= inv_sqrt_n {
        // the flat vector already clears the threshold everywhere
        return 0.0;
    }
    (1..=n)
        .map(|k| {
            let kf = k as f64;
            kf * (1.0 / kf.sqrt() - omega).powi(2)
        })
        .fold(f64::INFINITY, f64::min)
}
