//! Dense tensors and matrices with column-major storage.
//!
//! All buffers are column-major (first index fastest), so reshaping is a
//! pure relabeling of the linear buffer with Matlab `reshape` semantics:
//! no element moves and no value changes. Mode indices are 0-based in
//! this API; file formats and rendered output number modes from 1.

use crate::error::{Error, Result};
use crate::vecmath;

/// A dense real tensor of order `d ≥ 1`.
///
/// Immutable after construction; cheap to share across threads by
/// reference.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl DenseTensor {
    /// Builds a tensor from its shape and column-major data.
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if shape.is_empty() {
            return Err(Error::InvalidArgument(
                "tensor order must be at least 1".into(),
            ));
        }
        if shape.contains(&0) {
            return Err(Error::InvalidArgument(format!(
                "every mode size must be positive, got {shape:?}"
            )));
        }
        let expected: usize = shape.iter().product();
        if data.len() != expected {
            return Err(Error::DimMismatch(format!(
                "shape {shape:?} requires {expected} entries, got {}",
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    /// The rank-1 tensor `x_1 ∘ x_2 ∘ ... ∘ x_d`.
    pub fn rank_one(factors: &[Vec<f64>]) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidArgument(
                "rank_one needs at least one factor".into(),
            ));
        }
        if factors.iter().any(|f| f.is_empty()) {
            return Err(Error::InvalidArgument(
                "rank_one factors must be nonempty".into(),
            ));
        }
        let mut data = vec![1.0];
        for f in factors {
            let len = data.len();
            let mut next = vec![0.0; len * f.len()];
            for (i, &fi) in f.iter().enumerate() {
                for (r, &v) in data.iter().enumerate() {
                    next[r + i * len] = v * fi;
                }
            }
            data = next;
        }
        let shape = factors.iter().map(|f| f.len()).collect();
        Self::new(shape, data)
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn num_elements(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Column-major linear index of a multi-index.
    pub fn linear_index(shape: &[usize], idx: &[usize]) -> usize {
        debug_assert_eq!(shape.len(), idx.len());
        let mut lin = 0;
        let mut stride = 1;
        for (k, &i) in idx.iter().enumerate() {
            debug_assert!(i < shape[k]);
            lin += i * stride;
            stride *= shape[k];
        }
        lin
    }

    /// Entry at a multi-index (0-based).
    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[Self::linear_index(&self.shape, idx)]
    }

    pub fn fro_norm(&self) -> f64 {
        vecmath::norm(&self.data)
    }

    /// Largest entry magnitude.
    pub fn inf_norm(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    /// A copy with every entry multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    /// Relabels the buffer as a `rows × cols` matrix. The element order
    /// is untouched, so values are bit-identical to the tensor's.
    pub fn reshape_to_matrix(&self, rows: usize, cols: usize) -> Result<Matrix> {
        if rows * cols != self.data.len() {
            return Err(Error::DimMismatch(format!(
                "cannot reshape {} entries to {rows}x{cols}",
                self.data.len()
            )));
        }
        Matrix::new(rows, cols, self.data.clone())
    }

    /// Mode-`mode` unfolding (0-based): an `n_mode × ∏_{k≠mode} n_k`
    /// matrix whose row `i` collects every entry with `mode`-th index
    /// `i`; the remaining indices run in column-major order.
    pub fn mode_unfolding(&self, mode: usize) -> Result<Matrix> {
        let d = self.order();
        if mode >= d {
            return Err(Error::InvalidArgument(format!(
                "mode {mode} out of range for an order-{d} tensor"
            )));
        }
        let n_mode = self.shape[mode];
        let rest = self.data.len() / n_mode;
        let mut out = vec![0.0; self.data.len()];
        let mut idx = vec![0usize; d];
        for &v in &self.data {
            let mut col = 0;
            let mut stride = 1;
            for (k, &i) in idx.iter().enumerate() {
                if k != mode {
                    col += i * stride;
                    stride *= self.shape[k];
                }
            }
            out[idx[mode] + col * n_mode] = v;
            for (k, i) in idx.iter_mut().enumerate() {
                *i += 1;
                if *i < self.shape[k] {
                    break;
                }
                *i = 0;
            }
        }
        Matrix::new(n_mode, rest, out)
    }

    /// The multilinear form `⟨T, x_1 ∘ ... ∘ x_d⟩`.
    ///
    /// Contracts the trailing mode first, which is a different
    /// accumulation order from the forward reshape chain used by the
    /// approximation algorithms; the two agree up to rounding.
    pub fn multilinear_value(&self, xs: &[Vec<f64>]) -> Result<f64> {
        self.check_factors(xs)?;
        let mut cur: Option<Vec<f64>> = None;
        for j in (0..self.order()).rev() {
            let src: &[f64] = cur.as_deref().unwrap_or(&self.data);
            cur = Some(contract_last(src, self.shape[j], &xs[j]));
        }
        Ok(cur.expect("order >= 1")[0])
    }

    /// Contracts every mode except `skip` against the matching vector,
    /// returning a vector of length `n_skip`. Entries of `xs[skip]` are
    /// ignored.
    pub fn contract_all_but(&self, xs: &[Vec<f64>], skip: usize) -> Result<Vec<f64>> {
        self.check_factors(xs)?;
        let d = self.order();
        if skip >= d {
            return Err(Error::InvalidArgument(format!(
                "mode {skip} out of range for an order-{d} tensor"
            )));
        }
        let mut cur: Option<Vec<f64>> = None;
        for j in (skip + 1..d).rev() {
            let src: &[f64] = cur.as_deref().unwrap_or(&self.data);
            cur = Some(contract_last(src, self.shape[j], &xs[j]));
        }
        for (&n_first, x) in self.shape[..skip].iter().zip(&xs[..skip]) {
            let src: &[f64] = cur.as_deref().unwrap_or(&self.data);
            cur = Some(contract_first(src, n_first, x));
        }
        Ok(cur.unwrap_or_else(|| self.data.clone()))
    }

    fn check_factors(&self, xs: &[Vec<f64>]) -> Result<()> {
        if xs.len() != self.order() {
            return Err(Error::DimMismatch(format!(
                "expected {} vectors, got {}",
                self.order(),
                xs.len()
            )));
        }
        for (j, x) in xs.iter().enumerate() {
            if x.len() != self.shape[j] {
                return Err(Error::DimMismatch(format!(
                    "vector {j} has length {}, mode size is {}",
                    x.len(),
                    self.shape[j]
                )));
            }
        }
        Ok(())
    }
}

/// Contracts the trailing mode: `src` viewed as `prefix × n_last`,
/// `out[r] = Σ_k x[k]·src[r + k·prefix]`.
fn contract_last(src: &[f64], n_last: usize, x: &[f64]) -> Vec<f64> {
    let prefix = src.len() / n_last;
    let mut out = vec![0.0; prefix];
    for (k, &xk) in x.iter().enumerate() {
        if xk == 0.0 {
            continue;
        }
        let block = &src[k * prefix..(k + 1) * prefix];
        for (acc, &v) in out.iter_mut().zip(block) {
            *acc += xk * v;
        }
    }
    out
}

/// Contracts the leading mode: `src` viewed as `n_first × cols`,
/// `out[c] = ⟨x, column c⟩`.
fn contract_first(src: &[f64], n_first: usize, x: &[f64]) -> Vec<f64> {
    let cols = src.len() / n_first;
    let mut out = vec![0.0; cols];
    for (c, acc) in out.iter_mut().enumerate() {
        *acc = vecmath::dot(x, &src[c * n_first..(c + 1) * n_first]);
    }
    out
}

/// A dense real matrix, column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(
                "matrix dimensions must be positive".into(),
            ));
        }
        if data.len() != rows * cols {
            return Err(Error::DimMismatch(format!(
                "{rows}x{cols} matrix requires {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r + c * self.rows]
    }

    pub fn fro_norm(&self) -> f64 {
        vecmath::norm(&self.data)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    /// `Mᵀ x`, of length `cols`. Walks each contiguous column once.
    pub fn tr_mul(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.rows {
            return Err(Error::DimMismatch(format!(
                "tr_mul expects length {}, got {}",
                self.rows,
                x.len()
            )));
        }
        let out = (0..self.cols)
            .map(|c| vecmath::dot(x, &self.data[c * self.rows..(c + 1) * self.rows]))
            .collect();
        Ok(out)
    }

    /// `M y`, of length `rows`.
    pub fn mul_vec(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.cols {
            return Err(Error::DimMismatch(format!(
                "mul_vec expects length {}, got {}",
                self.cols,
                y.len()
            )));
        }
        let mut out = vec![0.0; self.rows];
        for (c, &yc) in y.iter().enumerate() {
            if yc == 0.0 {
                continue;
            }
            let col = &self.data[c * self.rows..(c + 1) * self.rows];
            for (acc, &v) in out.iter_mut().zip(col) {
                *acc += yc * v;
            }
        }
        Ok(out)
    }

    pub fn row(&self, r: usize) -> Vec<f64> {
        (0..self.cols).map(|c| self.get(r, c)).collect()
    }

    pub fn row_norm_sq(&self, r: usize) -> f64 {
        (0..self.cols).map(|c| self.get(r, c).powi(2)).sum()
    }
}
