//! Minimal dense linear algebra and activations.
//!
//! Everything is 64-bit: gradient checking at 1e-4 relative tolerance is not
//! feasible in single precision. Summation order in [`affine`] is fixed
//! (left to right), so repeated evaluation of the same inputs is bit-identical.

use thiserror::Error;

use crate::rng::Rng;

#[derive(Debug, Error, PartialEq)]
pub enum TensorError {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("init scale must be positive, got {0}")]
    NonPositiveScale(f64),
}

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for row in rows {
            assert_eq!(row.len(), n_cols, "ragged rows");
            data.extend_from_slice(row);
        }
        Matrix {
            rows: n_rows,
            cols: n_cols,
            data,
        }
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
}

/// `W·x + b`. The per-row sum runs left to right over the columns and the
/// bias is added last.
pub fn affine(w: &Matrix, x: &[f64], b: &[f64]) -> Result<Vec<f64>, TensorError> {
    if w.cols != x.len() {
        return Err(TensorError::DimensionMismatch {
            context: "affine input",
            expected: w.cols,
            got: x.len(),
        });
    }
    if w.rows != b.len() {
        return Err(TensorError::DimensionMismatch {
            context: "affine bias",
            expected: w.rows,
            got: b.len(),
        });
    }
    let mut out = Vec::with_capacity(w.rows);
    for r in 0..w.rows {
        let row = w.row(r);
        let mut acc = 0.0;
        for (wv, xv) in row.iter().zip(x) {
            acc += wv * xv;
        }
        out.push(acc + b[r]);
    }
    Ok(out)
}

/// Concatenation `[a, b]`, `a` first. Order is significant: the LSTM gate
/// input is the previous hidden state followed by the current input vector.
pub fn concat(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    out.extend_from_slice(a);
    out.extend_from_slice(b);
    out
}

// Inputs are clamped before exponentiation so outputs stay strictly inside
// the open range even where the true value would round to an endpoint.
const SIGMOID_ARG_CLAMP: f64 = 36.0;
const TANH_ARG_CLAMP: f64 = 19.0;

/// Logistic sigmoid, strictly in (0, 1).
#[inline]
pub fn sigmoid_scalar(x: f64) -> f64 {
    let x = x.clamp(-SIGMOID_ARG_CLAMP, SIGMOID_ARG_CLAMP);
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Hyperbolic tangent, strictly in (-1, 1).
#[inline]
pub fn tanh_scalar(x: f64) -> f64 {
    x.clamp(-TANH_ARG_CLAMP, TANH_ARG_CLAMP).tanh()
}

pub fn sigmoid(xs: &[f64]) -> Vec<f64> {
    xs.iter().map(|&x| sigmoid_scalar(x)).collect()
}

pub fn tanh_v(xs: &[f64]) -> Vec<f64> {
    xs.iter().map(|&x| tanh_scalar(x)).collect()
}

/// Glorot-style scale `sqrt(6 / (fan_in + fan_out))`.
pub fn glorot_scale(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

/// Matrix with i.i.d. entries uniform in `[-scale, +scale]`, drawn from `rng`
/// in row-major order.
pub fn init_uniform(
    rng: &mut Rng,
    rows: usize,
    cols: usize,
    scale: f64,
) -> Result<Matrix, TensorError> {
    if !(scale > 0.0) {
        return Err(TensorError::NonPositiveScale(scale));
    }
    let data = (0..rows * cols)
        .map(|_| rng.uniform(-scale, scale))
        .collect();
    Ok(Matrix { rows, cols, data })
}
