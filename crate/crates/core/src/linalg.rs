//! Small dense linear algebra: LU solves and power-iteration norms.
//!
//! Problems in this crate are desk-scale (tens of dimensions), so direct
//! factorizations and power iteration are sufficient.

use ndarray::{Array1, Array2, ArrayView2};

use crate::error::OperatorError;

/// Relative tolerance for power-iteration estimates.
const POWER_TOL: f64 = 1e-10;
/// Hard iteration cap for power iteration.
const POWER_MAX_ITERS: usize = 10_000;

/// LU factorization with partial pivoting of a square matrix.
#[derive(Debug, Clone)]
pub struct LuFactors {
    lu: Array2<f64>,
    piv: Vec<usize>,
}

impl LuFactors {
    pub fn factor(a: &ArrayView2<f64>) -> Result<Self, OperatorError> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(OperatorError::InvalidParameter(
                "LU factorization needs a square matrix".into(),
            ));
        }
        let mut lu = a.to_owned();
        let mut piv = Vec::with_capacity(n);
        for col in 0..n {
            let mut pivot_row = col;
            let mut pivot_val = lu[[col, col]].abs();
            for row in col + 1..n {
                let v = lu[[row, col]].abs();
                if v > pivot_val {
                    pivot_val = v;
                    pivot_row = row;
                }
            }
            if pivot_val == 0.0 || !pivot_val.is_finite() {
                return Err(OperatorError::Numeric(format!(
                    "singular matrix in LU factorization at column {col}"
                )));
            }
            if pivot_row != col {
                for j in 0..n {
                    let tmp = lu[[col, j]];
                    lu[[col, j]] = lu[[pivot_row, j]];
                    lu[[pivot_row, j]] = tmp;
                }
            }
            piv.push(pivot_row);
            for row in col + 1..n {
                let factor = lu[[row, col]] / lu[[col, col]];
                lu[[row, col]] = factor;
                for j in col + 1..n {
                    lu[[row, j]] -= factor * lu[[col, j]];
                }
            }
        }
        Ok(Self { lu, piv })
    }

    /// Solves `A x = b` for the factored matrix.
    pub fn solve(&self, b: &Array1<f64>) -> Array1<f64> {
        let n = self.piv.len();
        debug_assert_eq!(b.len(), n);
        let mut x = b.to_owned();
        for i in 0..n {
            x.swap(i, self.piv[i]);
        }
        // forward: L y = P b
        for i in 0..n {
            let mut sum = x[i];
            for j in 0..i {
                sum -= self.lu[[i, j]] * x[j];
            }
            x[i] = sum;
        }
        // backward: U x = y
        for i in (0..n).rev() {
            let mut sum = x[i];
            for j in i + 1..n {
                sum -= self.lu[[i, j]] * x[j];
            }
            x[i] = sum / self.lu[[i, i]];
        }
        x
    }
}

/// Deterministic start vector with unequal components so power iteration does
/// not begin orthogonal to structured eigenvectors.
fn start_vector(n: usize) -> Array1<f64> {
    let mut v = Array1::from_shape_fn(n, |i| 1.0 + 1.0 / (i as f64 + 2.0));
    let norm = v.dot(&v).sqrt();
    v.mapv_inplace(|x| x / norm);
    v
}

/// Largest eigenvalue of a symmetric PSD matrix by power iteration.
fn power_iteration_psd(s: &ArrayView2<f64>) -> f64 {
    let n = s.nrows();
    if n == 0 {
        return 0.0;
    }
    let mut v = start_vector(n);
    let mut lambda = 0.0;
    for _ in 0..POWER_MAX_ITERS {
        let w = s.dot(&v);
        let norm = w.dot(&w).sqrt();
        if norm <= f64::MIN_POSITIVE {
            return 0.0;
        }
        let next = v.dot(&w);
        v = w / norm;
        if (next - lambda).abs() <= POWER_TOL * next.abs().max(1.0) {
            return next;
        }
        lambda = next;
    }
    lambda
}

/// Spectral norm `‖M‖₂` via power iteration on `MᵀM`.
pub fn spectral_norm(m: &ArrayView2<f64>) -> f64 {
    let gram = m.t().dot(m);
    power_iteration_psd(&gram.view()).max(0.0).sqrt()
}

pub fn symmetric_part(m: &ArrayView2<f64>) -> Array2<f64> {
    (m.to_owned() + m.t()) * 0.5
}

/// Eigenvalue range `(min, max)` of a symmetric matrix, via two shifted power
/// iterations.
pub fn sym_eig_range(s: &ArrayView2<f64>) -> (f64, f64) {
    let n = s.nrows();
    // bound on |eigenvalues|
    let bound = spectral_norm(s);
    if bound == 0.0 {
        return (0.0, 0.0);
    }
    // bound*I - S and bound*I + S are PSD; their top eigenvalues recover the
    // extremes of S.
    let mut shifted_minus = -s.to_owned();
    let mut shifted_plus = s.to_owned();
    for i in 0..n {
        shifted_minus[[i, i]] += bound;
        shifted_plus[[i, i]] += bound;
    }
    let min = bound - power_iteration_psd(&shifted_minus.view());
    let max = power_iteration_psd(&shifted_plus.view()) - bound;
    (min, max)
}

/// Minimum eigenvalue of the symmetric part of `m`.
pub fn min_eig_symmetric_part(m: &ArrayView2<f64>) -> f64 {
    let s = symmetric_part(m);
    sym_eig_range(&s.view()).0
}
