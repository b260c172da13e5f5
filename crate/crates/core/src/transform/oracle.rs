use num_complex::Complex;

use super::params::{ParameterSet, TransformModel};
use crate::circuit::Circuit;
use crate::error::Result;
use crate::matrix::DenseMatrix;
use crate::scalar::Scalar;

/// Direct `O(N^2)` unitary DFT, `y_j = N^{-1/2} sum_l x_l e^{-2 pi i j l / N}`.
///
/// Exponents are reduced modulo `N` before the trigonometric call so large
/// lengths keep full accuracy.
pub fn dft_oracle<T: Scalar>(x: &[Complex<T>]) -> Vec<Complex<T>> {
    let len = x.len();
    if len == 0 {
        return Vec::new();
    }
    let table = roots::<T>(len);
    let scale = T::one() / T::from_usize_lossy(len).sqrt();
    (0..len)
        .map(|j| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for (l, v) in x.iter().enumerate() {
                acc = acc + v * table[(j * l) % len];
            }
            acc * scale
        })
        .collect()
}

/// Dense unitary DFT matrix of size `2^n`.
pub fn dft_matrix<T: Scalar>(n: usize) -> DenseMatrix<T> {
    let len = 1usize << n;
    let table = roots::<T>(len);
    let scale = T::one() / T::from_usize_lossy(len).sqrt();
    DenseMatrix::from_columns(len, |c| (0..len).map(|r| table[(r * c) % len] * scale).collect())
}

/// Matrix of one block, assembled gate by gate from its circuit.
/// Refused above [`crate::circuit::DENSE_MAX_QUBITS`] qubits.
pub fn dense_matrix<T: Scalar>(p: &ParameterSet<T>) -> Result<DenseMatrix<T>> {
    Circuit::from_params(p).unitary()
}

/// Product of the block matrices, `M_{D-1} ... M_1 M_0`.
pub fn dense_model_matrix<T: Scalar>(m: &TransformModel<T>) -> Result<DenseMatrix<T>> {
    let mut acc = DenseMatrix::identity(m.dim());
    for b in m.blocks() {
        acc = dense_matrix(b)?.matmul(&acc);
    }
    Ok(acc)
}

/// `e^{-2 pi i t / len}` for `t = 0..len`.
fn roots<T: Scalar>(len: usize) -> Vec<Complex<T>> {
    (0..len)
        .map(|t| {
            let ang = -2.0 * std::f64::consts::PI * t as f64 / len as f64;
            Complex::new(T::lit(ang.cos()), T::lit(ang.sin()))
        })
        .collect()
}
