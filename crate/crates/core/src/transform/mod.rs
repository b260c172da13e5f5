//! The trainable butterfly transform, its parameters and reference oracles.
//!
//! Output convention: at [`ParameterSet::fourier`] the forward transform is
//! the unitary DFT `y_j = N^{-1/2} sum_l x_l e^{-2 pi i j l / N}` in natural
//! index order. All indices are 0-based.

mod butterfly;
mod checkpoint;
pub(crate) mod gate;
mod oracle;
mod params;

pub use butterfly::{bit_reverse_permute, BlockKernel, ModelKernel};
pub use checkpoint::{Checkpoint, CheckpointBlock, CheckpointMetadata, CHECKPOINT_FORMAT_VERSION};
pub use gate::{u3_matrix, Mat2};
pub use oracle::{dense_matrix, dense_model_matrix, dft_matrix, dft_oracle};
pub use params::{
    fourier_init, identity_init, level_offset, param_count, phase_count, ParameterSet, TransformModel,
    DEEP_INIT_NOISE, MAX_QUBITS,
};

use num_complex::Complex;

use crate::error::{invalid, Result};
use crate::scalar::{log2_exact, Scalar};

pub(crate) fn check_len(len: usize, n: usize) -> Result<()> {
    match log2_exact(len) {
        Some(m) if m == n => Ok(()),
        Some(m) => Err(invalid(format!("vector of length 2^{m} does not match n={n}"))),
        None => Err(invalid(format!("length {len} is not a power of two"))),
    }
}

/// `U(p) x`.
pub fn forward<T: Scalar>(x: &[Complex<T>], p: &ParameterSet<T>) -> Result<Vec<Complex<T>>> {
    check_len(x.len(), p.n())?;
    let mut v = x.to_vec();
    BlockKernel::new(p).apply(&mut v);
    Ok(v)
}

/// `U(p)^dagger y`, stages run backwards with adjoint gates.
pub fn inverse<T: Scalar>(y: &[Complex<T>], p: &ParameterSet<T>) -> Result<Vec<Complex<T>>> {
    check_len(y.len(), p.n())?;
    let mut v = y.to_vec();
    BlockKernel::new(p).apply_inverse(&mut v);
    Ok(v)
}

/// Applies the blocks of `m` in order, block 0 first.
pub fn deep_forward<T: Scalar>(x: &[Complex<T>], m: &TransformModel<T>) -> Result<Vec<Complex<T>>> {
    check_len(x.len(), m.n())?;
    let mut v = x.to_vec();
    ModelKernel::new(m).apply(&mut v);
    Ok(v)
}

/// Inverse of [`deep_forward`]: block inverses in reverse order.
pub fn deep_inverse<T: Scalar>(y: &[Complex<T>], m: &TransformModel<T>) -> Result<Vec<Complex<T>>> {
    check_len(y.len(), m.n())?;
    let mut v = y.to_vec();
    ModelKernel::new(m).apply_inverse(&mut v);
    Ok(v)
}
