//! Trainable butterfly transforms for sparse approximate amplitude encoding.
//!
//! The crate provides the adaptive interpolating transform (a QFT-shaped
//! butterfly whose gates are trainable), the sparse encoding pipeline built
//! around it, gradient-based training, dataset ingestion and the pieces the
//! `aiqt` command line tool is assembled from.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, which the documented tolerances assume.

pub mod circuit;
pub mod data;
pub mod encoding;
pub mod error;
pub mod harness;
pub mod io;
pub mod matrix;
pub mod scalar;
pub mod training;
pub mod transform;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type C64 = num_complex::Complex<f64>;
pub type C32 = num_complex::Complex<f32>;

pub type Params = transform::ParameterSet<f64>;
pub type Params32 = transform::ParameterSet<f32>;
pub type Model = transform::TransformModel<f64>;
pub type Model32 = transform::TransformModel<f32>;
pub type Matrix = matrix::DenseMatrix<f64>;
