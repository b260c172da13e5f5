use num_complex::Complex;

use crate::error::{invalid, Result};
use crate::scalar::{cis, Scalar};

/// Row-major 2x2 complex matrix.
pub type Mat2<T> = [[Complex<T>; 2]; 2];

/// `U3(alpha, beta, gamma)`:
///
/// ```text
/// [ cos(a/2)            -e^{i g} sin(a/2)      ]
/// [ e^{i b} sin(a/2)     e^{i(b+g)} cos(a/2)   ]
/// ```
pub fn u3_matrix<T: Scalar>(alpha: T, beta: T, gamma: T) -> Result<Mat2<T>> {
    if !(alpha.is_finite() && beta.is_finite() && gamma.is_finite()) {
        return Err(invalid("U3 angles must be finite"));
    }
    Ok(u3(alpha, beta, gamma))
}

pub(crate) fn u3<T: Scalar>(alpha: T, beta: T, gamma: T) -> Mat2<T> {
    let half = alpha / T::lit(2.0);
    let (s, c) = half.sin_cos();
    let eb = cis(beta);
    let eg = cis(gamma);
    let ebg = cis(beta + gamma);
    [[Complex::new(c, T::zero()), -eg * s], [eb * s, ebg * c]]
}

/// Partial derivatives of `U3` with respect to `(alpha, beta, gamma)`.
pub(crate) fn u3_partials<T: Scalar>(alpha: T, beta: T, gamma: T) -> [Mat2<T>; 3] {
    let half = alpha / T::lit(2.0);
    let (s, c) = half.sin_cos();
    let h = T::lit(0.5);
    let zero = Complex::new(T::zero(), T::zero());
    let i = Complex::new(T::zero(), T::one());
    let eb = cis(beta);
    let eg = cis(gamma);
    let ebg = cis(beta + gamma);
    let d_alpha = [
        [Complex::new(-h * s, T::zero()), -eg * (h * c)],
        [eb * (h * c), -ebg * (h * s)],
    ];
    let d_beta = [[zero, zero], [i * eb * s, i * ebg * c]];
    let d_gamma = [[zero, -i * eg * s], [zero, i * ebg * c]];
    [d_alpha, d_beta, d_gamma]
}

pub(crate) fn adjoint<T: Scalar>(m: &Mat2<T>) -> Mat2<T> {
    [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]]
}
