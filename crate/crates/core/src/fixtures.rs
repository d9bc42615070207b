//! Small hand-checkable datasets.

use crate::model::Dataset;
use crate::numerics::Matrix;
use crate::scalar::Scalar;

/// Centered four-row dataset with `X^T X = diag(1, 4)`, `X^T y = (1, 4)` and
/// `‖y‖² = 5`: the Gram products of `X = [[1,0],[0,2]]`, `y = (1,2)`.
///
/// OLS gives `(1, 1)`; one PLS component gives `(17/65, 68/65)`.
pub fn running_example<T: Scalar>() -> Dataset<T> {
    let h = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    let two = T::lit(2.0);
    let z = T::zero();
    let x = Matrix::from_rows(&[
        vec![h, z],
        vec![-h, z],
        vec![z, two * h],
        vec![z, -two * h],
    ])
    .expect("finite");
    let y = vec![h, -h, two * h, -two * h];
    Dataset::new(x, y).expect("valid dataset")
}

/// Centered dataset with orthonormal columns and `y` equal to the first column.
pub fn orthonormal_example<T: Scalar>() -> Dataset<T> {
    let h = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    let z = T::zero();
    let x = Matrix::from_rows(&[vec![h, z], vec![-h, z], vec![z, h], vec![z, -h]])
        .expect("finite");
    Dataset::new(x, vec![h, -h, z, z]).expect("valid dataset")
}
