use crate::error::{PlsError, Result};
use crate::numerics::Matrix;
use crate::scalar::Scalar;

/// Thin Householder QR of an `m x n` matrix (`m >= n`): `a = Q R` with `Q`
/// having orthonormal columns and `R` upper triangular with a non-negative
/// diagonal.
pub fn thin_qr<T: Scalar>(a: &Matrix<T>) -> Result<(Matrix<T>, Matrix<T>)> {
    let (m, n) = a.shape();
    if m < n {
        return Err(PlsError::DimensionMismatch(format!(
            "thin QR needs rows >= cols, got {m}x{n}"
        )));
    }
    let mut r = a.clone();
    let mut reflectors: Vec<Vec<T>> = Vec::with_capacity(n);
    for k in 0..n {
        let mut v: Vec<T> = (k..m).map(|i| r[(i, k)]).collect();
        let alpha = v.iter().fold(T::zero(), |s, &x| s + x * x).sqrt();
        if alpha == T::zero() {
            reflectors.push(Vec::new());
            continue;
        }
        let sign = if v[0] >= T::zero() { T::one() } else { -T::one() };
        v[0] += sign * alpha;
        let vnorm2 = v.iter().fold(T::zero(), |s, &x| s + x * x);
        for j in k..n {
            let proj = (k..m).fold(T::zero(), |s, i| s + v[i - k] * r[(i, j)]);
            let f = T::lit(2.0) * proj / vnorm2;
            for i in k..m {
                r[(i, j)] -= f * v[i - k];
            }
        }
        reflectors.push(v);
    }

    // accumulate Q = H_1 ... H_n applied to the first n columns of I
    let mut q = Matrix::from_fn(m, n, |i, j| if i == j { T::one() } else { T::zero() });
    for k in (0..n).rev() {
        let v = &reflectors[k];
        if v.is_empty() {
            continue;
        }
        let vnorm2 = v.iter().fold(T::zero(), |s, &x| s + x * x);
        for j in 0..n {
            let proj = (k..m).fold(T::zero(), |s, i| s + v[i - k] * q[(i, j)]);
            let f = T::lit(2.0) * proj / vnorm2;
            for i in k..m {
                q[(i, j)] -= f * v[i - k];
            }
        }
    }

    let mut r_thin = Matrix::from_fn(n, n, |i, j| if i <= j { r[(i, j)] } else { T::zero() });
    for k in 0..n {
        if r_thin[(k, k)] < T::zero() {
            for j in k..n {
                r_thin[(k, j)] = -r_thin[(k, j)];
            }
            for i in 0..m {
                q[(i, k)] = -q[(i, k)];
            }
        }
    }
    Ok((q, r_thin))
}

/// Orthogonal factor of a square matrix, sign-fixed so `R` has a positive
/// diagonal. Applied to a standard Gaussian matrix this yields a Haar-distributed
/// orthogonal matrix.
pub fn qr_orthonormal<T: Scalar>(a: &Matrix<T>) -> Result<Matrix<T>> {
    if !a.is_square() {
        return Err(PlsError::DimensionMismatch(format!(
            "qr_orthonormal expects a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let (q, r) = thin_qr(a)?;
    let n = a.rows();
    let col_scale = (0..n)
        .map(|j| (0..n).fold(T::zero(), |s, i| s + a[(i, j)] * a[(i, j)]).sqrt())
        .fold(T::zero(), T::max);
    let tol = T::lit(1e-12) * col_scale;
    if col_scale == T::zero() || (0..n).any(|k| r[(k, k)] <= tol) {
        return Err(PlsError::RankDeficient);
    }
    Ok(q)
}
