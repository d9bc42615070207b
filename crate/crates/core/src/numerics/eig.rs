use crate::error::{PlsError, Result};
use crate::numerics::Matrix;
use crate::scalar::Scalar;

/// Eigen-decomposition of a symmetric matrix, eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct SymEig<T> {
    pub eigenvalues: Vec<T>,
    /// Column `d` pairs with `eigenvalues[d]`.
    pub eigenvectors: Matrix<T>,
}

impl<T: Scalar> SymEig<T> {
    /// `V diag(λ) V^T`.
    pub fn reconstruct(&self) -> Matrix<T> {
        let v = &self.eigenvectors;
        let n = v.rows();
        Matrix::from_fn(n, n, |i, j| {
            (0..self.eigenvalues.len())
                .map(|d| v[(i, d)] * self.eigenvalues[d] * v[(j, d)])
                .sum()
        })
    }

    /// `V f(λ) V^T` for a spectral function `f`.
    pub fn apply(&self, f: impl Fn(T) -> T) -> Matrix<T> {
        let mapped = SymEig {
            eigenvalues: self.eigenvalues.iter().map(|&l| f(l)).collect(),
            eigenvectors: self.eigenvectors.clone(),
        };
        mapped.reconstruct()
    }
}

const SYMMETRY_TOL: f64 = 1e-10;
const MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi eigensolver.
pub fn sym_eig<T: Scalar>(a: &Matrix<T>) -> Result<SymEig<T>> {
    if !a.is_square() {
        return Err(PlsError::DimensionMismatch(format!(
            "eigen-decomposition of a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    let asym = a.asymmetry();
    if asym > T::lit(SYMMETRY_TOL) * a.max_abs() {
        return Err(PlsError::NonSymmetric {
            asymmetry: asym.to_f64_lossy(),
        });
    }
    let n = a.rows();
    let half = T::lit(0.5);
    let mut m = Matrix::from_fn(n, n, |i, j| half * (a[(i, j)] + a[(j, i)]));
    let mut v = Matrix::<T>::identity(n);

    let scale = m.frobenius();
    let target = T::epsilon() * scale;
    let mut converged = n <= 1 || scale == T::zero();
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(PlsError::NoConvergence { sweeps });
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq.abs() <= T::min_positive_value() {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                m[(p, q)] = T::zero();
                m[(q, p)] = T::zero();
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        let mut off = T::zero();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += m[(i, j)] * m[(i, j)];
                }
            }
        }
        converged = off.sqrt() <= target;
    }

    let mut order: Vec<usize> = (0..n).collect();
    // stable sort: ties keep ascending original index
    order.sort_by(|&i, &j| m[(j, j)].partial_cmp(&m[(i, i)]).expect("finite eigenvalues"));
    let eigenvalues = order.iter().map(|&i| m[(i, i)]).collect();
    let eigenvectors = Matrix::from_fn(n, n, |i, d| v[(i, order[d])]);
    Ok(SymEig {
        eigenvalues,
        eigenvectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orthonormality_error(v: &Matrix<f64>) -> f64 {
        v.transpose()
            .matmul(v)
            .unwrap()
            .sub(&Matrix::identity(v.cols()))
            .unwrap()
            .max_abs()
    }

    #[test]
    fn identity_has_unit_spectrum() {
        let e = sym_eig(&Matrix::<f64>::identity(3)).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 1.0, 1.0]);
        assert!(orthonormality_error(&e.eigenvectors) <= 1e-10);
    }

    #[test]
    fn diagonal_sorted_descending() {
        let e = sym_eig(&Matrix::diag(&[1.0f64, 4.0])).unwrap();
        assert_eq!(e.eigenvalues, vec![4.0, 1.0]);
        assert_eq!(e.eigenvectors[(1, 0)].abs(), 1.0);
        assert_eq!(e.eigenvectors[(0, 1)].abs(), 1.0);
    }

    #[test]
    fn random_symmetric_reconstructs() {
        // deterministic pseudo-random fill
        let mut s = 12345u64;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let b = Matrix::from_fn(5, 5, |_, _| next());
        let a = Matrix::from_fn(5, 5, |i, j| b[(i, j)] + b[(j, i)]);
        let e = sym_eig(&a).unwrap();
        let err = e.reconstruct().sub(&a).unwrap().max_abs();
        assert!(err <= 1e-8 * a.max_abs().max(1.0), "err {err}");
        assert!(orthonormality_error(&e.eigenvectors) <= 1e-10);
        assert!(e.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn rejects_asymmetric_and_rectangular() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.5, 1.0]]).unwrap();
        assert!(matches!(sym_eig(&a), Err(PlsError::NonSymmetric { .. })));
        assert!(matches!(
            sym_eig(&Matrix::<f64>::zeros(2, 3)),
            Err(PlsError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn single_precision_small_case() {
        let a = Matrix::<f32>::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let e = sym_eig(&a).unwrap();
        assert!((e.eigenvalues[0] - 3.0).abs() < 1e-5);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-5);
    }
}
