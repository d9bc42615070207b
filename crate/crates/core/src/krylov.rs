//! Krylov subspaces `K_L(A, b) = span{b, Ab, …, A^{L−1}b}` and the two
//! alternative PLS routes built on them: least squares restricted to
//! `K_L(Σ_XX, Σ_XY)`, and conjugate gradients on `Σ_XX β = Σ_XY` from a zero
//! start, whose `k`-th iterate is the `k`-component PLS estimator.

use crate::error::{PlsError, Result};
use crate::model::{covariance_pair, CoefficientPath, Dataset};
use crate::numerics::{solve_spd, Matrix};
use crate::scalar::{dot, norm, Scalar};

/// A new direction whose orthogonalised norm falls below this fraction of its
/// original norm is treated as already contained in the subspace.
pub const EFFECTIVE_DIM_RTOL: f64 = 1e-10;
/// CG stops when `p^T A p <= CURVATURE_RTOL · max_i a_ii · ‖p‖²`.
pub const CURVATURE_RTOL: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct KrylovBasis<T> {
    pub order: usize,
    /// `b, Ab, …, A^{order−1} b`.
    pub raw_vectors: Vec<Vec<T>>,
    /// `D x L'` orthonormal basis, `L' <= order`.
    pub ortho: Matrix<T>,
}

impl<T: Scalar> KrylovBasis<T> {
    pub fn effective_dim(&self) -> usize {
        self.ortho.cols()
    }
}

fn orthogonalize<T: Scalar>(v: &mut [T], basis: &[Vec<T>]) {
    // two passes of modified Gram-Schmidt
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, v);
            for (vi, &qi) in v.iter_mut().zip(q) {
                *vi -= c * qi;
            }
        }
    }
}

/// Builds the raw power vectors and an orthonormal basis of `K_order(a, b)`.
///
/// The orthonormal basis is grown Arnoldi-style, orthogonalising `A q_k`
/// against the current basis; the span matches the raw vectors but avoids the
/// rapid ill-conditioning of the power sequence. Growth stops once the new
/// direction is numerically in the span (the subspace became invariant).
pub fn krylov_basis<T: Scalar>(a: &Matrix<T>, b: &[T], order: usize) -> Result<KrylovBasis<T>> {
    if !a.is_square() || a.rows() != b.len() {
        return Err(PlsError::DimensionMismatch("Krylov operator and vector".into()));
    }
    if order == 0 {
        return Err(PlsError::InvalidArgument("Krylov order must be >= 1".into()));
    }
    let bn = norm(b);
    if bn == T::zero() {
        return Err(PlsError::ZeroVector);
    }

    let mut raw_vectors = Vec::with_capacity(order);
    raw_vectors.push(b.to_vec());
    for k in 1..order {
        let next = a.matvec(&raw_vectors[k - 1]);
        raw_vectors.push(next);
    }

    let mut basis: Vec<Vec<T>> = vec![b.iter().map(|&v| v / bn).collect()];
    while basis.len() < order.min(b.len()) {
        let mut w = a.matvec(basis.last().expect("non-empty"));
        let original = norm(&w);
        orthogonalize(&mut w, &basis);
        let wn = norm(&w);
        if !(wn > T::lit(EFFECTIVE_DIM_RTOL) * original) {
            break;
        }
        basis.push(w.into_iter().map(|v| v / wn).collect());
    }
    Ok(KrylovBasis {
        order,
        raw_vectors,
        ortho: Matrix::from_columns(&basis)?,
    })
}

/// `β = B (B^T Σ_XX B)^{-1} B^T Σ_XY` with `B` an orthonormal basis of
/// `K_l(Σ_XX, Σ_XY)`: least squares restricted to the Krylov subspace.
pub fn pls_via_restricted_ls<T: Scalar>(d: &Dataset<T>, l: usize) -> Result<Vec<T>> {
    let (sxx, sxy) = covariance_pair(d)?;
    restricted_ls(&sxx, &sxy, l)
}

/// Restricted least squares from precomputed covariance products.
pub fn restricted_ls<T: Scalar>(sxx: &Matrix<T>, sxy: &[T], l: usize) -> Result<Vec<T>> {
    let basis = krylov_basis(sxx, sxy, l)?;
    let b = &basis.ortho;
    let sb = sxx.matmul(b)?;
    let gram = b.transpose().matmul(&sb)?;
    // symmetrise against rounding before the SPD solve
    let gram = Matrix::from_fn(gram.rows(), gram.cols(), |i, j| {
        T::lit(0.5) * (gram[(i, j)] + gram[(j, i)])
    });
    let rhs = b.tr_matvec(sxy);
    let alpha = solve_spd(&gram, &rhs)?;
    Ok(b.matvec(&alpha))
}

/// Conjugate-gradient iterates for `a z = b` from `z = 0`.
#[derive(Debug, Clone)]
pub struct CgRun<T> {
    pub path: CoefficientPath<T>,
    /// Step (1-based) at which the curvature test failed, if it did.
    pub breakdown_at: Option<usize>,
}

pub fn conjugate_gradient<T: Scalar>(a: &Matrix<T>, b: &[T], steps: usize) -> Result<CgRun<T>> {
    if !a.is_square() || a.rows() != b.len() {
        return Err(PlsError::DimensionMismatch("CG operator and rhs".into()));
    }
    let scale = (0..a.rows()).map(|i| a[(i, i)].abs()).fold(T::zero(), T::max);
    let mut z = vec![T::zero(); b.len()];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let mut betas = Vec::with_capacity(steps);
    let mut breakdown_at = None;
    for k in 1..=steps {
        let ap = a.matvec(&p);
        let curvature = dot(&p, &ap);
        if !(curvature > T::lit(CURVATURE_RTOL) * scale * dot(&p, &p)) {
            breakdown_at = Some(k);
            break;
        }
        let alpha = rr / curvature;
        for ((zi, ri), (&pi, &api)) in z.iter_mut().zip(r.iter_mut()).zip(p.iter().zip(&ap)) {
            *zi += alpha * pi;
            *ri -= alpha * api;
        }
        betas.push(z.clone());
        let rr_new = dot(&r, &r);
        let beta = if rr == T::zero() { T::zero() } else { rr_new / rr };
        for (pi, &ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
        rr = rr_new;
    }
    Ok(CgRun {
        path: CoefficientPath { betas },
        breakdown_at,
    })
}

/// CG on `Σ_XX β = Σ_XY`; iterate `k` is the `k`-component PLS estimator.
/// A curvature breakdown truncates the path; breaking down on the very first
/// step is an error.
pub fn pls_via_cg<T: Scalar>(d: &Dataset<T>, l: usize) -> Result<CoefficientPath<T>> {
    let (sxx, sxy) = covariance_pair(d)?;
    let run = conjugate_gradient(&sxx, &sxy, l)?;
    if run.path.l_max() == 0 {
        return Err(PlsError::Breakdown { step: 1 });
    }
    Ok(run.path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{orthonormal_example, running_example};

    #[test]
    fn identity_operator_is_one_dimensional() {
        let a = Matrix::<f64>::identity(4);
        for order in 1..=4 {
            let k = krylov_basis(&a, &[1.0, 2.0, -1.0, 0.5], order).unwrap();
            assert_eq!(k.effective_dim(), 1);
            assert_eq!(k.raw_vectors.len(), order);
        }
    }

    #[test]
    fn running_example_spans_plane() {
        let a = Matrix::diag(&[1.0, 4.0]);
        let k = krylov_basis(&a, &[1.0, 4.0], 2).unwrap();
        assert_eq!(k.effective_dim(), 2);
        // det[b, Ab] = det[[1,1],[4,16]] = 12
        let (b, ab) = (&k.raw_vectors[0], &k.raw_vectors[1]);
        assert_eq!(b[0] * ab[1] - b[1] * ab[0], 12.0);
    }

    #[test]
    fn eigenvector_generator_is_one_dimensional() {
        let a = Matrix::diag(&[3.0, 1.0, 2.0]);
        let k = krylov_basis(&a, &[0.0, 5.0, 0.0], 3).unwrap();
        assert_eq!(k.effective_dim(), 1);
    }

    #[test]
    fn zero_generator_errors() {
        let a = Matrix::<f64>::identity(2);
        assert!(matches!(krylov_basis(&a, &[0.0, 0.0], 2), Err(PlsError::ZeroVector)));
    }

    #[test]
    fn restricted_ls_running_example() {
        let d = running_example::<f64>();
        let b1 = pls_via_restricted_ls(&d, 1).unwrap();
        assert!((b1[0] - 17.0 / 65.0).abs() < 1e-14 && (b1[1] - 68.0 / 65.0).abs() < 1e-14);
        let b2 = pls_via_restricted_ls(&d, 2).unwrap();
        assert!((b2[0] - 1.0).abs() < 1e-13 && (b2[1] - 1.0).abs() < 1e-13);
        let o = pls_via_restricted_ls(&orthonormal_example::<f64>(), 1).unwrap();
        assert!((o[0] - 1.0).abs() < 1e-15 && o[1].abs() < 1e-15);
    }

    #[test]
    fn cg_running_example() {
        let d = running_example::<f64>();
        let path = pls_via_cg(&d, 2).unwrap();
        let b1 = path.at(1).unwrap();
        assert!((b1[0] - 17.0 / 65.0).abs() < 1e-14 && (b1[1] - 68.0 / 65.0).abs() < 1e-14);
        let b2 = path.at(2).unwrap();
        assert!((b2[0] - 1.0).abs() < 1e-13 && (b2[1] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn cg_single_eigenvalue_converges_in_one_step() {
        let d = orthonormal_example::<f64>();
        let run = {
            let (sxx, sxy) = covariance_pair(&d).unwrap();
            conjugate_gradient(&sxx, &sxy, 2).unwrap()
        };
        let b1 = run.path.at(1).unwrap();
        assert!((b1[0] - 1.0).abs() < 1e-15 && b1[1].abs() < 1e-15);
        if let Some(b2) = run.path.at(2) {
            assert!((b2[0] - 1.0).abs() < 1e-14 && b2[1].abs() < 1e-14);
        }
    }
}
