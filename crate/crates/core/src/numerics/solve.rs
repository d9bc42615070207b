use crate::error::{PlsError, Result};
use crate::numerics::{sym_eig, Matrix};
use crate::scalar::{norm, sub, Scalar};

/// Cholesky pivots below this fraction of the largest diagonal entry switch the
/// solve to the spectral least-squares fallback.
pub const PIVOT_RTOL: f64 = 1e-12;
/// Relative residual `‖a x − b‖ / ‖b‖` accepted by [`solve_spd`].
pub const RESIDUAL_RTOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct SpdSolution<T> {
    pub x: Vec<T>,
    /// True when the minimum-norm least-squares route was taken.
    pub used_fallback: bool,
    /// `‖a x − b‖ / ‖b‖` (zero when `b = 0`).
    pub relative_residual: T,
}

fn cholesky<T: Scalar>(a: &Matrix<T>) -> Option<Matrix<T>> {
    let n = a.rows();
    let max_diag = (0..n).map(|i| a[(i, i)]).fold(T::zero(), T::max);
    if max_diag <= T::zero() {
        return None;
    }
    let tol = T::lit(PIVOT_RTOL) * max_diag;
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > tol) {
            return None;
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Some(l)
}

fn cholesky_solve<T: Scalar>(l: &Matrix<T>, b: &[T]) -> Vec<T> {
    let n = l.rows();
    let mut z = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            let lik = l[(i, k)];
            let zk = z[k];
            z[i] -= lik * zk;
        }
        z[i] /= l[(i, i)];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            let lki = l[(k, i)];
            let zk = z[k];
            z[i] -= lki * zk;
        }
        z[i] /= l[(i, i)];
    }
    z
}

/// Minimum-norm least-squares solution of a symmetric system via its
/// eigen-decomposition (the SVD of a symmetric matrix up to signs).
pub fn symmetric_pinv_solve<T: Scalar>(a: &Matrix<T>, b: &[T]) -> Result<Vec<T>> {
    let e = sym_eig(a)?;
    let n = a.rows();
    let smax = e.eigenvalues.iter().fold(T::zero(), |m, &l| m.max(l.abs()));
    let cutoff = T::lit(PIVOT_RTOL) * smax;
    let v = &e.eigenvectors;
    let mut x = vec![T::zero(); n];
    for (d, &lam) in e.eigenvalues.iter().enumerate() {
        if lam.abs() <= cutoff {
            continue;
        }
        let coef = (0..n).fold(T::zero(), |s, i| s + v[(i, d)] * b[i]) / lam;
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += coef * v[(i, d)];
        }
    }
    Ok(x)
}

fn relative_residual<T: Scalar>(a: &Matrix<T>, x: &[T], b: &[T]) -> T {
    let bn = norm(b);
    let r = norm(&sub(&a.matvec(x), b));
    if bn == T::zero() {
        r
    } else {
        r / bn
    }
}

/// Solves a symmetric positive-definite system, reporting which route was used
/// and the achieved residual. Never fails on conditioning alone.
pub fn solve_spd_detailed<T: Scalar>(a: &Matrix<T>, b: &[T]) -> Result<SpdSolution<T>> {
    if !a.is_square() || a.rows() != b.len() {
        return Err(PlsError::DimensionMismatch(format!(
            "{}x{} system with rhs of length {}",
            a.rows(),
            a.cols(),
            b.len()
        )));
    }
    let (x, used_fallback) = match cholesky(a) {
        Some(l) => (cholesky_solve(&l, b), false),
        None => (symmetric_pinv_solve(a, b)?, true),
    };
    let relative_residual = relative_residual(a, &x, b);
    Ok(SpdSolution {
        x,
        used_fallback,
        relative_residual,
    })
}

/// Solves `a x = b` for SPD `a`; errors only when even the fallback leaves a
/// residual above [`RESIDUAL_RTOL`].
pub fn solve_spd<T: Scalar>(a: &Matrix<T>, b: &[T]) -> Result<Vec<T>> {
    let sol = solve_spd_detailed(a, b)?;
    if sol.relative_residual > T::lit(RESIDUAL_RTOL) {
        return Err(PlsError::Singular(format!(
            "SPD solve residual {:e}",
            sol.relative_residual
        )));
    }
    Ok(sol.x)
}

/// General square solve `a X = B` by LU with partial pivoting.
pub fn lu_solve_many<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    let n = a.rows();
    if !a.is_square() || b.rows() != n {
        return Err(PlsError::DimensionMismatch("lu_solve".into()));
    }
    let tol = T::lit(PIVOT_RTOL) * a.max_abs();
    let mut lu = a.clone();
    let mut x = b.clone();
    let m = b.cols();
    for k in 0..n {
        let (piv, pmax) = (k..n)
            .map(|i| (i, lu[(i, k)].abs()))
            .fold((k, T::zero()), |acc, c| if c.1 > acc.1 { c } else { acc });
        if pmax <= tol {
            return Err(PlsError::Singular(format!("LU pivot {pmax:e} at column {k}")));
        }
        if piv != k {
            for j in 0..n {
                let t = lu[(k, j)];
                lu[(k, j)] = lu[(piv, j)];
                lu[(piv, j)] = t;
            }
            for j in 0..m {
                let t = x[(k, j)];
                x[(k, j)] = x[(piv, j)];
                x[(piv, j)] = t;
            }
        }
        for i in k + 1..n {
            let f = lu[(i, k)] / lu[(k, k)];
            lu[(i, k)] = f;
            for j in k + 1..n {
                let u = lu[(k, j)];
                lu[(i, j)] -= f * u;
            }
            for j in 0..m {
                let u = x[(k, j)];
                x[(i, j)] -= f * u;
            }
        }
    }
    for i in (0..n).rev() {
        for j in 0..m {
            let mut s = x[(i, j)];
            for k in i + 1..n {
                s -= lu[(i, k)] * x[(k, j)];
            }
            x[(i, j)] = s / lu[(i, i)];
        }
    }
    Ok(x)
}

/// `λ_max / λ_min` of a symmetric matrix (infinite when `λ_min <= 0`).
pub fn condition_number_sym<T: Scalar>(a: &Matrix<T>) -> Result<T> {
    let e = sym_eig(a)?;
    let hi = e.eigenvalues.first().copied().unwrap_or_else(T::one);
    let lo = e.eigenvalues.last().copied().unwrap_or_else(T::one);
    Ok(if lo <= T::zero() { T::infinity() } else { hi / lo })
}
