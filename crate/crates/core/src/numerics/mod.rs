//! Dense linear-algebra building blocks: a row-major matrix, a Jacobi
//! symmetric eigensolver, Householder QR and SPD / general solves.

mod eig;
mod matrix;
mod qr;
mod solve;

pub use eig::{sym_eig, SymEig};
pub use matrix::Matrix;
pub use qr::{qr_orthonormal, thin_qr};
pub use solve::{
    condition_number_sym, lu_solve_many, solve_spd, solve_spd_detailed, symmetric_pinv_solve,
    SpdSolution, PIVOT_RTOL, RESIDUAL_RTOL,
};

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn sym_matrix(n: usize) -> impl Strategy<Value = Matrix<f64>> {
        proptest::collection::vec(-5.0f64..5.0, n * n).prop_map(move |v| {
            let b = Matrix::new(n, n, v).unwrap();
            Matrix::from_fn(n, n, |i, j| b[(i, j)] + b[(j, i)])
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn eig_reconstruction(a in (1usize..9).prop_flat_map(sym_matrix)) {
            let e = sym_eig(&a).unwrap();
            let err = e.reconstruct().sub(&a).unwrap().max_abs();
            prop_assert!(err <= 1e-8 * a.max_abs().max(1.0));
            let v = &e.eigenvectors;
            let ortho = v.transpose().matmul(v).unwrap().sub(&Matrix::identity(a.rows())).unwrap().max_abs();
            prop_assert!(ortho <= 1e-10);
        }

        #[test]
        fn spd_residual(a in (1usize..8).prop_flat_map(sym_matrix), shift in 0.01f64..1.0) {
            // shift the spectrum so that cond stays below ~1e8
            let e = sym_eig(&a).unwrap();
            let lmax = e.eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l.abs())).max(1.0);
            let spd = e.apply(|l| l.abs() + shift * lmax * 1e-6 + 1e-300);
            let b: Vec<f64> = (0..a.rows()).map(|i| (i as f64 + 1.0).cos()).collect();
            let x = solve_spd(&spd, &b).unwrap();
            let r = crate::scalar::norm(&crate::scalar::sub(&spd.matvec(&x), &b));
            prop_assert!(r <= 1e-8 * crate::scalar::norm(&b));
        }
    }
}
