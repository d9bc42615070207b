//! OLS and PCR baselines and the fit facade used by the CLI.

use crate::error::{PlsError, Result};
use crate::model::{covariance_pair, CoefficientPath, Dataset, FitReport, Method};
use crate::nipals::nipals_fit;
use crate::numerics::{solve_spd, sym_eig, Matrix, SymEig};
use crate::scalar::{dot, norm, sub, Scalar};

/// `λ_min / λ_max` below this makes the Gram matrix count as singular for OLS.
pub const OLS_CONDITION_RTOL: f64 = 1e-10;
/// PCR components with `λ_j <= PCR_SKIP_RTOL · λ_1` are skipped.
pub const PCR_SKIP_RTOL: f64 = 1e-12;

/// Eigen-structure of `Σ_XX` together with the OLS coordinates in that basis.
#[derive(Debug, Clone)]
pub struct Spectrum<T> {
    pub eigenvalues: Vec<T>,
    pub eigenvectors: Matrix<T>,
    /// `V^T β_OLS`.
    pub xi: Vec<T>,
}

impl<T: Scalar> Spectrum<T> {
    /// `Σ_d ξ_d u_d`.
    pub fn reconstruct_beta(&self) -> Vec<T> {
        self.eigenvectors.matvec(&self.xi)
    }
}

fn check_nonsingular<T: Scalar>(e: &SymEig<T>) -> Result<()> {
    let hi = e.eigenvalues.first().copied().unwrap_or_else(T::zero);
    let lo = e.eigenvalues.last().copied().unwrap_or_else(T::zero);
    if !(hi > T::zero()) || !(lo > T::lit(OLS_CONDITION_RTOL) * hi) {
        return Err(PlsError::Singular(format!(
            "Gram matrix eigenvalues span [{:e}, {:e}]",
            lo, hi
        )));
    }
    Ok(())
}

pub fn ols_fit<T: Scalar>(d: &Dataset<T>) -> Result<Vec<T>> {
    let (sxx, sxy) = covariance_pair(d)?;
    check_nonsingular(&sym_eig(&sxx)?)?;
    let beta = solve_spd(&sxx, &sxy)?;
    let resid = norm(&sub(&sxy, &sxx.matvec(&beta)));
    if resid > T::lit(1e-8) * norm(&sxy) {
        return Err(PlsError::Singular(format!(
            "normal-equation residual {:e}",
            resid
        )));
    }
    Ok(beta)
}

/// PCR path with the indices of skipped (near-null) components.
#[derive(Debug, Clone)]
pub struct PcrPath<T> {
    pub path: CoefficientPath<T>,
    /// 1-based component positions that contributed nothing.
    pub skipped: Vec<usize>,
}

pub fn pcr_fit<T: Scalar>(d: &Dataset<T>, l: usize) -> Result<PcrPath<T>> {
    if l == 0 || l > d.d() {
        return Err(PlsError::InvalidArgument(format!(
            "PCR order {l} outside 1..={}",
            d.d()
        )));
    }
    let (sxx, sxy) = covariance_pair(d)?;
    let e = sym_eig(&sxx)?;
    let top = e.eigenvalues[0];
    let mut beta = vec![T::zero(); d.d()];
    let mut betas = Vec::with_capacity(l);
    let mut skipped = Vec::new();
    for j in 0..l {
        let lam = e.eigenvalues[j];
        if lam > T::lit(PCR_SKIP_RTOL) * top {
            let u = e.eigenvectors.column(j);
            let c = dot(&u, &sxy) / lam;
            for (b, &ui) in beta.iter_mut().zip(&u) {
                *b += c * ui;
            }
        } else {
            skipped.push(j + 1);
        }
        betas.push(beta.clone());
    }
    Ok(PcrPath {
        path: CoefficientPath { betas },
        skipped,
    })
}

pub fn spectrum_of<T: Scalar>(d: &Dataset<T>, beta_ols: &[T]) -> Result<Spectrum<T>> {
    let (sxx, _) = covariance_pair(d)?;
    spectrum_from_gram(&sxx, beta_ols)
}

pub fn spectrum_from_gram<T: Scalar>(sxx: &Matrix<T>, beta_ols: &[T]) -> Result<Spectrum<T>> {
    if beta_ols.len() != sxx.rows() {
        return Err(PlsError::DimensionMismatch("beta vs Gram matrix".into()));
    }
    let e = sym_eig(sxx)?;
    let xi = e.eigenvectors.tr_matvec(beta_ols);
    Ok(Spectrum {
        eigenvalues: e.eigenvalues,
        eigenvectors: e.eigenvectors,
        xi,
    })
}

/// Fits `method` up to `l_max` components (ignored for OLS).
pub fn fit<T: Scalar>(d: &Dataset<T>, method: Method, l_max: usize) -> Result<FitReport<T>> {
    let path = match method {
        Method::Pls => nipals_fit(d, l_max)?.coefficient_path,
        Method::Ols => CoefficientPath {
            betas: vec![ols_fit(d)?],
        },
        Method::Pcr => pcr_fit(d, l_max)?.path,
    };
    FitReport::from_path(method, d, path)
}
