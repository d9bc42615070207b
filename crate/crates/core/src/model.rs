//! Regression data model shared by every solver.
//!
//! The regressor covariance is stored unscaled, `Σ_XX = X^T X` and
//! `Σ_XY = X^T y`. Every quantity downstream (coefficients, NED, the moment
//! bound) is invariant to a common `1/N` factor.

use crate::error::{PlsError, Result};
use crate::numerics::Matrix;
use crate::scalar::{dot, Scalar};

/// Column means must vanish to this (scale-relative) tolerance for a dataset
/// to count as centered.
pub const CENTERING_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    pub x: Matrix<T>,
    pub y: Vec<T>,
    pub centered: bool,
    /// Per-column divisors applied after centering, when scaling was performed.
    pub column_scales: Option<Vec<T>>,
}

fn column_means<T: Scalar>(x: &Matrix<T>) -> Vec<T> {
    let n = T::from_usize(x.rows()).expect("row count");
    let mut m = x.tr_matvec(&vec![T::one(); x.rows()]);
    for v in &mut m {
        *v /= n;
    }
    m
}

fn mean<T: Scalar>(v: &[T]) -> T {
    v.iter().copied().sum::<T>() / T::from_usize(v.len()).expect("length")
}

impl<T: Scalar> Dataset<T> {
    /// Wraps raw data without touching it.
    pub fn new(x: Matrix<T>, y: Vec<T>) -> Result<Self> {
        if x.rows() != y.len() {
            return Err(PlsError::DimensionMismatch(format!(
                "X has {} rows, y has {} entries",
                x.rows(),
                y.len()
            )));
        }
        if x.rows() < 2 || x.cols() < 1 {
            return Err(PlsError::DimensionMismatch(format!(
                "need N >= 2 and D >= 1, got {}x{}",
                x.rows(),
                x.cols()
            )));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(PlsError::NonFinite { row: i, col: 0 });
        }
        let mut d = Self {
            x,
            y,
            centered: false,
            column_scales: None,
        };
        d.centered = d.centering_error() <= T::lit(CENTERING_TOL);
        Ok(d)
    }

    /// Removes column means of `x` and the mean of `y`.
    pub fn centered(x: Matrix<T>, y: Vec<T>) -> Result<Self> {
        let mut d = Self::new(x, y)?;
        d.center_in_place();
        Ok(d)
    }

    pub(crate) fn center_in_place(&mut self) {
        let means = column_means(&self.x);
        let (n, p) = self.x.shape();
        self.x = Matrix::from_fn(n, p, |i, j| self.x[(i, j)] - means[j]);
        let my = mean(&self.y);
        for v in &mut self.y {
            *v -= my;
        }
        self.centered = true;
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn d(&self) -> usize {
        self.x.cols()
    }

    /// Largest column (or response) mean, relative to that column's magnitude.
    pub fn centering_error(&self) -> T {
        let means = column_means(&self.x);
        let mut worst = T::zero();
        for (j, &m) in means.iter().enumerate() {
            let scale = (0..self.n())
                .map(|i| self.x[(i, j)].abs())
                .fold(T::one(), T::max);
            worst = worst.max(m.abs() / scale);
        }
        let yscale = self.y.iter().fold(T::one(), |m, v| m.max(v.abs()));
        worst.max(mean(&self.y).abs() / yscale)
    }

    pub fn require_centered(&self) -> Result<()> {
        let err = self.centering_error();
        if !self.centered || err > T::lit(CENTERING_TOL) {
            return Err(PlsError::NotCentered {
                max_mean: err.to_f64_lossy(),
            });
        }
        Ok(())
    }

    pub fn predict(&self, beta: &[T]) -> Vec<T> {
        self.x.matvec(beta)
    }

    /// `‖y − Xβ‖`.
    pub fn residual_norm(&self, beta: &[T]) -> T {
        self.predict(beta)
            .iter()
            .zip(&self.y)
            .map(|(&f, &y)| (y - f) * (y - f))
            .sum::<T>()
            .sqrt()
    }
}

/// `(Σ_XX, Σ_XY) = (X^T X, X^T y)`; `Σ_XX` is exactly symmetric.
pub fn covariance_pair<T: Scalar>(d: &Dataset<T>) -> Result<(Matrix<T>, Vec<T>)> {
    d.require_centered()?;
    Ok((d.x.gram(), d.x.tr_matvec(&d.y)))
}

/// In-sample coefficient of determination `1 − ‖y − Xβ‖² / ‖y‖²` for centered `y`.
pub fn r2_score<T: Scalar>(d: &Dataset<T>, beta: &[T]) -> Result<T> {
    if beta.len() != d.d() {
        return Err(PlsError::DimensionMismatch(format!(
            "beta of length {} for D = {}",
            beta.len(),
            d.d()
        )));
    }
    let tss = dot(&d.y, &d.y);
    if tss == T::zero() {
        return Err(PlsError::DegenerateResponse);
    }
    let rn = d.residual_norm(beta);
    Ok(T::one() - rn * rn / tss)
}

/// Coefficient vectors indexed by component count; `betas[k]` holds the
/// estimator with `k + 1` components.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientPath<T> {
    pub betas: Vec<Vec<T>>,
}

impl<T: Scalar> CoefficientPath<T> {
    pub fn l_max(&self) -> usize {
        self.betas.len()
    }

    /// Estimator with `l` components (1-based).
    pub fn at(&self, l: usize) -> Option<&[T]> {
        l.checked_sub(1)
            .and_then(|k| self.betas.get(k))
            .map(Vec::as_slice)
    }

    pub fn last(&self) -> Option<&[T]> {
        self.betas.last().map(Vec::as_slice)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Pls,
    Ols,
    Pcr,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Pls => "pls",
            Method::Ols => "ols",
            Method::Pcr => "pcr",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = PlsError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pls" => Ok(Method::Pls),
            "ols" => Ok(Method::Ols),
            "pcr" => Ok(Method::Pcr),
            other => Err(PlsError::InvalidArgument(format!("unknown method `{other}`"))),
        }
    }
}

/// Per-order fit summary. OLS reports a single-entry path.
#[derive(Debug, Clone)]
pub struct FitReport<T> {
    pub method: Method,
    pub coefficients: CoefficientPath<T>,
    pub r2_per_l: Vec<T>,
    pub residual_norms: Vec<T>,
}

impl<T: Scalar> FitReport<T> {
    pub fn from_path(method: Method, d: &Dataset<T>, path: CoefficientPath<T>) -> Result<Self> {
        let r2_per_l = path
            .betas
            .iter()
            .map(|b| r2_score(d, b))
            .collect::<Result<Vec<_>>>()?;
        let residual_norms = path.betas.iter().map(|b| d.residual_norm(b)).collect();
        Ok(Self {
            method,
            coefficients: path,
            r2_per_l,
            residual_norms,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{orthonormal_example, running_example};

    #[test]
    fn covariance_of_orthonormal_columns() {
        let (sxx, sxy) = covariance_pair(&orthonormal_example::<f64>()).unwrap();
        assert!(sxx.sub(&Matrix::identity(2)).unwrap().max_abs() < 1e-15);
        assert!((sxy[0] - 1.0).abs() < 1e-15 && sxy[1].abs() < 1e-15);
    }

    #[test]
    fn covariance_of_running_example() {
        let (sxx, sxy) = covariance_pair(&running_example::<f64>()).unwrap();
        assert!(sxx.sub(&Matrix::diag(&[1.0, 4.0])).unwrap().max_abs() < 1e-14);
        assert!((sxy[0] - 1.0).abs() < 1e-14 && (sxy[1] - 4.0).abs() < 1e-14);
        assert_eq!(sxx, sxx.transpose());
    }

    #[test]
    fn uncentered_is_rejected() {
        let d = Dataset::new(Matrix::identity(2), vec![1.0, 0.0]).unwrap();
        assert!(!d.centered);
        assert!(matches!(covariance_pair(&d), Err(PlsError::NotCentered { .. })));
    }

    #[test]
    fn r2_examples() {
        let d = running_example::<f64>();
        assert!((r2_score(&d, &[1.0, 1.0]).unwrap() - 1.0).abs() < 1e-14);
        assert!(r2_score(&d, &[0.0, 0.0]).unwrap().abs() < 1e-15);
        let b = [17.0 / 65.0, 68.0 / 65.0];
        let expected = 1.0
            - ((1.0 - 17.0 / 65.0f64).powi(2) + (2.0 - 136.0 / 65.0f64).powi(2)) / 5.0;
        assert!((r2_score(&d, &b).unwrap() - expected).abs() < 1e-14);
        assert!(r2_score(&d, &[1.0]).is_err());
    }

    #[test]
    fn zero_response_is_degenerate() {
        let mut d = running_example::<f64>();
        d.y = vec![0.0; d.n()];
        assert!(matches!(r2_score(&d, &[1.0, 1.0]), Err(PlsError::DegenerateResponse)));
    }

    #[test]
    fn centering_removes_means() {
        let x = Matrix::from_rows(&[vec![1.0, 10.0], vec![2.0, 30.0], vec![6.0, 20.0]]).unwrap();
        let d = Dataset::centered(x, vec![3.0, 4.0, 8.0]).unwrap();
        assert!(d.centered);
        assert!(d.centering_error() <= 1e-15);
        assert!(d.require_centered().is_ok());
    }
}
