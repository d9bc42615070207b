//! NIPALS for scalar-response PLS.
//!
//! Each iteration takes the weight `w = X_{l-1}^T y / ‖X_{l-1}^T y‖`, the
//! score `t = X_{l-1} w`, the loadings `p = X_{l-1}^T t / t^T t` and
//! `q = y^T t / t^T t`, then deflates `X_l = X_{l-1} − t p^T`. The loop runs for
//! exactly `l_max` components (the classic `while l < L` listing would stop one
//! short). Coefficients follow from the rotation `R_L = W_L (P_L^T W_L)^{-1}`,
//! which satisfies `T_L = X R_L`, as `β_L = R_L D_L^{-2} T_L^T y = R_L q`.

use crate::error::{PlsError, Result};
use crate::model::{CoefficientPath, Dataset};
use crate::numerics::{lu_solve_many, Matrix};
use crate::scalar::{dot, norm, Scalar};

/// A component is only extracted while `‖X_{l-1}^T y‖ >= DEGENERACY_RTOL ‖X^T y‖`.
pub const DEGENERACY_RTOL: f64 = 1e-12;

/// Working state of the deflation loop.
#[derive(Debug, Clone)]
pub struct NipalsState<T> {
    pub w: Vec<Vec<T>>,
    pub t: Vec<Vec<T>>,
    pub p: Vec<Vec<T>>,
    pub q: Vec<T>,
    pub x_deflated: Matrix<T>,
    pub l_done: usize,
    y: Vec<T>,
    initial_cross_norm: T,
}

impl<T: Scalar> NipalsState<T> {
    pub fn new(d: &Dataset<T>) -> Result<Self> {
        d.require_centered()?;
        let initial_cross_norm = norm(&d.x.tr_matvec(&d.y));
        if initial_cross_norm == T::zero() {
            return Err(PlsError::DegenerateDirection);
        }
        Ok(Self {
            w: Vec::new(),
            t: Vec::new(),
            p: Vec::new(),
            q: Vec::new(),
            x_deflated: d.x.clone(),
            l_done: 0,
            y: d.y.clone(),
            initial_cross_norm,
        })
    }

    /// Extracts one more component. Returns `false`, leaving the state
    /// untouched, once the weight direction has numerically vanished.
    pub fn step(&mut self) -> bool {
        let x = &self.x_deflated;
        let s = x.tr_matvec(&self.y);
        let s_norm = norm(&s);
        if !(s_norm >= T::lit(DEGENERACY_RTOL) * self.initial_cross_norm) {
            return false;
        }
        let w: Vec<T> = s.iter().map(|&v| v / s_norm).collect();
        let t = x.matvec(&w);
        let tt = dot(&t, &t);
        if tt == T::zero() {
            return false;
        }
        let p: Vec<T> = x.tr_matvec(&t).into_iter().map(|v| v / tt).collect();
        let q = dot(&self.y, &t) / tt;
        self.x_deflated.sub_outer(&t, &p);
        self.w.push(w);
        self.t.push(t);
        self.p.push(p);
        self.q.push(q);
        self.l_done += 1;
        true
    }
}

/// Result of a NIPALS run.
#[derive(Debug, Clone)]
pub struct PlsFit<T> {
    /// `D x L` weights.
    pub w_mat: Matrix<T>,
    /// `N x L` scores.
    pub t_mat: Matrix<T>,
    /// `D x L` x-loadings.
    pub p_mat: Matrix<T>,
    pub q_row: Vec<T>,
    /// `D x L` rotation with `X R = T`.
    pub r_mat: Matrix<T>,
    /// `‖t_l‖`.
    pub d_norms: Vec<T>,
    pub coefficient_path: CoefficientPath<T>,
    /// `X_L` after the last extracted component.
    pub x_deflated: Matrix<T>,
    /// `‖X_l‖_F` for `l = 0..=L`.
    pub x_deflated_norms: Vec<T>,
    pub l_requested: usize,
}

impl<T: Scalar> PlsFit<T> {
    pub fn l_achieved(&self) -> usize {
        self.q_row.len()
    }

    /// True when the weight direction vanished before `l_requested` components.
    pub fn truncated(&self) -> bool {
        self.l_achieved() < self.l_requested
    }
}

/// `R_L = W_L (P_L^T W_L)^{-1}`.
pub fn rotation<T: Scalar>(w_mat: &Matrix<T>, p_mat: &Matrix<T>) -> Result<Matrix<T>> {
    if w_mat.shape() != p_mat.shape() {
        return Err(PlsError::DimensionMismatch("W and P shapes differ".into()));
    }
    let m = p_mat.transpose().matmul(w_mat)?;
    // R^T solves (P^T W)^T R^T = W^T
    let rt = lu_solve_many(&m.transpose(), &w_mat.transpose())?;
    Ok(rt.transpose())
}

/// Runs NIPALS for up to `l_max` components and builds the coefficient path.
///
/// Stops early, without error, when the weight direction vanishes (the
/// effective Krylov dimension was reached); `PlsFit::l_achieved` reports how far
/// it got. Fails with `DegenerateDirection` only if not even one component exists.
pub fn nipals_fit<T: Scalar>(d: &Dataset<T>, l_max: usize) -> Result<PlsFit<T>> {
    if l_max == 0 || l_max > d.d() {
        return Err(PlsError::InvalidArgument(format!(
            "l_max = {l_max} must lie in 1..={}",
            d.d()
        )));
    }
    let mut state = NipalsState::new(d)?;
    let mut x_deflated_norms = vec![d.x.frobenius()];
    while state.l_done < l_max && state.step() {
        x_deflated_norms.push(state.x_deflated.frobenius());
    }
    if state.l_done == 0 {
        return Err(PlsError::DegenerateDirection);
    }

    let w_mat = Matrix::from_columns(&state.w)?;
    let t_mat = Matrix::from_columns(&state.t)?;
    let p_mat = Matrix::from_columns(&state.p)?;
    let d_norms: Vec<T> = state.t.iter().map(|t| norm(t)).collect();

    let mut betas = Vec::with_capacity(state.l_done);
    let mut r_mat = Matrix::zeros(d.d(), 0);
    for l in 1..=state.l_done {
        r_mat = rotation(&w_mat.leading_columns(l), &p_mat.leading_columns(l))?;
        betas.push(r_mat.matvec(&state.q[..l]));
    }

    Ok(PlsFit {
        w_mat,
        t_mat,
        p_mat,
        q_row: state.q,
        r_mat,
        d_norms,
        coefficient_path: CoefficientPath { betas },
        x_deflated: state.x_deflated,
        x_deflated_norms,
        l_requested: l_max,
    })
}

/// Applies `∏ (I − t_i t_i^T / t_i^T t_i)` to `v`, innermost factor first.
fn project_out_scores<T: Scalar>(t_mat: &Matrix<T>, v: &[T]) -> Vec<T> {
    let mut out = v.to_vec();
    for l in 0..t_mat.cols() {
        let t = t_mat.column(l);
        let f = dot(&t, &out) / dot(&t, &t);
        for (o, &ti) in out.iter_mut().zip(&t) {
            *o -= f * ti;
        }
    }
    out
}

/// Largest entry of `X − T P^T − X_L` and of `y − T q − y_L`, with `y_L` rebuilt
/// from the product of score projectors.
pub fn deflation_reconstruction_check<T: Scalar>(fit: &PlsFit<T>, d: &Dataset<T>) -> T {
    let tp = fit
        .t_mat
        .matmul(&fit.p_mat.transpose())
        .expect("conforming score/loading shapes");
    let x_resid = d
        .x
        .sub(&tp)
        .and_then(|m| m.sub(&fit.x_deflated))
        .map(|m| m.max_abs())
        .unwrap_or_else(|_| T::infinity());
    let y_l = project_out_scores(&fit.t_mat, &d.y);
    let tq = fit.t_mat.matvec(&fit.q_row);
    let y_resid = d
        .y
        .iter()
        .zip(&tq)
        .zip(&y_l)
        .fold(T::zero(), |m, ((&y, &a), &b)| m.max((y - a - b).abs()));
    x_resid.max(y_resid)
}

/// Residuals of the structural NIPALS identities, each relative to the scale
/// of the quantity being compared.
#[derive(Debug, Clone, Copy)]
pub struct StructuralResiduals<T> {
    /// `max_{i≠j} |t_i^T t_j| / (‖t_i‖ ‖t_j‖)`.
    pub score_orthogonality: T,
    /// `max |diag(T^T T) − d_norms²| / max d_norms²`.
    pub score_norms: T,
    /// `‖X_L W_L‖_max / ‖X‖_max`.
    pub deflated_times_weights: T,
    /// `‖P_L − X^T T_L D_L^{-2}‖_max / ‖P_L‖_max`.
    pub loading_identity: T,
    /// `‖X R_L − T_L‖_F / ‖T_L‖_F`.
    pub rotation_identity: T,
    /// `max_l |‖w_l‖ − 1|`.
    pub weight_norm: T,
    /// Reconstruction check, relative to `max(‖X‖_max, ‖y‖_max)`.
    pub reconstruction: T,
    /// `‖X_l‖_F` and `‖y_l‖` never increase with `l`.
    pub frobenius_monotone: bool,
}

impl<T: Scalar> StructuralResiduals<T> {
    pub fn worst(&self) -> T {
        [
            self.score_orthogonality,
            self.score_norms,
            self.deflated_times_weights,
            self.loading_identity,
            self.rotation_identity,
            self.weight_norm,
            self.reconstruction,
        ]
        .into_iter()
        .fold(T::zero(), T::max)
    }
}

pub fn structural_residuals<T: Scalar>(fit: &PlsFit<T>, d: &Dataset<T>) -> StructuralResiduals<T> {
    let l = fit.l_achieved();
    let tt = fit.t_mat.transpose().matmul(&fit.t_mat).expect("T^T T");
    let mut score_orthogonality = T::zero();
    let mut score_norms = T::zero();
    let max_d2 = fit.d_norms.iter().fold(T::zero(), |m, &v| m.max(v * v));
    for i in 0..l {
        score_norms = score_norms.max((tt[(i, i)] - fit.d_norms[i] * fit.d_norms[i]).abs() / max_d2);
        for j in 0..l {
            if i != j {
                let r = tt[(i, j)].abs() / (fit.d_norms[i] * fit.d_norms[j]);
                score_orthogonality = score_orthogonality.max(r);
            }
        }
    }

    let xscale = d.x.max_abs();
    let deflated_times_weights =
        fit.x_deflated.matmul(&fit.w_mat).expect("X_L W_L").max_abs() / xscale;

    let xt_t = d.x.transpose().matmul(&fit.t_mat).expect("X^T T");
    let scaled = Matrix::from_fn(xt_t.rows(), l, |i, j| {
        xt_t[(i, j)] / (fit.d_norms[j] * fit.d_norms[j])
    });
    let loading_identity =
        scaled.sub(&fit.p_mat).expect("P shape").max_abs() / fit.p_mat.max_abs();

    let xr = d.x.matmul(&fit.r_mat).expect("X R");
    let rotation_identity =
        xr.sub(&fit.t_mat).expect("T shape").frobenius() / fit.t_mat.frobenius();

    let weight_norm = (0..l)
        .map(|k| (norm(&fit.w_mat.column(k)) - T::one()).abs())
        .fold(T::zero(), T::max);

    let yscale = d.y.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let reconstruction = deflation_reconstruction_check(fit, d) / xscale.max(yscale);

    let x_mono = fit
        .x_deflated_norms
        .windows(2)
        .all(|w| w[1] <= w[0] * (T::one() + T::lit(1e-12)));
    let mut y_norms = vec![norm(&d.y)];
    let mut y_l = d.y.clone();
    for k in 0..l {
        let t = fit.t_mat.column(k);
        let f = dot(&t, &y_l) / dot(&t, &t);
        for (o, &ti) in y_l.iter_mut().zip(&t) {
            *o -= f * ti;
        }
        y_norms.push(norm(&y_l));
    }
    let y_mono = y_norms
        .windows(2)
        .all(|w| w[1] <= w[0] * (T::one() + T::lit(1e-12)));

    StructuralResiduals {
        score_orthogonality,
        score_norms,
        deflated_times_weights,
        loading_identity,
        rotation_identity,
        weight_norm,
        reconstruction,
        frobenius_monotone: x_mono && y_mono,
    }
}
