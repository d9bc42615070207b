//! Distances between PLS and OLS in the quadratic-form norm and the
//! moment-based bound on them.
//!
//! `NED_L = ‖β_PLS^(L) − β_OLS‖²_Σ / ‖β_OLS‖²_Σ` is bounded by
//! `C_L = D (1 − c_L^T H_L^{-1} c_L)`, where `H_L` is the Hankel matrix of the
//! raw eigenvalue moments `μ'_2 … μ'_{2L}` and `c_L = (μ'_1 … μ'_L)`.
//! Equivalently `C_L = min_a Σ_d (−1 + Σ_j a_j λ_d^j)²`, which is how it is
//! evaluated here: the least-squares residual of the all-ones vector against
//! an orthonormal basis of `span{λ, λ², …, λ^L}` on the spectrum. The Hankel
//! system is still solved to expose `a*_L` and `cond(H_L)`.

use crate::error::{PlsError, Result};
use crate::krylov::krylov_basis;
use crate::model::Dataset;
use crate::numerics::{condition_number_sym, solve_spd_detailed, Matrix};
use crate::scalar::{dot, Scalar};

/// Denominator of NED below this counts as a degenerate OLS fit.
pub const OLS_NORM_FLOOR: f64 = 1e-14;
/// Clamping of `C_L` into `[0, D]` is flagged when it moves the value by more.
pub const CLAMP_FLAG_TOL: f64 = 1e-8;
/// Eigenvalues closer than this fraction of `λ_max` count as one.
pub const DISTINCT_RTOL: f64 = 1e-8;
/// `q(0)` must equal `−1` to this tolerance in [`generic_poly_bound`].
pub const CONSTRAINT_TOL: f64 = 1e-12;
/// Hankel / weighted normal systems solved with a relative residual above this
/// are flagged ill-conditioned.
pub const ILL_CONDITIONED_RESIDUAL: f64 = 1e-6;

/// `v^T Σ v`.
pub fn sigma_norm_sq<T: Scalar>(v: &[T], sxx: &Matrix<T>) -> T {
    dot(v, &sxx.matvec(v))
}

pub fn ned<T: Scalar>(beta_pls: &[T], beta_ols: &[T], sxx: &Matrix<T>) -> Result<T> {
    if beta_pls.len() != beta_ols.len() || beta_ols.len() != sxx.rows() {
        return Err(PlsError::DimensionMismatch("NED operands".into()));
    }
    let denom = sigma_norm_sq(beta_ols, sxx);
    if !(denom > T::lit(OLS_NORM_FLOOR)) {
        return Err(PlsError::DegenerateOls);
    }
    let diff: Vec<T> = beta_pls.iter().zip(beta_ols).map(|(&a, &b)| a - b).collect();
    Ok(sigma_norm_sq(&diff, sxx) / denom)
}

/// `(1/σ²) ‖β − β_OLS‖²_Σ` with `Σ = X^T X` of the dataset.
pub fn mahalanobis_check<T: Scalar>(
    beta: &[T],
    beta_ols: &[T],
    d: &Dataset<T>,
    sigma_sq: T,
) -> Result<T> {
    if !(sigma_sq > T::zero()) {
        return Err(PlsError::InvalidArgument("noise variance must be positive".into()));
    }
    let diff: Vec<T> = beta.iter().zip(beta_ols).map(|(&a, &b)| a - b).collect();
    Ok(sigma_norm_sq(&diff, &d.x.gram()) / sigma_sq)
}

/// Number of eigenvalues distinct at tolerance `DISTINCT_RTOL · λ_max`.
pub fn distinct_eigenvalue_count<T: Scalar>(lambdas: &[T]) -> usize {
    let mut sorted = lambdas.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    let Some(&top) = sorted.first() else {
        return 0;
    };
    let tol = T::lit(DISTINCT_RTOL) * top.abs();
    1 + sorted.windows(2).filter(|w| w[0] - w[1] > tol).count()
}

/// Population moments of an eigenvalue sample.
#[derive(Debug, Clone)]
pub struct MomentSet<T> {
    pub lambdas: Vec<T>,
    /// `raw_moments[k]` is `μ'_{k+1} = (1/D) Σ λ^{k+1}`, for `k < 2 l_max`.
    pub raw_moments: Vec<T>,
    /// Raw moments of `λ / λ_max`.
    pub scaled_moments: Vec<T>,
    pub lambda_max: T,
    pub d_count: usize,
    pub mean: T,
    pub std: T,
    pub cv: T,
    pub skewness: T,
    /// Non-excess kurtosis `m_4 / σ⁴`.
    pub kurtosis: T,
    /// Zero spread: skewness and kurtosis are reported as 0.
    pub degenerate: bool,
}

impl<T: Scalar> MomentSet<T> {
    pub fn l_max(&self) -> usize {
        self.raw_moments.len() / 2
    }

    /// `μ'_k` for `k >= 1`.
    pub fn raw(&self, k: usize) -> T {
        self.raw_moments[k - 1]
    }
}

pub fn moments<T: Scalar>(lambdas: &[T], l_max: usize) -> Result<MomentSet<T>> {
    if lambdas.is_empty() || l_max == 0 {
        return Err(PlsError::InvalidArgument("need D >= 1 and l_max >= 1".into()));
    }
    let dn = T::from_usize(lambdas.len()).expect("count");
    let lambda_max = lambdas.iter().fold(T::zero(), |m, &l| m.max(l.abs()));
    let scale = if lambda_max > T::zero() { lambda_max } else { T::one() };
    let mut raw_moments = Vec::with_capacity(2 * l_max);
    let mut scaled_moments = Vec::with_capacity(2 * l_max);
    let mut pw = vec![T::one(); lambdas.len()];
    let mut spw = vec![T::one(); lambdas.len()];
    for _ in 0..2 * l_max {
        for ((p, s), &l) in pw.iter_mut().zip(spw.iter_mut()).zip(lambdas) {
            *p *= l;
            *s *= l / scale;
        }
        raw_moments.push(pw.iter().copied().sum::<T>() / dn);
        scaled_moments.push(spw.iter().copied().sum::<T>() / dn);
    }
    let mean = lambdas.iter().copied().sum::<T>() / dn;
    let central = |k: i32| lambdas.iter().map(|&l| (l - mean).powi(k)).sum::<T>() / dn;
    let var = central(2);
    let std = var.sqrt();
    let degenerate = !(std > T::epsilon() * mean.abs().max(T::min_positive_value()));
    let (skewness, kurtosis) = if degenerate {
        (T::zero(), T::zero())
    } else {
        (central(3) / (var * std), central(4) / (var * var))
    };
    let cv = if mean != T::zero() && !degenerate { std / mean } else { T::zero() };
    Ok(MomentSet {
        lambdas: lambdas.to_vec(),
        raw_moments,
        scaled_moments,
        lambda_max,
        d_count: lambdas.len(),
        mean,
        std: if degenerate { T::zero() } else { std },
        cv,
        skewness,
        kurtosis,
        degenerate,
    })
}

/// One order of the moment bound.
#[derive(Debug, Clone)]
pub struct HankelBound<T> {
    pub order: usize,
    /// Bound value, clamped to `[0, D]`.
    pub c_l: T,
    /// `D (1 − c^T a*)` straight from the Hankel solve.
    pub c_l_formula: T,
    /// `a*_L` in the original eigenvalue units: `R*(t) = −1 + Σ_j a_j t^j`.
    pub a_star: Vec<T>,
    /// Condition number of the Hankel matrix of normalised moments.
    pub condition: T,
    pub clamped: bool,
    pub ill_conditioned: bool,
}

/// Evaluates `C_L` for `L = l`.
pub fn hankel_bound<T: Scalar>(ms: &MomentSet<T>, l: usize) -> Result<HankelBound<T>> {
    if l == 0 || 2 * l > ms.raw_moments.len() {
        return Err(PlsError::InvalidArgument(format!(
            "order {l} needs moments up to {}, have {}",
            2 * l,
            ms.raw_moments.len()
        )));
    }
    let dn = T::from_usize(ms.d_count).expect("count");
    let scale = if ms.lambda_max > T::zero() { ms.lambda_max } else { T::one() };

    let h = Matrix::from_fn(l, l, |i, j| ms.scaled_moments[i + j + 1]);
    let c: Vec<T> = ms.scaled_moments[..l].to_vec();
    let sol = solve_spd_detailed(&h, &c)?;
    let condition = condition_number_sym(&h)?;
    let c_l_formula = dn * (T::one() - dot(&c, &sol.x));
    let mut a_star = sol.x.clone();
    let mut f = T::one();
    for a in &mut a_star {
        f *= scale;
        *a /= f;
    }

    let raw = residual_of_ones(&ms.lambdas, scale, l)?;
    let upper = dn;
    let c_l = raw.max(T::zero()).min(upper);
    let clamped = (c_l - raw).abs() > T::lit(CLAMP_FLAG_TOL);
    Ok(HankelBound {
        order: l,
        c_l,
        c_l_formula,
        a_star,
        condition,
        clamped,
        ill_conditioned: sol.relative_residual > T::lit(ILL_CONDITIONED_RESIDUAL),
    })
}

/// `min_a ‖1 − V a‖²` with `V_dj = (λ_d / scale)^j`, `j = 1..l`, via an
/// orthonormal basis of the column span.
fn residual_of_ones<T: Scalar>(lambdas: &[T], scale: T, l: usize) -> Result<T> {
    weighted_residual_of_ones(lambdas, &vec![T::one(); lambdas.len()], scale, l)
}

/// `min_a Σ_d w_d (1 − Σ_j a_j (λ_d/scale)^j)²`. The column span of the
/// weighted Vandermonde matrix is the Krylov space of `diag(λ/scale)` started
/// at `√w ∘ λ/scale`.
fn weighted_residual_of_ones<T: Scalar>(lambdas: &[T], weights: &[T], scale: T, l: usize) -> Result<T> {
    let target: Vec<T> = weights.iter().map(|w| w.sqrt()).collect();
    let total = dot(&target, &target);
    let s: Vec<T> = lambdas.iter().map(|&v| v / scale).collect();
    let start: Vec<T> = target.iter().zip(&s).map(|(&t, &v)| t * v).collect();
    if start.iter().all(|&v| v == T::zero()) {
        return Ok(total);
    }
    let order = l.min(lambdas.len());
    let basis = krylov_basis(&Matrix::diag(&s), &start, order)?;
    let proj = basis.ortho.tr_matvec(&target);
    Ok(total - dot(&proj, &proj))
}

/// Bounds for `L = 1..=l_max`.
#[derive(Debug, Clone)]
pub struct BoundSeries<T> {
    pub c_l_values: Vec<T>,
    pub optimal_coeffs: Vec<Vec<T>>,
    pub hankel_condition: Vec<T>,
    pub clamped: Vec<bool>,
    pub ill_conditioned: Vec<bool>,
}

pub fn bound_series<T: Scalar>(ms: &MomentSet<T>, l_max: usize) -> Result<BoundSeries<T>> {
    let mut out = BoundSeries {
        c_l_values: Vec::with_capacity(l_max),
        optimal_coeffs: Vec::with_capacity(l_max),
        hankel_condition: Vec::with_capacity(l_max),
        clamped: Vec::with_capacity(l_max),
        ill_conditioned: Vec::with_capacity(l_max),
    };
    for l in 1..=l_max {
        let hb = hankel_bound(ms, l)?;
        // the feasible sets are nested, so rounding must not make C_L grow
        let c = match out.c_l_values.last() {
            Some(&prev) => hb.c_l.min(prev),
            None => hb.c_l,
        };
        out.c_l_values.push(c);
        out.optimal_coeffs.push(hb.a_star);
        out.hankel_condition.push(hb.condition);
        out.clamped.push(hb.clamped);
        out.ill_conditioned.push(hb.ill_conditioned);
    }
    Ok(out)
}

/// `C_1` and `C_2` from the mean, spread, skewness and kurtosis alone.
#[derive(Debug, Clone, Copy)]
pub struct ClosedForm<T> {
    pub c1: T,
    /// Second-order value using the denominator
    /// `(κ−γ²)c⁴ + (κ−3−2γ)c³ − 2γc + 1`.
    pub c2: T,
    pub degenerate: bool,
}

pub fn closed_form_c1_c2<T: Scalar>(ms: &MomentSet<T>) -> ClosedForm<T> {
    if ms.degenerate {
        return ClosedForm {
            c1: T::zero(),
            c2: T::zero(),
            degenerate: true,
        };
    }
    let dn = T::from_usize(ms.d_count).expect("count");
    let (c, g, k) = (ms.cv, ms.skewness, ms.kurtosis);
    let c2v = c * c;
    let c1 = dn * c2v / (T::one() + c2v);
    let num = dn * c2v * c2v * (k - g * g - T::one());
    let den = (k - g * g) * c2v * c2v + (k - T::lit(3.0) - T::lit(2.0) * g) * c2v * c
        - T::lit(2.0) * g * c
        + T::one();
    ClosedForm {
        c1,
        c2: num / den,
        degenerate: false,
    }
}

/// `C_2` rederived from `D(1 − c^T H^{-1} c)` in terms of `c_v`, `γ`, `κ`:
/// denominator `(κ−γ²)c⁴ − 2γc³ + (κ−3)c² + 2γc + 1`.
pub fn closed_form_c2_rederived<T: Scalar>(ms: &MomentSet<T>) -> T {
    if ms.degenerate {
        return T::zero();
    }
    let dn = T::from_usize(ms.d_count).expect("count");
    let (c, g, k) = (ms.cv, ms.skewness, ms.kurtosis);
    let c2v = c * c;
    let num = dn * c2v * c2v * (k - g * g - T::one());
    let den = (k - g * g) * c2v * c2v - T::lit(2.0) * g * c2v * c
        + (k - T::lit(3.0)) * c2v
        + T::lit(2.0) * g * c
        + T::one();
    num / den
}

/// Agreement of the closed forms with the Hankel route over a set of spectra.
#[derive(Debug, Clone, Default)]
pub struct ClosedFormReport {
    pub spectra: usize,
    pub max_rel_c1: f64,
    pub max_rel_c2_printed: f64,
    pub max_rel_c2_rederived: f64,
    /// Spectra on which the printed `C_2` misses the Hankel value by more than the tolerance.
    pub c2_printed_mismatches: usize,
    pub worst_case: Option<C2Mismatch>,
}

#[derive(Debug, Clone)]
pub struct C2Mismatch {
    pub hankel: f64,
    pub printed: f64,
    pub rederived: f64,
    pub cv: f64,
    pub skewness: f64,
    pub kurtosis: f64,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn closed_form_report<T: Scalar>(spectra: &[Vec<T>], tol: f64) -> Result<ClosedFormReport> {
    let mut rep = ClosedFormReport::default();
    for lambdas in spectra {
        let ms = moments(lambdas, 2)?;
        let h1 = hankel_bound(&ms, 1)?.c_l.to_f64_lossy();
        let h2 = hankel_bound(&ms, 2)?.c_l.to_f64_lossy();
        let cf = closed_form_c1_c2(&ms);
        let (c1, c2p) = (cf.c1.to_f64_lossy(), cf.c2.to_f64_lossy());
        let c2r = closed_form_c2_rederived(&ms).to_f64_lossy();
        rep.spectra += 1;
        rep.max_rel_c1 = rep.max_rel_c1.max(rel(h1, c1));
        rep.max_rel_c2_rederived = rep.max_rel_c2_rederived.max(rel(h2, c2r));
        let r2 = rel(h2, c2p);
        if r2 > tol {
            rep.c2_printed_mismatches += 1;
        }
        if r2 > rep.max_rel_c2_printed {
            rep.max_rel_c2_printed = r2;
            rep.worst_case = Some(C2Mismatch {
                hankel: h2,
                printed: c2p,
                rederived: c2r,
                cv: ms.cv.to_f64_lossy(),
                skewness: ms.skewness.to_f64_lossy(),
                kurtosis: ms.kurtosis.to_f64_lossy(),
            });
        }
    }
    Ok(rep)
}

impl std::fmt::Display for ClosedFormReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "closed-form vs Hankel over {} spectra", self.spectra)?;
        writeln!(f, "  C1 max relative difference: {:.3e}", self.max_rel_c1)?;
        writeln!(
            f,
            "  C2 (printed denominator) max relative difference: {:.3e}, mismatching spectra: {}",
            self.max_rel_c2_printed, self.c2_printed_mismatches
        )?;
        writeln!(
            f,
            "  C2 (rederived denominator) max relative difference: {:.3e}",
            self.max_rel_c2_rederived
        )?;
        if let Some(w) = &self.worst_case {
            write!(
                f,
                "  worst: Hankel {:.6} printed {:.6} rederived {:.6} (c_v {:.4}, skew {:.4}, kurt {:.4})",
                w.hankel, w.printed, w.rederived, w.cv, w.skewness, w.kurtosis
            )?;
        }
        Ok(())
    }
}

/// Per-order fit of the optimal residual polynomial `Q*_L(t) = −1 + Σ a_j t^j`
/// under weights `λ_d ξ_d²`.
#[derive(Debug, Clone)]
pub struct QStarFit<T> {
    /// Coefficients `a_1..a_L` in units of `λ / scale`.
    normalized: Vec<T>,
    /// Condition number of the weighted normal matrix (normalised units).
    pub condition: T,
    pub relative_residual: T,
    pub ill_conditioned: bool,
}

#[derive(Debug, Clone)]
pub struct ErrorSpectrum<T> {
    pub lambdas: Vec<T>,
    pub xis: Vec<T>,
    scale: T,
    /// `q_star[l - 1]` holds the order-`l` fit.
    pub q_star: Vec<QStarFit<T>>,
}

impl<T: Scalar> ErrorSpectrum<T> {
    pub fn new(lambdas: &[T], xis: &[T], l_max: usize) -> Result<Self> {
        if lambdas.len() != xis.len() || lambdas.is_empty() {
            return Err(PlsError::DimensionMismatch("eigenvalues vs coordinates".into()));
        }
        let top = lambdas.iter().fold(T::zero(), |m, &l| m.max(l.abs()));
        let scale = if top > T::zero() { top } else { T::one() };
        let s: Vec<T> = lambdas.iter().map(|&l| l / scale).collect();
        let w: Vec<T> = lambdas.iter().zip(xis).map(|(&l, &x)| l * x * x).collect();
        let mut q_star = Vec::with_capacity(l_max);
        for l in 1..=l_max {
            // normal equations: Σ_d w_d s_d^{i+j} a_j = Σ_d w_d s_d^i
            let g = Matrix::from_fn(l, l, |i, j| {
                s.iter()
                    .zip(&w)
                    .map(|(&sd, &wd)| wd * sd.powi((i + j + 2) as i32))
                    .sum()
            });
            let rhs: Vec<T> = (0..l)
                .map(|i| s.iter().zip(&w).map(|(&sd, &wd)| wd * sd.powi(i as i32 + 1)).sum())
                .collect();
            let sol = solve_spd_detailed(&g, &rhs)?;
            q_star.push(QStarFit {
                normalized: sol.x,
                condition: condition_number_sym(&g)?,
                relative_residual: sol.relative_residual,
                ill_conditioned: sol.relative_residual > T::lit(ILL_CONDITIONED_RESIDUAL),
            });
        }
        Ok(Self {
            lambdas: lambdas.to_vec(),
            xis: xis.to_vec(),
            scale,
            q_star,
        })
    }

    /// Coefficients `(−1, a_1, …, a_L)` of `Q*_L` in the original units.
    pub fn q_star_coeffs(&self, l: usize) -> Option<Vec<T>> {
        let fit = self.q_star.get(l.checked_sub(1)?)?;
        let mut out = vec![-T::one()];
        let mut f = T::one();
        for &a in &fit.normalized {
            f *= self.scale;
            out.push(a / f);
        }
        Some(out)
    }

    /// `Q*_L(λ)`.
    pub fn q_star_at(&self, l: usize, lambda: T) -> Option<T> {
        let fit = self.q_star.get(l.checked_sub(1)?)?;
        let s = lambda / self.scale;
        let mut acc = T::zero();
        for &a in fit.normalized.iter().rev() {
            acc = (acc + a) * s;
        }
        Some(acc - T::one())
    }

    /// `Σ_d λ_d ξ_d² = ‖β_OLS‖²_Σ`.
    pub fn ols_norm_sq(&self) -> T {
        self.lambdas.iter().zip(&self.xis).map(|(&l, &x)| l * x * x).sum()
    }
}

/// `Σ_d Q*_L(λ_d)² λ_d ξ_d²`.
pub fn error_via_polynomial<T: Scalar>(es: &ErrorSpectrum<T>, l: usize) -> Result<T> {
    let fit = es
        .q_star
        .get(l.wrapping_sub(1))
        .ok_or_else(|| PlsError::InvalidArgument(format!("no Q* fitted for order {l}")))?;
    if fit.ill_conditioned {
        return Err(PlsError::IllConditioned {
            order: l,
            residual: fit.relative_residual.to_f64_lossy(),
        });
    }
    Ok(es
        .lambdas
        .iter()
        .zip(&es.xis)
        .map(|(&lam, &x)| {
            let q = es.q_star_at(l, lam).expect("fitted order");
            q * q * lam * x * x
        })
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolyBoundMode {
    /// `Σ_d q(λ_d)² λ_d ξ_d²`.
    WeightedSum,
    /// `(Σ_d q(λ_d)²) ‖β_OLS‖²_Σ`.
    H2TimesNorm,
    /// `(max_d q(λ_d)²) ‖β_OLS‖²_Σ`.
    H1TimesNorm,
}

fn horner<T: Scalar>(coeffs: &[T], t: T) -> T {
    coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * t + c)
}

/// Error bound from an arbitrary residual polynomial with `q(0) = −1`,
/// coefficients in ascending powers.
pub fn generic_poly_bound<T: Scalar>(
    q_coeffs: &[T],
    es: &ErrorSpectrum<T>,
    mode: PolyBoundMode,
) -> Result<T> {
    let q0 = q_coeffs.first().copied().unwrap_or_else(T::zero);
    if (q0 + T::one()).abs() > T::lit(CONSTRAINT_TOL) {
        return Err(PlsError::ConstraintViolated {
            value: q0.to_f64_lossy(),
        });
    }
    let sq: Vec<T> = es
        .lambdas
        .iter()
        .map(|&l| {
            let q = horner(q_coeffs, l);
            q * q
        })
        .collect();
    Ok(match mode {
        PolyBoundMode::WeightedSum => sq
            .iter()
            .zip(es.lambdas.iter().zip(&es.xis))
            .map(|(&q2, (&l, &x))| q2 * l * x * x)
            .sum(),
        PolyBoundMode::H2TimesNorm => sq.iter().copied().sum::<T>() * es.ols_norm_sq(),
        PolyBoundMode::H1TimesNorm => sq.iter().fold(T::zero(), |m, &v| m.max(v)) * es.ols_norm_sq(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::running_example;

    const NED1: f64 = 2340.0 / 4225.0 / 5.0;

    #[test]
    fn sigma_norm_cases() {
        let sxx = Matrix::diag(&[1.0f64, 4.0]);
        assert_eq!(sigma_norm_sq(&[0.0, 0.0], &sxx), 0.0);
        assert_eq!(sigma_norm_sq(&[3.0, 4.0], &Matrix::identity(2)), 25.0);
        let v = [-48.0 / 65.0, 3.0 / 65.0];
        assert!((sigma_norm_sq(&v, &sxx) - 2340.0 / 4225.0).abs() < 1e-15);
    }

    #[test]
    fn ned_cases() {
        let sxx = Matrix::diag(&[1.0f64, 4.0]);
        let ols = [1.0, 1.0];
        assert_eq!(ned(&ols, &ols, &sxx).unwrap(), 0.0);
        assert!((ned(&[0.0, 0.0], &ols, &sxx).unwrap() - 1.0).abs() < 1e-15);
        let pls = [17.0 / 65.0, 68.0 / 65.0];
        assert!((ned(&pls, &ols, &sxx).unwrap() - NED1).abs() < 1e-15);
        assert!(matches!(ned(&ols, &[0.0, 0.0], &sxx), Err(PlsError::DegenerateOls)));
    }

    #[test]
    fn mahalanobis_scaling() {
        let d = running_example::<f64>();
        let pls = [17.0 / 65.0, 68.0 / 65.0];
        let v = mahalanobis_check(&pls, &[1.0, 1.0], &d, 0.25).unwrap();
        assert!((v - 4.0 * 2340.0 / 4225.0).abs() < 1e-13);
        assert_eq!(mahalanobis_check(&[1.0, 1.0], &[1.0, 1.0], &d, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn moments_constant_and_dichotomous() {
        let ms = moments(&[5.0f64; 4], 3).unwrap();
        assert!(ms.degenerate && ms.cv == 0.0);
        for k in 1..=6 {
            assert!((ms.raw(k) - 5f64.powi(k as i32)).abs() < 1e-9 * 5f64.powi(k as i32));
        }
        let ms = moments(&[2.5f64, 7.5, 2.5, 7.5], 2).unwrap();
        assert!((ms.kurtosis - ms.skewness.powi(2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn moments_equally_spaced_variance() {
        let lambdas: Vec<f64> = (0..30).map(|i| 2.5 + 5.0 * i as f64 / 29.0).collect();
        let ms = moments(&lambdas, 1).unwrap();
        assert!((ms.mean - 5.0).abs() < 1e-13);
        let expected = (5.0f64 / 29.0).powi(2) * (900.0 - 1.0) / 12.0;
        assert!((ms.std * ms.std - expected).abs() < 1e-12);
        assert!(ms.kurtosis >= 1.0 + ms.skewness.powi(2) - 1e-9);
    }

    #[test]
    fn running_example_bound() {
        let ms = moments(&[1.0f64, 4.0], 2).unwrap();
        let b = hankel_bound(&ms, 1).unwrap();
        assert!((b.c_l - 9.0 / 17.0).abs() < 1e-14);
        assert!((b.c_l_formula - 9.0 / 17.0).abs() < 1e-14);
        assert!((b.a_star[0] - 2.5 / 8.5).abs() < 1e-14);
        assert!(b.c_l >= NED1);
        let b2 = hankel_bound(&ms, 2).unwrap();
        assert!(b2.c_l.abs() < 1e-12);
        assert!(hankel_bound(&ms, 3).is_err());
    }

    #[test]
    fn constant_spectrum_bound_vanishes() {
        let ms = moments(&[3.0f64; 6], 4).unwrap();
        let s = bound_series(&ms, 4).unwrap();
        assert!(s.c_l_values.iter().all(|c| c.abs() < 1e-12));
    }

    #[test]
    fn bound_is_scale_invariant_and_monotone() {
        let lambdas: Vec<f64> = (0..20).map(|i| 0.3 + (i as f64 * 1.7).sin().abs() * 4.0).collect();
        let big: Vec<f64> = lambdas.iter().map(|l| l * 1000.0).collect();
        let a = bound_series(&moments(&lambdas, 8).unwrap(), 8).unwrap();
        let b = bound_series(&moments(&big, 8).unwrap(), 8).unwrap();
        for (x, y) in a.c_l_values.iter().zip(&b.c_l_values) {
            assert!((x - y).abs() <= 1e-9 * x.abs().max(1e-12), "{x} vs {y}");
        }
        assert!(a.c_l_values.windows(2).all(|w| w[1] <= w[0]));
        assert!(a.c_l_values.iter().all(|&c| (0.0..=20.0).contains(&c)));
    }

    #[test]
    fn c1_matches_closed_form() {
        let lambdas: Vec<f64> = (0..30).map(|i| 2.5 + 5.0 * i as f64 / 29.0).collect();
        let ms = moments(&lambdas, 2).unwrap();
        let cf = closed_form_c1_c2(&ms);
        let h = hankel_bound(&ms, 1).unwrap().c_l;
        assert!((cf.c1 - h).abs() <= 1e-9 * h);
        assert!((cf.c1 - 30.0 * ms.cv.powi(2) / (1.0 + ms.cv.powi(2))).abs() < 1e-12);
    }

    #[test]
    fn rederived_c2_matches_hankel() {
        let lambdas = [0.4f64, 1.0, 2.2, 3.1, 7.7, 9.0, 5.5];
        let ms = moments(&lambdas, 2).unwrap();
        let h = hankel_bound(&ms, 2).unwrap().c_l;
        assert!((closed_form_c2_rederived(&ms) - h).abs() <= 1e-9 * h);
    }

    #[test]
    fn dichotomous_c2_vanishes() {
        let ms = moments(&[1.0f64, 1.0, 6.0, 6.0], 2).unwrap();
        let cf = closed_form_c1_c2(&ms);
        assert!(cf.c2.abs() < 1e-12);
        assert!(closed_form_c2_rederived(&ms).abs() < 1e-12);
        let zero = closed_form_c1_c2(&moments(&[2.0f64; 3], 2).unwrap());
        assert!(zero.degenerate && zero.c1 == 0.0 && zero.c2 == 0.0);
    }

    #[test]
    fn distinct_count() {
        assert_eq!(distinct_eigenvalue_count(&[4.0f64, 1.0, 4.0 * (1.0 + 1e-12), 1.0]), 2);
        assert_eq!(distinct_eigenvalue_count(&[3.0f64]), 1);
        assert_eq!(distinct_eigenvalue_count::<f64>(&[]), 0);
    }

    #[test]
    fn polynomial_identity_running_example() {
        // eigenpairs of diag(1,4) with β_OLS = (1,1)
        let es = ErrorSpectrum::new(&[4.0f64, 1.0], &[1.0, 1.0], 2).unwrap();
        let err = error_via_polynomial(&es, 1).unwrap();
        assert!((err - 2340.0 / 4225.0).abs() < 1e-13);
        assert!(error_via_polynomial(&es, 2).unwrap().abs() < 1e-12);
        assert!((es.ols_norm_sq() - 5.0).abs() < 1e-15);
        let q = es.q_star_coeffs(1).unwrap();
        assert_eq!(q[0], -1.0);
    }

    #[test]
    fn single_eigenvalue_polynomial() {
        let es = ErrorSpectrum::new(&[2.5f64], &[0.7], 1).unwrap();
        let q = es.q_star_coeffs(1).unwrap();
        assert!((q[1] - 1.0 / 2.5).abs() < 1e-15);
        assert!(error_via_polynomial(&es, 1).unwrap().abs() < 1e-15);
    }

    #[test]
    fn generic_bounds() {
        let es = ErrorSpectrum::new(&[4.0f64, 1.0, 2.0], &[1.0, 1.0, -0.5], 2).unwrap();
        let norm = es.ols_norm_sq();
        let ws = generic_poly_bound(&[-1.0], &es, PolyBoundMode::WeightedSum).unwrap();
        assert!((ws - norm).abs() < 1e-14);
        let q = es.q_star_coeffs(1).unwrap();
        let opt = generic_poly_bound(&q, &es, PolyBoundMode::WeightedSum).unwrap();
        let truth = error_via_polynomial(&es, 1).unwrap();
        assert!((opt - truth).abs() < 1e-12);
        for mode in [PolyBoundMode::H2TimesNorm, PolyBoundMode::H1TimesNorm] {
            assert!(generic_poly_bound(&q, &es, mode).unwrap() >= truth - 1e-9);
        }
        assert!(matches!(
            generic_poly_bound(&[-0.5, 1.0], &es, PolyBoundMode::WeightedSum),
            Err(PlsError::ConstraintViolated { .. })
        ));
    }
}
