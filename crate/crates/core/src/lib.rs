//! Scalar-response partial least squares regression.
//!
//! Three routes to the same estimator live side by side: NIPALS deflation
//! ([`nipals`]), least squares restricted to the Krylov subspace
//! `K_L(X^T X, X^T y)` and conjugate gradients on the normal equations
//! ([`krylov`]). The [`bounds`] module bounds the quadratic-form distance
//! between the `L`-component PLS estimator and OLS using only raw moments of
//! the eigenvalues of `X^T X`. [`synth`], [`ingest`] and [`experiment`] produce
//! the data and plot-ready CSV tables.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix the double-precision instantiation used by the CLI.

pub mod bounds;
pub mod commands;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod fixtures;
pub mod ingest;
pub mod krylov;
pub mod model;
pub mod nipals;
pub mod numerics;
mod scalar;
pub mod synth;

pub use bounds::{bound_series, hankel_bound, moments, ned, sigma_norm_sq, BoundSeries, MomentSet};
pub use error::{PlsError, Result};
pub use estimators::{ols_fit, pcr_fit, spectrum_of, Spectrum};
pub use experiment::{ExperimentRecord, AggregateRow};
pub use synth::{generate_problem, Scenario, SyntheticProblem};
pub use model::{covariance_pair, r2_score, CoefficientPath, Dataset, FitReport, Method};
pub use nipals::{nipals_fit, PlsFit};
pub use numerics::{Matrix, SymEig};
pub use scalar::Scalar;

pub type Matrix64 = Matrix<f64>;
pub type Matrix32 = Matrix<f32>;
pub type Dataset64 = Dataset<f64>;
pub type Dataset32 = Dataset<f32>;
pub type PlsFit64 = PlsFit<f64>;
pub type SyntheticProblem64 = SyntheticProblem<f64>;
