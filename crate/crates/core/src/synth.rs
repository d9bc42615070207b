//! Synthetic regression problems with a prescribed covariance spectrum.
//!
//! A scenario lists blocks of eigenvalues, either an equally spaced grid or
//! draws from a normal cluster. The covariance is `Q^T diag(λ) Q` with `Q` a
//! Haar-random rotation, rows of `X` are `Σ^{1/2} z` for standard normal `z`,
//! coefficients are uniform on `[0, 1]` and the noise level is a tenth of the
//! spread of the signal.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{PlsError, Result};
use crate::model::Dataset;
use crate::numerics::{qr_orthonormal, sym_eig, Matrix};
use crate::scalar::Scalar;

/// Normal-cluster draws at or below this are redrawn.
pub const POSITIVITY_FLOOR: f64 = 1e-3;
pub const MAX_RESAMPLE: usize = 1000;
pub const NOISE_FRACTION: f64 = 0.1;
pub const DEFAULT_N: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Source {
    EquallySpaced { lo: f64, hi: f64 },
    NormalCluster { mean: f64, sd: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub count: usize,
    #[serde(flatten)]
    pub source: Source,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: u32,
    #[serde(default)]
    pub name: String,
    #[serde(rename = "block")]
    pub blocks: Vec<Block>,
}

fn cluster(count: usize, mean: f64) -> Block {
    Block {
        count,
        source: Source::NormalCluster { mean, sd: 0.1 },
    }
}

impl Scenario {
    /// The five built-in spectra.
    pub fn builtin(id: u32) -> Result<Self> {
        let (name, blocks) = match id {
            1 => (
                "equally spaced",
                vec![Block {
                    count: 30,
                    source: Source::EquallySpaced { lo: 2.5, hi: 7.5 },
                }],
            ),
            2 => ("one cluster", vec![cluster(30, 5.0)]),
            3 => ("two clusters", vec![cluster(15, 2.5), cluster(15, 7.5)]),
            4 => (
                "three clusters",
                vec![cluster(10, 2.5), cluster(10, 5.0), cluster(10, 7.5)],
            ),
            5 => (
                "three clusters, one near zero",
                vec![cluster(10, 0.2), cluster(10, 5.0), cluster(10, 7.5)],
            ),
            other => {
                return Err(PlsError::InvalidScenario(format!(
                    "no built-in scenario {other} (expected 1..=5)"
                )))
            }
        };
        Ok(Self {
            id,
            name: name.into(),
            blocks,
        })
    }

    /// Parses a scenario from `key = value` text:
    ///
    /// ```text
    /// id = 6
    /// name = "wide"
    /// [[block]]
    /// count = 20
    /// kind = "normal_cluster"
    /// mean = 3.0
    /// sd = 0.5
    /// ```
    pub fn from_config(text: &str) -> Result<Self> {
        let sc: Scenario =
            toml::from_str(text).map_err(|e| PlsError::InvalidScenario(e.to_string()))?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(PlsError::MissingFile(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path)
            .map_err(|e| PlsError::io(format!("reading {}", path.display()), e))?;
        Self::from_config(&text)
    }

    pub fn d_total(&self) -> usize {
        self.blocks.iter().map(|b| b.count).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocks.is_empty() || self.d_total() == 0 {
            return Err(PlsError::InvalidScenario("no eigenvalues requested".into()));
        }
        for b in &self.blocks {
            let ok = match b.source {
                Source::EquallySpaced { lo, hi } => lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi,
                Source::NormalCluster { mean, sd } => mean.is_finite() && sd.is_finite() && sd >= 0.0,
            };
            if b.count == 0 || !ok {
                return Err(PlsError::InvalidScenario(format!("invalid block {b:?}")));
            }
        }
        Ok(())
    }
}

/// Draws the scenario's eigenvalues in block order.
pub fn sample_eigenvalues<R: Rng + ?Sized>(sc: &Scenario, rng: &mut R) -> Result<Vec<f64>> {
    sc.validate()?;
    let mut out = Vec::with_capacity(sc.d_total());
    for b in &sc.blocks {
        match b.source {
            Source::EquallySpaced { lo, hi } => {
                let denom = (b.count.max(2) - 1) as f64;
                out.extend((0..b.count).map(|i| lo + (hi - lo) * i as f64 / denom));
            }
            Source::NormalCluster { mean, sd } => {
                let dist = Normal::new(mean, sd)
                    .map_err(|e| PlsError::InvalidScenario(e.to_string()))?;
                for _ in 0..b.count {
                    let mut attempts = 0;
                    let v = loop {
                        if attempts == MAX_RESAMPLE {
                            return Err(PlsError::ResampleExhausted { attempts });
                        }
                        attempts += 1;
                        let v = dist.sample(rng);
                        if v > POSITIVITY_FLOOR {
                            break v;
                        }
                    };
                    out.push(v);
                }
            }
        }
    }
    Ok(out)
}

fn gaussian_matrix<T: Scalar, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix<T> {
    Matrix::from_fn(rows, cols, |_, _| {
        let z: f64 = StandardNormal.sample(rng);
        T::lit(z)
    })
}

/// Haar-random orthogonal matrix from the sign-fixed QR of a Gaussian matrix.
pub fn haar_orthogonal<T: Scalar, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Matrix<T>> {
    qr_orthonormal(&gaussian_matrix(n, n, rng))
}

/// `Q^T diag(λ) Q` with Haar-random `Q`.
pub fn covariance_from_eigenvalues<T: Scalar, R: Rng + ?Sized>(
    lambdas: &[T],
    rng: &mut R,
) -> Result<Matrix<T>> {
    let n = lambdas.len();
    let q = haar_orthogonal::<T, R>(n, rng)?;
    let upper = |i: usize, j: usize| (0..n).map(|k| q[(k, i)] * lambdas[k] * q[(k, j)]).sum::<T>();
    let mut s = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = upper(i, j);
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    Ok(s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticProblem<T> {
    pub dataset: Dataset<T>,
    pub true_beta: Vec<T>,
    pub sigma_noise: T,
    /// Sampled eigenvalues of the population covariance, descending.
    pub realized_eigenvalues: Vec<T>,
    pub covariance: Matrix<T>,
    pub seed: u64,
}

/// Deterministic problem for `(scenario, n, seed)`.
pub fn generate_problem<T: Scalar>(sc: &Scenario, n: usize, seed: u64) -> Result<SyntheticProblem<T>> {
    let dim = sc.d_total();
    if n < dim + 1 {
        return Err(PlsError::InvalidArgument(format!(
            "need n >= D + 1 = {}, got {n}",
            dim + 1
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sampled: Vec<T> = sample_eigenvalues(sc, &mut rng)?.into_iter().map(T::lit).collect();
    let covariance = covariance_from_eigenvalues(&sampled, &mut rng)?;
    let root = sym_eig(&covariance)?.apply(|l| l.max(T::zero()).sqrt());

    let z = gaussian_matrix::<T, _>(n, dim, &mut rng);
    // rows are z_i^T Σ^{1/2}, and Σ^{1/2} is symmetric
    let x = z.matmul(&root)?;
    let true_beta: Vec<T> = (0..dim).map(|_| T::lit(rng.random::<f64>())).collect();
    let signal = x.matvec(&true_beta);
    let nf = T::from_usize(n).expect("n");
    let m = signal.iter().copied().sum::<T>() / nf;
    let sd = (signal.iter().map(|&s| (s - m) * (s - m)).sum::<T>() / nf).sqrt();
    let sigma_noise = T::lit(NOISE_FRACTION) * sd;
    let y: Vec<T> = signal
        .iter()
        .map(|&s| {
            let e: f64 = StandardNormal.sample(&mut rng);
            s + sigma_noise * T::lit(e)
        })
        .collect();

    let mut realized_eigenvalues = sampled;
    realized_eigenvalues.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    Ok(SyntheticProblem {
        dataset: Dataset::centered(x, y)?,
        true_beta,
        sigma_noise,
        realized_eigenvalues,
        covariance,
        seed,
    })
}
