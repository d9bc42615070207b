//! Per-seed NED / bound / R² tables over synthetic scenarios and real data.

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{bound_series, distinct_eigenvalue_count, moments, ned};
use crate::error::{PlsError, Result};
use crate::estimators::{ols_fit, pcr_fit};
use crate::model::{covariance_pair, r2_score, Dataset};
use crate::nipals::nipals_fit;
use crate::numerics::sym_eig;
use crate::synth::{generate_problem, Scenario};

/// Slack allowed when checking `ned <= c_l` and monotonicity before writing.
pub const RECORD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub scenario: String,
    pub seed: u64,
    pub l: usize,
    pub ned: Option<f64>,
    pub c_l: Option<f64>,
    pub r2_pls: Option<f64>,
    pub r2_pcr: Option<f64>,
    pub m_distinct: Option<usize>,
    /// Set on rows standing in for a failed run.
    pub error: Option<String>,
}

impl ExperimentRecord {
    pub fn is_error(&self) -> bool {
        self.error.is_some()
    }

    fn failed(scenario: &str, seed: u64, err: &PlsError) -> Self {
        Self {
            scenario: scenario.to_owned(),
            seed,
            l: 0,
            ned: None,
            c_l: None,
            r2_pls: None,
            r2_pcr: None,
            m_distinct: None,
            error: Some(err.to_string()),
        }
    }
}

/// NED, bound and R² curves of one centered dataset for `L = 1..=min(l_max, D)`.
///
/// When NIPALS stops early because the Krylov space became invariant, the last
/// estimator is carried forward: it already equals OLS.
pub fn analyze_dataset(name: &str, seed: u64, d: &Dataset<f64>, l_max: usize) -> Result<Vec<ExperimentRecord>> {
    let l_max = l_max.min(d.d());
    if l_max == 0 {
        return Err(PlsError::InvalidArgument("l_max must be >= 1".into()));
    }
    let (sxx, _) = covariance_pair(d)?;
    let beta_ols = ols_fit(d)?;
    let eig = sym_eig(&sxx)?;
    let pls = nipals_fit(d, l_max)?;
    let pcr = pcr_fit(d, l_max)?;
    let bounds = bound_series(&moments(&eig.eigenvalues, l_max)?, l_max)?;
    let m = distinct_eigenvalue_count(&eig.eigenvalues);

    let mut out = Vec::with_capacity(l_max);
    for l in 1..=l_max {
        let beta = pls
            .coefficient_path
            .at(l)
            .or_else(|| pls.coefficient_path.last())
            .expect("at least one component");
        let pcr_beta = pcr.path.at(l).expect("full PCR path");
        out.push(ExperimentRecord {
            scenario: name.to_owned(),
            seed,
            l,
            ned: Some(ned(beta, &beta_ols, &sxx)?),
            c_l: Some(bounds.c_l_values[l - 1]),
            r2_pls: Some(r2_score(d, beta)?),
            r2_pcr: Some(r2_score(d, pcr_beta)?),
            m_distinct: Some(m),
            error: None,
        });
    }
    check_group(&out)?;
    Ok(out)
}

/// Enforces `ned <= c_l` and non-increasing `ned`, `c_l` within one run.
pub fn check_group(rows: &[ExperimentRecord]) -> Result<()> {
    for r in rows {
        if let (Some(n), Some(c)) = (r.ned, r.c_l) {
            if n > c + RECORD_TOL {
                return Err(PlsError::InvariantViolated(format!(
                    "{} seed {} L={}: NED {n:e} exceeds bound {c:e}",
                    r.scenario, r.seed, r.l
                )));
            }
        }
    }
    for w in rows.windows(2) {
        let grows = |a: Option<f64>, b: Option<f64>| matches!((a, b), (Some(a), Some(b)) if b > a + RECORD_TOL);
        if grows(w[0].ned, w[1].ned) || grows(w[0].c_l, w[1].c_l) {
            return Err(PlsError::InvariantViolated(format!(
                "{} seed {}: NED or bound increases at L={}",
                w[1].scenario, w[1].seed, w[1].l
            )));
        }
    }
    Ok(())
}

pub fn run_seed(sc: &Scenario, n: usize, seed: u64, l_max: usize) -> Result<Vec<ExperimentRecord>> {
    let p = generate_problem::<f64>(sc, n, seed)?;
    analyze_dataset(&sc.id.to_string(), seed, &p.dataset, l_max)
}

/// Runs every `(scenario, seed)` pair, in parallel, and returns rows ordered by
/// scenario (as given), seed (ascending) and `L`. Failed runs become single
/// error rows.
pub fn run_experiment(
    scenarios: &[Scenario],
    seeds: &[u64],
    n: usize,
    l_max: usize,
    external: Option<(&str, &Dataset<f64>)>,
) -> Vec<ExperimentRecord> {
    let mut sorted_seeds = seeds.to_vec();
    sorted_seeds.sort_unstable();
    sorted_seeds.dedup();
    let jobs: Vec<(&Scenario, u64)> = scenarios
        .iter()
        .flat_map(|sc| sorted_seeds.iter().map(move |&s| (sc, s)))
        .collect();
    let mut rows: Vec<ExperimentRecord> = jobs
        .par_iter()
        .map(|&(sc, seed)| {
            run_seed(sc, n, seed, l_max)
                .unwrap_or_else(|e| vec![ExperimentRecord::failed(&sc.id.to_string(), seed, &e)])
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    if let Some((name, d)) = external {
        rows.extend(
            analyze_dataset(name, 0, d, l_max)
                .unwrap_or_else(|e| vec![ExperimentRecord::failed(name, 0, &e)]),
        );
    }
    rows
}

/// Seed-averaged curves for one scenario and order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub scenario: String,
    pub l: usize,
    pub seeds: usize,
    pub mean_ned: f64,
    pub mean_c_l: f64,
    pub mean_r2_pls: f64,
    pub mean_r2_pcr: f64,
}

/// Arithmetic means over seeds, error rows excluded, in order of first appearance.
pub fn aggregate(rows: &[ExperimentRecord]) -> Vec<AggregateRow> {
    let mut out: Vec<AggregateRow> = Vec::new();
    for r in rows.iter().filter(|r| !r.is_error()) {
        let idx = match out.iter().position(|a| a.scenario == r.scenario && a.l == r.l) {
            Some(i) => i,
            None => {
                out.push(AggregateRow {
                    scenario: r.scenario.clone(),
                    l: r.l,
                    seeds: 0,
                    mean_ned: 0.0,
                    mean_c_l: 0.0,
                    mean_r2_pls: 0.0,
                    mean_r2_pcr: 0.0,
                });
                out.len() - 1
            }
        };
        let a = &mut out[idx];
        a.seeds += 1;
        a.mean_ned += r.ned.unwrap_or(f64::NAN);
        a.mean_c_l += r.c_l.unwrap_or(f64::NAN);
        a.mean_r2_pls += r.r2_pls.unwrap_or(f64::NAN);
        a.mean_r2_pcr += r.r2_pcr.unwrap_or(f64::NAN);
    }
    out.into_iter()
        .map(|mut a| {
            let k = a.seeds as f64;
            a.mean_ned /= k;
            a.mean_c_l /= k;
            a.mean_r2_pls /= k;
            a.mean_r2_pcr /= k;
            a
        })
        .collect()
}

/// Aggregate row for `(scenario, l)`.
pub fn mean_at<'a>(agg: &'a [AggregateRow], scenario: &str, l: usize) -> Option<&'a AggregateRow> {
    agg.iter().find(|a| a.scenario == scenario && a.l == l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::running_example;

    #[test]
    fn running_example_rows() {
        let d = running_example::<f64>();
        let rows = analyze_dataset("toy", 0, &d, 5).unwrap();
        assert_eq!(rows.len(), 2);
        assert!((rows[0].ned.unwrap() - 2340.0 / 4225.0 / 5.0).abs() < 1e-14);
        assert!((rows[0].c_l.unwrap() - 9.0 / 17.0).abs() < 1e-14);
        assert_eq!(rows[0].m_distinct, Some(2));
        assert!(rows[1].ned.unwrap() < 1e-20);
    }

    #[test]
    fn violations_are_caught() {
        let mut rows = analyze_dataset("toy", 0, &running_example::<f64>(), 2).unwrap();
        rows[0].c_l = Some(0.01);
        assert!(matches!(check_group(&rows), Err(PlsError::InvariantViolated(_))));
        rows[0].c_l = Some(9.0 / 17.0);
        rows[1].ned = Some(0.5);
        assert!(check_group(&rows).is_err());
    }

    #[test]
    fn experiment_is_ordered_and_deterministic() {
        let sc = [Scenario::builtin(2).unwrap(), Scenario::builtin(1).unwrap()];
        let a = run_experiment(&sc, &[3, 1, 2], 120, 4, None);
        let b = run_experiment(&sc, &[1, 2, 3], 120, 4, None);
        assert_eq!(a, b);
        assert_eq!(a.len(), 2 * 3 * 4);
        assert_eq!(a[0].scenario, "2");
        assert_eq!((a[4].seed, a[4].l), (2, 1));
        let agg = aggregate(&a);
        assert_eq!(agg.len(), 8);
        assert!(agg.iter().all(|r| r.seeds == 3));
        assert!(mean_at(&agg, "1", 4).is_some());
    }

    #[test]
    fn failures_become_error_rows() {
        let sc = [Scenario::builtin(1).unwrap()];
        // n too small for D = 30
        let rows = run_experiment(&sc, &[1], 10, 3, None);
        assert_eq!(rows.len(), 1);
        assert!(rows[0].is_error());
        assert!(aggregate(&rows).is_empty());
    }
}
