//! File-producing entry points behind the command-line tool.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::bounds::{bound_series, closed_form_c1_c2, moments};
use crate::error::{PlsError, Result};
use crate::estimators::fit;
use crate::experiment::{aggregate, run_experiment, ExperimentRecord};
use crate::model::{covariance_pair, Dataset, Method};
use crate::numerics::sym_eig;
use crate::synth::{generate_problem, Scenario};

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| PlsError::io(format!("creating {}", dir.display()), e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| csv_err(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> PlsError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => PlsError::io(format!("writing {}", path.display()), io),
        other => PlsError::Parse(format!("{}: {other:?}", path.display())),
    }
}

fn write_rows<S: Serialize>(path: &Path, rows: &[S]) -> Result<()> {
    let mut w = csv_writer(path)?;
    for r in rows {
        w.serialize(r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| PlsError::io(format!("writing {}", path.display()), e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| PlsError::io(format!("writing {}", path.display()), e))
}

#[derive(Serialize)]
struct SynthMeta<'a> {
    scenario: u32,
    name: &'a str,
    n: usize,
    seed: u64,
    sigma_noise: f64,
    realized_eigenvalues: &'a [f64],
    true_beta: &'a [f64],
}

/// Writes `X.csv` (header `x1..xD`), `y.csv` and `meta.json` into `out_dir`.
pub fn cmd_synth(sc: &Scenario, n: usize, seed: u64, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let p = generate_problem::<f64>(sc, n, seed)?;
    ensure_dir(out_dir)?;
    let d = &p.dataset;

    let x_path = out_dir.join("X.csv");
    let mut w = csv_writer(&x_path)?;
    w.write_record((1..=d.d()).map(|j| format!("x{j}")))
        .map_err(|e| csv_err(&x_path, e))?;
    for i in 0..d.n() {
        w.write_record(d.x.row(i).iter().map(|v| v.to_string()))
            .map_err(|e| csv_err(&x_path, e))?;
    }
    w.flush().map_err(|e| PlsError::io(format!("writing {}", x_path.display()), e))?;

    let y_path = out_dir.join("y.csv");
    let mut w = csv_writer(&y_path)?;
    w.write_record(["y"]).map_err(|e| csv_err(&y_path, e))?;
    for v in &d.y {
        w.write_record([v.to_string()]).map_err(|e| csv_err(&y_path, e))?;
    }
    w.flush().map_err(|e| PlsError::io(format!("writing {}", y_path.display()), e))?;

    let meta_path = out_dir.join("meta.json");
    let meta = SynthMeta {
        scenario: sc.id,
        name: &sc.name,
        n,
        seed,
        sigma_noise: p.sigma_noise,
        realized_eigenvalues: &p.realized_eigenvalues,
        true_beta: &p.true_beta,
    };
    let json = serde_json::to_string_pretty(&meta).map_err(|e| PlsError::Parse(e.to_string()))?;
    write_text(&meta_path, &(json + "\n"))?;
    Ok(vec![x_path, y_path, meta_path])
}

#[derive(Serialize)]
struct SummaryRow {
    l: usize,
    r2: f64,
    residual_norm: f64,
}

/// Writes `<method>_path.csv` (one coefficient vector per order) and
/// `<method>_summary.csv` (`l, r2, residual_norm`). OLS is reported at `l = D`.
pub fn cmd_fit(d: &Dataset<f64>, method: Method, l_max: usize, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let report = fit(d, method, l_max)?;
    ensure_dir(out_dir)?;
    let orders: Vec<usize> = match method {
        Method::Ols => vec![d.d()],
        _ => (1..=report.coefficients.l_max()).collect(),
    };

    let path_file = out_dir.join(format!("{}_path.csv", method.name()));
    let mut w = csv_writer(&path_file)?;
    let header = std::iter::once("l".to_owned()).chain((1..=d.d()).map(|j| format!("b{j}")));
    w.write_record(header).map_err(|e| csv_err(&path_file, e))?;
    for (l, beta) in orders.iter().zip(&report.coefficients.betas) {
        let rec = std::iter::once(l.to_string()).chain(beta.iter().map(|v| v.to_string()));
        w.write_record(rec).map_err(|e| csv_err(&path_file, e))?;
    }
    w.flush().map_err(|e| PlsError::io(format!("writing {}", path_file.display()), e))?;

    let summary_file = out_dir.join(format!("{}_summary.csv", method.name()));
    let rows: Vec<SummaryRow> = orders
        .iter()
        .zip(report.r2_per_l.iter().zip(&report.residual_norms))
        .map(|(&l, (&r2, &residual_norm))| SummaryRow { l, r2, residual_norm })
        .collect();
    write_rows(&summary_file, &rows)?;
    Ok(vec![path_file, summary_file])
}

/// Eigenvalues of `X^T X`, descending.
pub fn eigenvalues_of(d: &Dataset<f64>) -> Result<Vec<f64>> {
    let (sxx, _) = covariance_pair(d)?;
    Ok(sym_eig(&sxx)?.eigenvalues)
}

/// Reads numbers separated by commas or whitespace; `#` starts a comment.
pub fn read_eigenvalues(path: &Path) -> Result<Vec<f64>> {
    if !path.exists() {
        return Err(PlsError::MissingFile(path.to_path_buf()));
    }
    let text = fs::read_to_string(path).map_err(|e| PlsError::io(format!("reading {}", path.display()), e))?;
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            let v: f64 = tok
                .parse()
                .map_err(|_| PlsError::Parse(format!("{}: not a number: `{tok}`", path.display())))?;
            if !v.is_finite() {
                return Err(PlsError::Parse(format!("{}: non-finite value", path.display())));
            }
            out.push(v);
        }
    }
    if out.is_empty() {
        return Err(PlsError::EmptyTable);
    }
    Ok(out)
}

#[derive(Serialize)]
struct BoundRow {
    l: usize,
    c_l: f64,
    condition: f64,
    clamped: bool,
    ill_conditioned: bool,
}

/// Writes the bound series for `lambdas` to `out_file`, preceded by `#`
/// comment lines with the spectrum summary and the closed-form values.
pub fn cmd_bound(lambdas: &[f64], l_max: usize, out_file: &Path) -> Result<PathBuf> {
    if l_max == 0 {
        return Err(PlsError::InvalidArgument("l_max must be >= 1".into()));
    }
    let ms = moments(lambdas, l_max.max(2))?;
    let series = bound_series(&ms, l_max)?;
    let cf = closed_form_c1_c2(&ms);
    if let Some(dir) = out_file.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(dir)?;
    }
    let mut text = format!(
        "# D={} mean={} c_v={} gamma={} kappa={}\n# closed_form C1={} C2={}{}\n",
        ms.d_count,
        ms.mean,
        ms.cv,
        ms.skewness,
        ms.kurtosis,
        cf.c1,
        cf.c2,
        if cf.degenerate { " (zero spread)" } else { "" }
    );
    let mut w = csv::Writer::from_writer(Vec::new());
    for l in 1..=l_max {
        w.serialize(BoundRow {
            l,
            c_l: series.c_l_values[l - 1],
            condition: series.hankel_condition[l - 1],
            clamped: series.clamped[l - 1],
            ill_conditioned: series.ill_conditioned[l - 1],
        })
        .map_err(|e| csv_err(out_file, e))?;
    }
    let body = w.into_inner().map_err(|e| PlsError::Parse(e.to_string()))?;
    text.push_str(&String::from_utf8(body).expect("csv output is UTF-8"));
    write_text(out_file, &text)?;
    Ok(out_file.to_path_buf())
}

/// Writes `records.csv` (one row per scenario, seed and order) and
/// `aggregate.csv` (seed means). Returns the records as well.
pub fn cmd_experiment(
    scenarios: &[Scenario],
    seeds: &[u64],
    n: usize,
    l_max: usize,
    external: Option<(&str, &Dataset<f64>)>,
    out_dir: &Path,
) -> Result<(Vec<PathBuf>, Vec<ExperimentRecord>)> {
    if l_max == 0 {
        return Err(PlsError::InvalidArgument("l_max must be >= 1".into()));
    }
    let rows = run_experiment(scenarios, seeds, n, l_max, external);
    ensure_dir(out_dir)?;
    let rec = out_dir.join("records.csv");
    write_rows(&rec, &rows)?;
    let agg = out_dir.join("aggregate.csv");
    write_rows(&agg, &aggregate(&rows))?;
    Ok((vec![rec, agg], rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::running_example;

    #[test]
    fn bound_file_running_example() {
        let dir = tempfile::tempdir().unwrap();
        let f = cmd_bound(&[1.0, 4.0], 1, &dir.path().join("b.csv")).unwrap();
        let text = fs::read_to_string(f).unwrap();
        assert!(text.starts_with("# D=2"));
        let row = text.lines().find(|l| l.starts_with("1,")).unwrap();
        let c: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert!((c - 9.0 / 17.0).abs() < 1e-14);
    }

    #[test]
    fn eigenvalue_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.txt");
        fs::write(&p, "# spectrum\n1, 2\n3 4.5\n").unwrap();
        assert_eq!(read_eigenvalues(&p).unwrap(), vec![1.0, 2.0, 3.0, 4.5]);
        fs::write(&p, "1,x\n").unwrap();
        assert!(read_eigenvalues(&p).is_err());
    }

    #[test]
    fn fit_files() {
        let dir = tempfile::tempdir().unwrap();
        let d = running_example::<f64>();
        let files = cmd_fit(&d, Method::Ols, 2, dir.path()).unwrap();
        let path = fs::read_to_string(&files[0]).unwrap();
        assert_eq!(path.lines().count(), 2);
        assert_eq!(eigenvalues_of(&d).unwrap().len(), 2);
    }
}
