use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn krypls(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_krypls")).args(args).output().expect("spawn krypls")
}

fn ok(args: &[&str]) {
    let out = krypls(args);
    assert!(
        out.status.success(),
        "krypls {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| {
            l.split(',')
                .map(|c| match c {
                    "true" => 1.0,
                    "false" => 0.0,
                    other => other.parse().unwrap(),
                })
                .collect()
        })
        .collect()
}

#[test]
fn synth_shape_and_reproducibility() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        ok(&["synth", "--scenario", "1", "--n", "1000", "--seed", "7", "--out", s(out)]);
    }
    let x = csv_rows(&a.join("X.csv"));
    assert_eq!(x.len(), 1000);
    assert!(x.iter().all(|r| r.len() == 30));
    assert_eq!(csv_rows(&a.join("y.csv")).len(), 1000);
    for f in ["X.csv", "y.csv", "meta.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
}

#[test]
fn synth_near_zero_cluster_metadata() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["synth", "--scenario", "5", "--n", "200", "--seed", "3", "--out", s(dir.path())]);
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("meta.json")).unwrap()).unwrap();
    let eig: Vec<f64> = meta["realized_eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(eig.len(), 30);
    let small = eig.iter().filter(|&&l| (l - 0.2).abs() < 0.5).count();
    assert_eq!(small, 10);
}

#[test]
fn fit_methods() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    ok(&["synth", "--scenario", "3", "--n", "300", "--seed", "2", "--out", s(&data)]);
    let x = data.join("X.csv");
    let y = data.join("y.csv");
    let fits = dir.path().join("fits");
    let common = ["--data", s(&x), "--y", s(&y), "--no-scale", "--out", s(&fits)];

    ok(&[&["fit", "--method", "pls", "--lmax", "30"], &common[..]].concat());
    ok(&[&["fit", "--method", "ols"], &common[..]].concat());
    ok(&[&["fit", "--method", "pcr", "--lmax", "3"], &common[..]].concat());

    let pls = csv_rows(&fits.join("pls_path.csv"));
    let ols = csv_rows(&fits.join("ols_path.csv"));
    assert_eq!(ols.len(), 1);
    let last = pls.last().unwrap();
    assert!(last[0] <= 30.0);
    let scale = ols[0][1..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (p, o) in last[1..].iter().zip(&ols[0][1..]) {
        assert!((p - o).abs() <= 1e-6 * scale, "{p} vs {o}");
    }

    let pcr = csv_rows(&fits.join("pcr_summary.csv"));
    assert_eq!(pcr.len(), 3);
    assert!(pcr.windows(2).all(|w| w[1][1] >= w[0][1]));
}

#[test]
fn bound_files() {
    let dir = tempfile::tempdir().unwrap();
    let flat = dir.path().join("flat.txt");
    fs::write(&flat, "2 2 2 2 2\n").unwrap();
    let out = dir.path().join("flat.csv");
    ok(&["bound", "--eigenvalues", s(&flat), "--lmax", "3", "--out", s(&out)]);
    assert!(csv_rows(&out).iter().all(|r| r[1].abs() < 1e-12));

    let pair = dir.path().join("pair.txt");
    fs::write(&pair, "1,4\n").unwrap();
    ok(&["bound", "--eigenvalues", s(&pair), "--lmax", "1", "--out", s(&out)]);
    assert!((csv_rows(&out)[0][1] - 9.0 / 17.0).abs() < 1e-12);

    let data = dir.path().join("data");
    ok(&["synth", "--scenario", "3", "--n", "1000", "--seed", "1", "--out", s(&data)]);
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(data.join("meta.json")).unwrap()).unwrap();
    let spectrum = dir.path().join("scenario3.txt");
    let values: Vec<String> = meta["realized_eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.to_string())
        .collect();
    fs::write(&spectrum, values.join("\n")).unwrap();
    ok(&["bound", "--eigenvalues", s(&spectrum), "--lmax", "4", "--out", s(&out)]);
    let rows = csv_rows(&out);
    assert!(rows[1][1] < 0.1 * rows[0][1], "{rows:?}");

    // the same pipeline from data goes through the sample Gram spectrum
    ok(&[
        "bound",
        "--data",
        s(&data.join("X.csv")),
        "--y",
        s(&data.join("y.csv")),
        "--no-scale",
        "--lmax",
        "4",
        "--out",
        s(&out),
    ]);
    let rows = csv_rows(&out);
    assert!(rows.windows(2).all(|w| w[1][1] <= w[0][1]));
}

#[test]
fn experiment_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        ok(&["experiment", "--scenario", "2,3", "--seeds", "3", "--n", "200", "--lmax", "4", "--out", s(out)]);
    }
    for f in ["records.csv", "aggregate.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
    let agg = fs::read_to_string(a.join("aggregate.csv")).unwrap();
    assert_eq!(agg.lines().count(), 1 + 2 * 4);
}

#[test]
fn errors_exit_nonzero_with_one_line() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    let out = krypls(&["fit", "--data", s(&missing), "--response", "y", "--out", s(dir.path())]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    assert!(err.starts_with("error:"));

    let out = krypls(&["synth", "--scenario", "9", "--out", s(dir.path())]);
    assert!(!out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stderr).trim_end().lines().count(), 1);
}
