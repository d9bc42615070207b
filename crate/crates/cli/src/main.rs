use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use krypls::commands::{cmd_bound, cmd_experiment, cmd_fit, cmd_synth, eigenvalues_of, read_eigenvalues};
use krypls::ingest::{load_csv, load_pair, preprocess_with, RawTable};
use krypls::{Dataset64, Method, Scenario};

#[derive(Parser)]
#[command(name = "krypls", version, about = "PLS regression, PLS/OLS distance bounds and synthetic experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic problem: X.csv, y.csv and meta.json.
    Synth {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit PLS, OLS or PCR and write the coefficient path and a summary.
    Fit {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value = "pls")]
        method: Method,
        #[arg(long, default_value_t = 1)]
        lmax: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Moment bound C_L for a dataset or an eigenvalue list.
    Bound {
        #[command(flatten)]
        data: OptionalDataArgs,
        /// Whitespace or comma separated eigenvalues.
        #[arg(long, conflicts_with = "data")]
        eigenvalues: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        lmax: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// NED, C_L and R² curves over scenarios and seeds.
    Experiment {
        /// Built-in scenario ids, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
        scenario: Vec<u32>,
        /// Extra scenarios from config files.
        #[arg(long)]
        scenario_file: Vec<PathBuf>,
        /// Use seeds 1..=SEEDS.
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        /// Explicit seeds (overrides --seeds).
        #[arg(long, value_delimiter = ',')]
        seed: Vec<u64>,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        lmax: usize,
        #[command(flatten)]
        data: OptionalDataArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ScenarioArg {
    #[arg(long)]
    scenario: Option<u32>,
    #[arg(long)]
    scenario_file: Option<PathBuf>,
}

#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    data: PathBuf,
    /// Response column inside --data.
    #[arg(long, required_unless_present = "y")]
    response: Option<String>,
    /// Separate single-column response file.
    #[arg(long, conflicts_with = "response")]
    y: Option<PathBuf>,
    /// Drop rows whose response is at or above this value.
    #[arg(long)]
    threshold: Option<f64>,
    /// Center only; keep the original column scales.
    #[arg(long)]
    no_scale: bool,
}

#[derive(Args)]
struct OptionalDataArgs {
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, requires = "data")]
    response: Option<String>,
    #[arg(long, requires = "data", conflicts_with = "response")]
    y: Option<PathBuf>,
    #[arg(long, requires = "data")]
    threshold: Option<f64>,
    #[arg(long, requires = "data")]
    no_scale: bool,
}

fn load_table(data: &Path, response: Option<&str>, y: Option<&Path>) -> Result<RawTable> {
    let table = match (response, y) {
        (_, Some(y)) => load_pair(data, y)?,
        (Some(r), None) => load_csv(data, r)?,
        (None, None) => bail!("either --response or --y is required with --data"),
    };
    if table.dropped > 0 {
        eprintln!("note: {} malformed rows skipped in {}", table.dropped, data.display());
    }
    Ok(table)
}

fn load_dataset(a: &DataArgs) -> Result<Dataset64> {
    let t = load_table(&a.data, a.response.as_deref(), a.y.as_deref())?;
    Ok(preprocess_with(&t, a.threshold, !a.no_scale)?)
}

fn load_optional(a: &OptionalDataArgs) -> Result<Option<(String, Dataset64)>> {
    let Some(data) = &a.data else {
        return Ok(None);
    };
    let t = load_table(data, a.response.as_deref(), a.y.as_deref())?;
    let name = data
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "data".into());
    Ok(Some((name, preprocess_with(&t, a.threshold, !a.no_scale)?)))
}

fn scenario(a: &ScenarioArg) -> Result<Scenario> {
    Ok(match (&a.scenario, &a.scenario_file) {
        (Some(id), _) => Scenario::builtin(*id)?,
        (None, Some(f)) => Scenario::from_file(f)?,
        (None, None) => bail!("--scenario or --scenario-file is required"),
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth { scenario: sa, n, seed, out } => {
            let sc = scenario(&sa)?;
            cmd_synth(&sc, n, seed, &out).with_context(|| format!("synth scenario {}", sc.id))?;
        }
        Command::Fit { data, method, lmax, out } => {
            let d = load_dataset(&data)?;
            cmd_fit(&d, method, lmax, &out).with_context(|| format!("fitting {}", method.name()))?;
        }
        Command::Bound { data, eigenvalues, lmax, out } => {
            let lambdas = match (eigenvalues, load_optional(&data)?) {
                (Some(path), _) => read_eigenvalues(&path)?,
                (None, Some((_, d))) => eigenvalues_of(&d)?,
                (None, None) => bail!("either --data or --eigenvalues is required"),
            };
            cmd_bound(&lambdas, lmax, &out)?;
        }
        Command::Experiment { scenario: ids, scenario_file, seeds, seed, n, lmax, data, out } => {
            let mut scenarios = ids.iter().map(|&i| Scenario::builtin(i)).collect::<Result<Vec<_>, _>>()?;
            for f in &scenario_file {
                scenarios.push(Scenario::from_file(f)?);
            }
            let seeds: Vec<u64> = if seed.is_empty() { (1..=seeds).collect() } else { seed };
            let external = load_optional(&data)?;
            let (_, rows) = cmd_experiment(
                &scenarios,
                &seeds,
                n,
                lmax,
                external.as_ref().map(|(name, d)| (name.as_str(), d)),
                &out,
            )?;
            let failed = rows.iter().filter(|r| r.is_error()).count();
            if failed > 0 {
                eprintln!("note: {failed} run(s) failed; see the error column of records.csv");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
