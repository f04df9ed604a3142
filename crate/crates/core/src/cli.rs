//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage, 2 data, 3 runtime. Every command writes
//! its output atomically and a `<output>.manifest.json` sidecar recording
//! the resolved configuration, input digests, version and duration.

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::cluster::{
    run, ClusterError, ClusteringConfig, ObjectiveRecord, Variant, DEFAULT_MAX_INNER, DEFAULT_MAX_OUTER,
};
use crate::data::{generate_synthetic, load_csv, to_csv, CategoricalDataset, CsvOptions, SyntheticSpec};
use crate::eval::{run_benchmark, structure_experiment, BenchmarkDataset, EvalError, Scores, StructureKind};
use crate::forest::ForestDocument;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl From<ClusterError> for CliError {
    fn from(e: ClusterError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Cluster(c) => c.into(),
            EvalError::NoRestarts | EvalError::NoTrials | EvalError::MissingOrdering => CliError::Usage(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "coforest", version, about = "Categorical clustering with learned order forests")]
pub struct Cli {
    /// Worker threads for restarts and benchmark cells (0 = all cores).
    #[arg(long, global = true, env = "COFOREST_JOBS", default_value_t = 0)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cluster one CSV file.
    Cluster(ClusterArgs),
    /// Run algorithms over a suite of labeled datasets.
    Bench(BenchArgs),
    /// Write a synthetic planted-cluster dataset.
    Gen(GenArgs),
    /// Time runs over growing synthetic datasets.
    Scaling(ScalingArgs),
    /// Convert the forest stored in a result file.
    ExportForest(ExportArgs),
    /// Compare value-graph structures by clustering accuracy.
    Structure(StructureArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct InputArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Ground-truth column, excluded from clustering.
    #[arg(long)]
    pub label_column: Option<String>,
    /// Rows holding this token in any attribute are dropped.
    #[arg(long, default_value = "?")]
    pub missing_token: String,
    /// Treat the first line as data; columns are then named c0, c1, ...
    #[arg(long)]
    pub no_header: bool,
}

impl InputArgs {
    fn load(&self) -> Result<CategoricalDataset, CliError> {
        let opts = CsvOptions {
            label_column: self.label_column.clone(),
            missing_token: self.missing_token.clone(),
            has_header: !self.no_header,
            ..CsvOptions::default()
        };
        load_csv(&self.input, &opts).map_err(|e| CliError::Data(format!("{}: {e}", self.input.display())))
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ClusterArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub k: u64,
    #[arg(long, default_value = "coforest")]
    pub algorithm: Variant,
    /// First seed; restart r uses seed + r.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub restarts: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_INNER as u64, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_inner: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_OUTER as u64, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_outer: u64,
    #[arg(long)]
    pub output: PathBuf,
    /// Include the learned forest in the result.
    #[arg(long)]
    pub emit_forest: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BenchArgs {
    /// JSON suite manifest.
    #[arg(long)]
    pub suite: PathBuf,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub restarts: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "coforest,kmodes,cof1,cof2,cof3,cof4")]
    pub algorithms: Vec<Variant>,
    /// JSON report path.
    #[arg(long)]
    pub output: PathBuf,
    /// Text table path; defaults to the report path with a `.txt` extension.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub l: u64,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    pub values: u64,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    pub k: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalingMode {
    /// n = 10k..100k with l = 20.
    Samples,
    /// l = 1k..10k with n = 2k.
    Attributes,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScalingArgs {
    #[arg(long, value_enum)]
    pub mode: ScalingMode,
    #[arg(long, default_value = "coforest")]
    pub algorithm: Variant,
    /// Number of leading grid points to run (the full grid has 10).
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..=10))]
    pub points: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ForestFormat {
    Dot,
    Json,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ExportArgs {
    /// Result file written by `cluster --emit-forest`.
    #[arg(long)]
    pub result: PathBuf,
    #[arg(long, value_enum)]
    pub format: ForestFormat,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct StructureArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub kind: StructureKind,
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON object mapping each attribute name to its values in line order
    /// (required for slg).
    #[arg(long)]
    pub ordering: Option<PathBuf>,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Provenance record written next to every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub inputs: Vec<InputDigest>,
    pub version: String,
    pub duration_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub seed: u64,
    pub final_objective: f64,
    pub converged: bool,
    pub inner_iterations: usize,
    pub outer_iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<Scores>,
}

/// Contents of a `cluster` result file: the best restart in full plus a
/// summary of every restart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterOutput {
    pub algorithm: Variant,
    pub k: usize,
    pub n: usize,
    pub seed: u64,
    pub assignments: Vec<usize>,
    pub final_objective: f64,
    pub objective_trace: Vec<ObjectiveRecord>,
    pub inner_iterations: usize,
    pub outer_iterations: usize,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<Scores>,
    pub restarts: Vec<RestartSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forest: Option<ForestDocument>,
}

/// One dataset in a benchmark suite. Relative paths resolve against the
/// manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub name: String,
    pub path: PathBuf,
    pub label_column: String,
    pub k_star: usize,
    #[serde(default = "default_missing")]
    pub missing_token: String,
    #[serde(default = "default_header")]
    pub has_header: bool,
}

fn default_missing() -> String {
    "?".into()
}

fn default_header() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteManifest {
    pub datasets: Vec<SuiteEntry>,
}

/// A loaded suite: datasets ready for [`run_benchmark`] and the resolved
/// file path of each.
pub struct Suite {
    pub datasets: Vec<BenchmarkDataset>,
    pub paths: Vec<PathBuf>,
}

pub fn load_suite(manifest: &Path) -> Result<Suite, CliError> {
    let text = fs::read_to_string(manifest)
        .map_err(|e| CliError::Data(format!("{}: {e}", manifest.display())))?;
    let parsed: SuiteManifest = serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("{}: {e}", manifest.display())))?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    let mut suite = Suite {
        datasets: Vec::new(),
        paths: Vec::new(),
    };
    for entry in parsed.datasets {
        let path = base.join(&entry.path);
        if !path.exists() {
            return Err(CliError::Data(format!(
                "dataset `{}` not found at {} (run scripts/fetch_datasets.sh)",
                entry.name,
                path.display()
            )));
        }
        let opts = CsvOptions {
            label_column: Some(entry.label_column.clone()),
            missing_token: entry.missing_token.clone(),
            has_header: entry.has_header,
            ..CsvOptions::default()
        };
        let data = load_csv(&path, &opts).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        suite.datasets.push(BenchmarkDataset {
            name: entry.name,
            data,
            k: entry.k_star,
        });
        suite.paths.push(path);
    }
    Ok(suite)
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

fn digests(paths: &[&Path]) -> Result<Vec<InputDigest>, CliError> {
    paths
        .iter()
        .map(|p| {
            Ok(InputDigest {
                path: p.display().to_string(),
                sha256: sha256_file(p)?,
            })
        })
        .collect()
}

/// Writes through a temporary file in the destination directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let fail = |e: std::io::Error| CliError::Runtime(format!("writing {}: {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let mut file = fs::File::create(&tmp).map_err(fail)?;
    file.write_all(bytes).map_err(fail)?;
    file.sync_all().map_err(fail)?;
    drop(file);
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        fail(e)
    })
}

fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn write_manifest<C: Serialize>(
    command: &str,
    config: &C,
    inputs: Vec<InputDigest>,
    output: &Path,
    started: Instant,
) -> Result<(), CliError> {
    let mut config = serde_json::to_value(config).map_err(|e| CliError::Runtime(e.to_string()))?;
    if let Some(map) = config.as_object_mut() {
        map.insert("jobs".into(), rayon::current_num_threads().into());
    }
    let manifest = RunManifest {
        command: command.into(),
        config,
        inputs,
        version: env!("CARGO_PKG_VERSION").into(),
        duration_seconds: started.elapsed().as_secs_f64(),
    };
    write_atomic(&manifest_path(output), &to_json(&manifest)?)
}

/// Least-squares slope of `ln(seconds)` against `ln(size)`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Grid sizes for a scaling mode: the varied size and the fixed other size.
pub fn scaling_grid(mode: ScalingMode, points: usize) -> Vec<(usize, usize)> {
    (1..=points)
        .map(|i| match mode {
            ScalingMode::Samples => (i * 10_000, 20),
            ScalingMode::Attributes => (2_000, i * 1_000),
        })
        .collect()
}

fn cmd_cluster(args: &ClusterArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let ds = args.input.load()?;
    let k = args.k as usize;
    let configs: Vec<ClusteringConfig> = (0..args.restarts)
        .map(|r| ClusteringConfig {
            k,
            seed: args.seed + r,
            max_inner: args.max_inner as usize,
            max_outer: args.max_outer as usize,
            variant: args.algorithm,
        })
        .collect();
    let results = configs
        .par_iter()
        .map(|c| run(&ds, c))
        .collect::<Result<Vec<_>, _>>()?;
    let score = |assignment: &[usize]| -> Result<Option<Scores>, CliError> {
        ds.labels()
            .map(|truth| Scores::compute(assignment, truth).map_err(CliError::from))
            .transpose()
    };
    let restarts = results
        .iter()
        .map(|r| {
            Ok(RestartSummary {
                seed: r.seed,
                final_objective: r.final_objective(),
                converged: r.converged,
                inner_iterations: r.inner_iterations,
                outer_iterations: r.outer_iterations,
                metrics: score(r.partition.assignment())?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    // seeds ascend, so the first minimum is the lowest-seed one
    let best = results
        .iter()
        .reduce(|a, b| if b.final_objective() < a.final_objective() { b } else { a })
        .expect("at least one restart");
    let forest = match (&best.forest, args.emit_forest) {
        (Some(f), true) => Some(f.to_document(ds.schemas()).map_err(|e| CliError::Runtime(e.to_string()))?),
        _ => None,
    };
    let output = ClusterOutput {
        algorithm: args.algorithm,
        k,
        n: ds.n_samples(),
        seed: best.seed,
        assignments: best.partition.assignment().to_vec(),
        final_objective: best.final_objective(),
        objective_trace: best.objective_trace.clone(),
        inner_iterations: best.inner_iterations,
        outer_iterations: best.outer_iterations,
        converged: best.converged,
        metrics: score(best.partition.assignment())?,
        restarts,
        forest,
    };
    write_atomic(&args.output, &to_json(&output)?)?;
    write_manifest("cluster", args, digests(&[&args.input.input])?, &args.output, started)
}

fn cmd_bench(args: &BenchArgs) -> Result<(), CliError> {
    let started = Instant::now();
    if args.algorithms.is_empty() {
        return Err(CliError::Usage("--algorithms must name at least one algorithm".into()));
    }
    let suite = load_suite(&args.suite)?;
    let report = run_benchmark(&suite.datasets, &args.algorithms, args.restarts as usize, args.seed)?;
    let table = args.table.clone().unwrap_or_else(|| args.output.with_extension("txt"));
    write_atomic(&args.output, &to_json(&report)?)?;
    write_atomic(&table, report.to_table().as_bytes())?;
    let mut inputs: Vec<&Path> = vec![&args.suite];
    inputs.extend(suite.paths.iter().map(PathBuf::as_path));
    write_manifest("bench", args, digests(&inputs)?, &args.output, started)
}

fn cmd_gen(args: &GenArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let spec = SyntheticSpec {
        n: args.n as usize,
        l: args.l as usize,
        values_per_attribute: args.values as usize,
        k_true: args.k as usize,
        seed: args.seed,
    };
    let ds = generate_synthetic(&spec).map_err(|e| CliError::Usage(e.to_string()))?;
    let text = to_csv(&ds, "class").map_err(|e| CliError::Runtime(e.to_string()))?;
    write_atomic(&args.output, text.as_bytes())?;
    write_manifest("gen", args, Vec::new(), &args.output, started)
}

fn cmd_scaling(args: &ScalingArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let mut rows = String::from("n,l,size,seconds,inner_iterations,outer_iterations\n");
    let mut points = Vec::new();
    for (n, l) in scaling_grid(args.mode, args.points as usize) {
        let ds = generate_synthetic(&SyntheticSpec::new(n, l, args.seed)).map_err(|e| CliError::Runtime(e.to_string()))?;
        let clock = Instant::now();
        let result = run(&ds, &ClusteringConfig::new(5, args.seed, args.algorithm))?;
        let seconds = clock.elapsed().as_secs_f64();
        let size = match args.mode {
            ScalingMode::Samples => n,
            ScalingMode::Attributes => l,
        };
        points.push((size as f64, seconds));
        rows.push_str(&format!(
            "{n},{l},{size},{seconds:.6},{},{}\n",
            result.inner_iterations, result.outer_iterations
        ));
    }
    write_atomic(&args.output, rows.as_bytes())?;
    if points.len() >= 2 {
        println!("log-log slope: {:.4}", loglog_slope(&points));
    }
    write_manifest("scaling", args, Vec::new(), &args.output, started)
}

fn cmd_export_forest(args: &ExportArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let text = fs::read_to_string(&args.result)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.result.display())))?;
    let result: ClusterOutput = serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.result.display())))?;
    let doc = result.forest.ok_or_else(|| {
        CliError::Data(format!(
            "{} holds no forest ({} results have none unless produced by coforest, cof1 or cof2 with --emit-forest)",
            args.result.display(),
            result.algorithm
        ))
    })?;
    doc.to_forest().map_err(|e| CliError::Data(format!("{}: {e}", args.result.display())))?;
    let bytes = match args.format {
        ForestFormat::Dot => doc.to_dot().into_bytes(),
        ForestFormat::Json => to_json(&doc)?,
    };
    write_atomic(&args.output, &bytes)?;
    write_manifest("export-forest", args, digests(&[&args.result])?, &args.output, started)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureOutput {
    pub kind: StructureKind,
    pub trials: usize,
    pub seed: u64,
    /// Ascending.
    pub accuracies: Vec<f64>,
}

fn read_ordering(path: &Path, ds: &CategoricalDataset) -> Result<Vec<Vec<usize>>, CliError> {
    let bad = |msg: String| CliError::Data(format!("{}: {msg}", path.display()));
    let text = fs::read_to_string(path).map_err(|e| bad(e.to_string()))?;
    let map: std::collections::HashMap<String, Vec<String>> =
        serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    ds.schemas()
        .iter()
        .map(|schema| {
            let values = map
                .get(&schema.name)
                .ok_or_else(|| bad(format!("no ordering for attribute `{}`", schema.name)))?;
            values
                .iter()
                .map(|v| {
                    schema
                        .index_of(v)
                        .ok_or_else(|| bad(format!("`{v}` is not a value of `{}`", schema.name)))
                })
                .collect()
        })
        .collect()
}

fn cmd_structure(args: &StructureArgs) -> Result<(), CliError> {
    let started = Instant::now();
    if args.input.label_column.is_none() {
        return Err(CliError::Usage("structure needs --label-column".into()));
    }
    let ds = args.input.load()?;
    let ordering = args.ordering.as_deref().map(|p| read_ordering(p, &ds)).transpose()?;
    let accuracies = structure_experiment(&ds, args.kind, ordering.as_deref(), args.trials as usize, args.seed)?;
    let output = StructureOutput {
        kind: args.kind,
        trials: args.trials as usize,
        seed: args.seed,
        accuracies,
    };
    write_atomic(&args.output, &to_json(&output)?)?;
    let mut inputs: Vec<&Path> = vec![&args.input.input];
    if let Some(p) = &args.ordering {
        inputs.push(p);
    }
    write_manifest("structure", args, digests(&inputs)?, &args.output, started)
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    pool.install(|| match &cli.command {
        Command::Cluster(a) => cmd_cluster(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Scaling(a) => cmd_scaling(a),
        Command::ExportForest(a) => cmd_export_forest(a),
        Command::Structure(a) => cmd_structure(a),
    })
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Errors are reported on stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = (1..=5).map(|i| (i as f64, 3.0 * (i as f64).powf(1.1))).collect();
        assert!((loglog_slope(&pts) - 1.1).abs() < 1e-12);
    }

    #[test]
    fn grids() {
        let s = scaling_grid(ScalingMode::Samples, 10);
        assert_eq!(s.len(), 10);
        assert_eq!((s[0], s[9]), ((10_000, 20), (100_000, 20)));
        let a = scaling_grid(ScalingMode::Attributes, 10);
        assert_eq!((a[0], a[9]), ((2_000, 1_000), (2_000, 10_000)));
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(main_with_args(["coforest"]), EXIT_USAGE);
        assert_eq!(main_with_args(["coforest", "gen", "--n", "0", "--l", "1", "--output", "x"]), EXIT_USAGE);
        assert_eq!(main_with_args(["coforest", "--help"]), EXIT_OK);
    }

    #[test]
    fn manifest_sidecar_name() {
        assert_eq!(manifest_path(Path::new("out/r.json")), PathBuf::from("out/r.json.manifest.json"));
    }
}
