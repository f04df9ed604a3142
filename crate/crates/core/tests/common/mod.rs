#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use coforest::cli::SuiteManifest;
use coforest::data::{load_csv, CsvOptions};
use coforest::eval::BenchmarkDataset;
use coforest::forest::DistanceMatrix;
use coforest::{CategoricalDataset, Partition};
use jsonschema::{Retrieve, Uri, Validator};
use serde_json::Value;

pub fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn data_dir() -> PathBuf {
    repo_root().join("data")
}

pub fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_coforest"));
    cmd.env_remove("COFOREST_JOBS");
    cmd
}

/// Resolves `https://coforest.invalid/schemas/<file>` to the repository copy.
struct LocalSchemas;

impl Retrieve for LocalSchemas {
    fn retrieve(&self, uri: &Uri<String>) -> Result<Value, Box<dyn std::error::Error + Send + Sync>> {
        let file = uri.path().as_str().rsplit('/').next().unwrap_or_default().to_string();
        let text = std::fs::read_to_string(repo_root().join("schemas").join(file))?;
        Ok(serde_json::from_str(&text)?)
    }
}

pub fn validator(schema_file: &str) -> Validator {
    let text = std::fs::read_to_string(repo_root().join("schemas").join(schema_file)).unwrap();
    let schema: Value = serde_json::from_str(&text).unwrap();
    jsonschema::options()
        .with_retriever(LocalSchemas)
        .build(&schema)
        .unwrap()
}

pub fn assert_valid(schema_file: &str, instance: &Value) {
    let v = validator(schema_file);
    let errors: Vec<String> = v.iter_errors(instance).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{schema_file}: {errors:?}");
}

/// Entries of the vendored suite whose files are present, in manifest order,
/// and the names of those that are missing.
pub fn vendored_suite() -> (Vec<BenchmarkDataset>, Vec<String>) {
    let text = std::fs::read_to_string(data_dir().join("suite.json")).unwrap();
    let manifest: SuiteManifest = serde_json::from_str(&text).unwrap();
    let mut present = Vec::new();
    let mut missing = Vec::new();
    for entry in manifest.datasets {
        let path = data_dir().join(&entry.path);
        if !path.exists() {
            missing.push(entry.name);
            continue;
        }
        let opts = CsvOptions {
            label_column: Some(entry.label_column.clone()),
            missing_token: entry.missing_token.clone(),
            has_header: entry.has_header,
            ..CsvOptions::default()
        };
        present.push(BenchmarkDataset {
            name: entry.name,
            data: load_csv(&path, &opts).unwrap(),
            k: entry.k_star,
        });
    }
    (present, missing)
}

/// Objective recomputed from scratch with plain loops over samples.
pub fn naive_objective(ds: &CategoricalDataset, part: &Partition, metric: &[DistanceMatrix]) -> f64 {
    let n = ds.n_samples();
    let k = part.k();
    let l = ds.n_attributes();
    let mut size = vec![0usize; k];
    let mut counts: Vec<Vec<Vec<usize>>> = (0..k)
        .map(|_| (0..l).map(|r| vec![0; ds.cardinality(r)]).collect())
        .collect();
    for i in 0..n {
        let j = part.cluster_of(i);
        size[j] += 1;
        for (r, c) in counts[j].iter_mut().enumerate() {
            c[ds.value(i, r)] += 1;
        }
    }
    let mut total = 0.0;
    for i in 0..n {
        let j = part.cluster_of(i);
        for (r, d) in metric.iter().enumerate() {
            let u = ds.value(i, r);
            for (s, &c) in counts[j][r].iter().enumerate() {
                total += (c as f64 / size[j] as f64) * d.get(u, s);
            }
        }
    }
    total
}
