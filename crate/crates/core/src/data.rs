//! Dataset model, CSV ingestion and synthetic generation.
//!
//! Values are encoded per attribute as indices into a vocabulary built from
//! the observed data in first-appearance order, so every vocabulary entry has
//! at least one supporting row.

use std::collections::HashMap;
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while loading, generating or validating datasets.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row} has {found} fields, expected {expected}")]
    Ragged {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("label column `{0}` not found")]
    UnknownLabelColumn(String),
    #[error("dataset is empty after removing rows with missing values")]
    Empty,
    #[error("dataset has no attribute columns")]
    NoAttributes,
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("invalid dataset: {0}")]
    Invalid(String),
}

/// Name and vocabulary of one categorical attribute.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeSchema {
    pub name: String,
    pub vocabulary: Vec<String>,
}

impl AttributeSchema {
    /// Number of possible values.
    pub fn cardinality(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn index_of(&self, value: &str) -> Option<usize> {
        self.vocabulary.iter().position(|v| v == value)
    }
}

/// An `n x l` matrix of encoded categorical values plus optional ground truth.
///
/// Labels are never consulted by the clustering engines; they exist for
/// evaluation only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoricalDataset {
    schemas: Vec<AttributeSchema>,
    n: usize,
    cells: Vec<u32>,
    labels: Option<Vec<usize>>,
    label_names: Vec<String>,
}

impl CategoricalDataset {
    /// Builds a dataset from already-encoded rows, validating every cell.
    pub fn new(
        schemas: Vec<AttributeSchema>,
        rows: Vec<Vec<usize>>,
        labels: Option<(Vec<usize>, Vec<String>)>,
    ) -> Result<Self, DataError> {
        if schemas.is_empty() {
            return Err(DataError::NoAttributes);
        }
        if rows.is_empty() {
            return Err(DataError::Empty);
        }
        for schema in &schemas {
            if schema.vocabulary.is_empty() {
                return Err(DataError::Invalid(format!(
                    "attribute `{}` has an empty vocabulary",
                    schema.name
                )));
            }
            let mut seen = std::collections::HashSet::new();
            if !schema.vocabulary.iter().all(|v| seen.insert(v)) {
                return Err(DataError::Invalid(format!(
                    "attribute `{}` has duplicate vocabulary entries",
                    schema.name
                )));
            }
        }
        let l = schemas.len();
        let mut cells = Vec::with_capacity(rows.len() * l);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != l {
                return Err(DataError::Ragged {
                    row: i,
                    found: row.len(),
                    expected: l,
                });
            }
            for (r, &v) in row.iter().enumerate() {
                if v >= schemas[r].cardinality() {
                    return Err(DataError::Invalid(format!(
                        "cell ({i}, {r}) holds index {v} outside vocabulary of size {}",
                        schemas[r].cardinality()
                    )));
                }
                cells.push(v as u32);
            }
        }
        let (labels, label_names) = match labels {
            Some((labels, names)) => {
                if labels.len() != rows.len() {
                    return Err(DataError::Invalid(format!(
                        "{} labels for {} rows",
                        labels.len(),
                        rows.len()
                    )));
                }
                if let Some(&bad) = labels.iter().find(|&&c| c >= names.len()) {
                    return Err(DataError::Invalid(format!("label index {bad} has no name")));
                }
                (Some(labels), names)
            }
            None => (None, Vec::new()),
        };
        Ok(Self {
            schemas,
            n: rows.len(),
            cells,
            labels,
            label_names,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.n
    }

    pub fn n_attributes(&self) -> usize {
        self.schemas.len()
    }

    pub fn schemas(&self) -> &[AttributeSchema] {
        &self.schemas
    }

    pub fn cardinality(&self, attribute: usize) -> usize {
        self.schemas[attribute].cardinality()
    }

    /// Encoded value of sample `i` on attribute `r`.
    #[inline]
    pub fn value(&self, i: usize, r: usize) -> usize {
        self.cells[i * self.schemas.len() + r] as usize
    }

    /// Encoded values of sample `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let l = self.schemas.len();
        self.cells[i * l..(i + 1) * l].iter().map(|&v| v as usize)
    }

    /// Raw string of sample `i` on attribute `r`.
    pub fn raw_value(&self, i: usize, r: usize) -> &str {
        &self.schemas[r].vocabulary[self.value(i, r)]
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    /// Number of distinct ground-truth classes, if labels are present.
    pub fn n_classes(&self) -> Option<usize> {
        self.labels.as_ref().map(|_| self.label_names.len())
    }

    pub fn summary(&self) -> DatasetSummary {
        dataset_summary(self)
    }
}

/// Read-out of a dataset's shape.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub n: usize,
    pub l: usize,
    pub cardinalities: Vec<usize>,
    /// Largest attribute cardinality.
    pub max_cardinality: usize,
    pub n_classes: Option<usize>,
}

pub fn dataset_summary(ds: &CategoricalDataset) -> DatasetSummary {
    let cardinalities: Vec<usize> = ds.schemas.iter().map(|s| s.cardinality()).collect();
    DatasetSummary {
        n: ds.n_samples(),
        l: ds.n_attributes(),
        max_cardinality: cardinalities.iter().copied().max().unwrap_or(0),
        cardinalities,
        n_classes: ds.n_classes(),
    }
}

/// Options for [`load_csv`].
#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub label_column: Option<String>,
    pub missing_token: String,
    pub has_header: bool,
    pub delimiter: u8,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            label_column: None,
            missing_token: "?".to_string(),
            has_header: true,
            delimiter: b',',
        }
    }
}

impl CsvOptions {
    pub fn with_label(label_column: impl Into<String>) -> Self {
        Self {
            label_column: Some(label_column.into()),
            ..Self::default()
        }
    }
}

/// Assigns indices to strings in first-appearance order.
#[derive(Default)]
struct VocabularyBuilder {
    index: HashMap<String, usize>,
    values: Vec<String>,
}

impl VocabularyBuilder {
    fn encode(&mut self, value: &str) -> usize {
        if let Some(&idx) = self.index.get(value) {
            return idx;
        }
        let idx = self.values.len();
        self.index.insert(value.to_string(), idx);
        self.values.push(value.to_string());
        idx
    }
}

/// Loads a delimited file, dropping every row with a missing attribute cell.
pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<CategoricalDataset, DataError> {
    let path = path.as_ref();
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|source| DataError::Io {
            path: path.to_path_buf(),
            source,
        })?;
    parse_csv(&text, opts)
}

/// Parses delimited text with the same rules as [`load_csv`].
pub fn parse_csv(text: &str, opts: &CsvOptions) -> Result<CategoricalDataset, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .delimiter(opts.delimiter)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut records = reader.records();
    let mut header: Option<Vec<String>> = None;
    if opts.has_header {
        match records.next() {
            Some(rec) => header = Some(rec?.iter().map(str::to_string).collect()),
            None => return Err(DataError::Empty),
        }
    }

    let mut raw_rows: Vec<Vec<String>> = Vec::new();
    let mut width = header.as_ref().map(Vec::len);
    for (line, rec) in records.enumerate() {
        let rec = rec?;
        if rec.len() == 1 && rec.get(0) == Some("") {
            continue;
        }
        let expected = *width.get_or_insert(rec.len());
        if rec.len() != expected {
            return Err(DataError::Ragged {
                row: line,
                found: rec.len(),
                expected,
            });
        }
        raw_rows.push(rec.iter().map(str::to_string).collect());
    }
    let width = width.ok_or(DataError::Empty)?;
    let names = header.unwrap_or_else(|| (0..width).map(|c| format!("c{c}")).collect());

    let label_idx = match &opts.label_column {
        Some(col) => Some(
            names
                .iter()
                .position(|n| n == col)
                .ok_or_else(|| DataError::UnknownLabelColumn(col.clone()))?,
        ),
        None => None,
    };
    let attr_cols: Vec<usize> = (0..width).filter(|&c| Some(c) != label_idx).collect();
    if attr_cols.is_empty() {
        return Err(DataError::NoAttributes);
    }

    let kept: Vec<&Vec<String>> = raw_rows
        .iter()
        .filter(|row| attr_cols.iter().all(|&c| row[c] != opts.missing_token))
        .collect();
    if kept.is_empty() {
        return Err(DataError::Empty);
    }

    let mut vocabularies: Vec<VocabularyBuilder> =
        attr_cols.iter().map(|_| VocabularyBuilder::default()).collect();
    let mut label_vocab = VocabularyBuilder::default();
    let mut rows = Vec::with_capacity(kept.len());
    let mut labels = Vec::with_capacity(kept.len());
    for row in kept {
        rows.push(
            attr_cols
                .iter()
                .zip(vocabularies.iter_mut())
                .map(|(&c, vocab)| vocab.encode(&row[c]))
                .collect::<Vec<_>>(),
        );
        if let Some(li) = label_idx {
            labels.push(label_vocab.encode(&row[li]));
        }
    }

    let schemas = attr_cols
        .iter()
        .zip(vocabularies)
        .map(|(&c, vocab)| AttributeSchema {
            name: names[c].clone(),
            vocabulary: vocab.values,
        })
        .collect();
    let labels = label_idx.map(|_| (labels, label_vocab.values));
    CategoricalDataset::new(schemas, rows, labels)
}

/// Renders a dataset back to CSV text, with the label column (if any) last.
pub fn to_csv(ds: &CategoricalDataset, label_column: &str) -> Result<String, DataError> {
    let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
    let mut header: Vec<&str> = ds.schemas.iter().map(|s| s.name.as_str()).collect();
    if ds.labels.is_some() {
        header.push(label_column);
    }
    writer.write_record(&header)?;
    for i in 0..ds.n_samples() {
        let mut record: Vec<&str> = (0..ds.n_attributes()).map(|r| ds.raw_value(i, r)).collect();
        if let Some(labels) = &ds.labels {
            record.push(&ds.label_names[labels[i]]);
        }
        writer.write_record(&record)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| DataError::Invalid(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| DataError::Invalid(e.to_string()))
}

/// Sizes and seed for a planted-cluster synthetic dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub l: usize,
    pub values_per_attribute: usize,
    pub k_true: usize,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(n: usize, l: usize, seed: u64) -> Self {
        Self {
            n,
            l,
            values_per_attribute: 5,
            k_true: 5,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), DataError> {
        for (name, v) in [
            ("n", self.n),
            ("l", self.l),
            ("values_per_attribute", self.values_per_attribute),
            ("k_true", self.k_true),
        ] {
            if v == 0 {
                return Err(DataError::InvalidSpec(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }
}

/// Exponent applied to the uniform weights of each cluster's value
/// distribution. Larger values concentrate mass on fewer values.
const SHARPEN_EXPONENT: i32 = 3;

/// Draws a planted-cluster dataset.
///
/// Each cluster owns, per attribute, a categorical distribution obtained by
/// normalising i.i.d. `U(0,1)^3` weights. Samples pick a cluster uniformly and
/// then draw every attribute from that cluster's distribution. Raw values are
/// named `v0..v{o-1}`; vocabularies hold only the values that were drawn.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<CategoricalDataset, DataError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let o = spec.values_per_attribute;

    // cumulative distributions, indexed [cluster][attribute][value]
    let mut cdfs = vec![vec![vec![0.0f64; o]; spec.l]; spec.k_true];
    for cluster in cdfs.iter_mut() {
        for cdf in cluster.iter_mut() {
            let weights: Vec<f64> = (0..o)
                .map(|_| rng.gen::<f64>().powi(SHARPEN_EXPONENT))
                .collect();
            let total: f64 = weights.iter().sum();
            let mut acc = 0.0;
            for (slot, w) in cdf.iter_mut().zip(&weights) {
                acc += if total > 0.0 { w / total } else { 1.0 / o as f64 };
                *slot = acc;
            }
        }
    }

    let mut vocabularies: Vec<VocabularyBuilder> =
        (0..spec.l).map(|_| VocabularyBuilder::default()).collect();
    let value_names: Vec<String> = (0..o).map(|v| format!("v{v}")).collect();
    let mut rows = Vec::with_capacity(spec.n);
    let mut labels = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let cluster = rng.gen_range(0..spec.k_true);
        labels.push(cluster);
        let row = cdfs[cluster]
            .iter()
            .zip(vocabularies.iter_mut())
            .map(|(cdf, vocab)| {
                let u: f64 = rng.gen();
                let raw = cdf.iter().position(|&c| u < c).unwrap_or(o - 1);
                vocab.encode(&value_names[raw])
            })
            .collect::<Vec<_>>();
        rows.push(row);
    }

    let schemas = vocabularies
        .into_iter()
        .enumerate()
        .map(|(r, vocab)| AttributeSchema {
            name: format!("a{r}"),
            vocabulary: vocab.values,
        })
        .collect();
    let label_names = (0..spec.k_true).map(|c| format!("c{c}")).collect();
    CategoricalDataset::new(schemas, rows, Some((labels, label_names)))
}
