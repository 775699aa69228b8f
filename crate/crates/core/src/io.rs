//! File formats.
//!
//! * Matrix: CSV with one row per line and `d` decimal columns, or JSON
//!   `{"d": d, "rows": [[...], ...]}`.
//! * Sequence: a single CSV line of 1-based states.
//! * Study config: JSON, see [`StudyFile`].

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::chain::{StateSequence, TransitionMatrix};
use crate::error::{Error, Result};
use crate::random::SeedSpec;
use crate::smoothing::SmoothingParam;
use crate::study::{builtin_matrix, StudyConfig};

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct MatrixJson {
    d: usize,
    rows: Vec<Vec<f64>>,
}

/// Parses a matrix in CSV or JSON form (JSON when the text starts with `{`).
pub fn parse_matrix(text: &str) -> Result<TransitionMatrix> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let m: MatrixJson = serde_json::from_str(trimmed).map_err(|e| Error::Parse(e.to_string()))?;
        if m.rows.len() != m.d {
            return Err(Error::DimensionMismatch {
                expected: m.d,
                found: m.rows.len(),
            });
        }
        return TransitionMatrix::from_rows(&m.rows);
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(trimmed.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let row = record
            .iter()
            .map(|field| {
                field
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("not a number: {field:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    TransitionMatrix::from_rows(&rows)
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<TransitionMatrix> {
    parse_matrix(&read_file(path.as_ref())?)
}

/// Full-precision CSV (shortest round-trip representation of each entry).
pub fn matrix_to_csv(p: &TransitionMatrix) -> String {
    let mut out = String::new();
    for row in p.rows() {
        let cells: Vec<String> = row.iter().map(f64::to_string).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// CSV with entries rounded to six decimals, for display.
pub fn matrix_to_csv_rounded(p: &TransitionMatrix) -> String {
    let mut out = String::new();
    for row in p.rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.6}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn matrix_to_json(p: &TransitionMatrix) -> String {
    let m = MatrixJson {
        d: p.dim(),
        rows: p.to_rows(),
    };
    serde_json::to_string_pretty(&m).expect("plain data serializes")
}

/// Parses 1-based states separated by commas or whitespace.
pub fn parse_sequence(text: &str, d: usize) -> Result<StateSequence> {
    let labels = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| Error::Parse(format!("not a state label: {t:?}")))
        })
        .collect::<Result<Vec<usize>>>()?;
    StateSequence::from_one_based(d, &labels)
}

pub fn read_sequence(path: impl AsRef<Path>, d: usize) -> Result<StateSequence> {
    parse_sequence(&read_file(path.as_ref())?, d)
}

pub fn sequence_to_csv(seq: &StateSequence) -> String {
    let labels: Vec<String> = seq.to_one_based().iter().map(usize::to_string).collect();
    format!("{}\n", labels.join(","))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

impl OneOrMany {
    fn to_vec(&self) -> Vec<String> {
        match self {
            OneOrMany::One(s) => vec![s.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

/// On-disk study configuration.
///
/// `truth` names a built-in matrix (`P_I`, `P_II`, `eq8`) or a matrix file
/// path relative to the config file; a list runs one study per matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyFile {
    pub truth: OneOrMany,
    pub n_grid: Vec<usize>,
    pub u_grid: Vec<String>,
    #[serde(rename = "B")]
    pub resamples: usize,
    #[serde(rename = "R")]
    pub replications: usize,
    pub nominal: f64,
    pub cells: Vec<[usize; 2]>,
    pub seed: u64,
    #[serde(default)]
    pub stream: u64,
}

impl StudyFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Resolves matrices and builds one [`StudyConfig`] per truth entry.
    ///
    /// Each truth gets its own sub-stream of the configured seed.
    pub fn into_configs(self, base_dir: &Path) -> Result<Vec<StudyConfig>> {
        let u_grid = self
            .u_grid
            .iter()
            .map(|s| s.parse::<SmoothingParam>())
            .collect::<Result<Vec<_>>>()?;
        let root = SeedSpec::new(self.seed, self.stream);
        self.truth
            .to_vec()
            .into_iter()
            .enumerate()
            .map(|(idx, name)| {
                let truth = match builtin_matrix(&name) {
                    Some(m) => m,
                    None => read_matrix(resolve(base_dir, &name))?,
                };
                let cfg = StudyConfig {
                    truth_name: name,
                    truth,
                    n_grid: self.n_grid.clone(),
                    u_grid: u_grid.clone(),
                    resamples: self.resamples,
                    replications: self.replications,
                    nominal: self.nominal,
                    cells: self.cells.iter().map(|c| (c[0], c[1])).collect(),
                    seed: root.child(idx as u64),
                };
                cfg.validate()?;
                Ok(cfg)
            })
            .collect()
    }
}

fn resolve(base_dir: &Path, name: &str) -> PathBuf {
    let p = Path::new(name);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base_dir.join(p)
    }
}

pub fn read_study_configs(path: impl AsRef<Path>) -> Result<Vec<StudyConfig>> {
    let path = path.as_ref();
    let file = StudyFile::parse(&read_file(path)?)?;
    file.into_configs(path.parent().unwrap_or(Path::new(".")))
}
