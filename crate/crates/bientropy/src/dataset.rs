//! Ingestion of annotated NEWSUD datasets and distribution-matched
//! randomised controls.
//!
//! The on-disk form is CSV with header `name,crossings,alternating,newsud`;
//! `crossings` and `alternating` may be empty, and lines starting with `#`
//! are comments (an optional `# label: NAME` comment names the dataset).
//! Every record is geometrically validated on load, but validation findings
//! never block ingestion: controls are random walks, and transcribed data
//! can carry defects worth measuring rather than rejecting.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::lattice::{self, Direction, DirectionSequence, ValidationReport, MIN_KNOT_STEPS};
use crate::rng::SplitMix64;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row}: duplicate record name {name:?}")]
    DuplicateName { row: usize, name: String },
    #[error("row {row}: record name is empty")]
    EmptyName { row: usize },
    #[error("row {row} ({name}): bad NEWSUD string: {source}")]
    BadSequence {
        row: usize,
        name: String,
        source: lattice::LatticeError,
    },
    #[error("dataset {label:?} has no records")]
    Empty { label: String },
}

/// One named, annotated NEWSUD entry.
#[derive(Debug, Clone)]
pub struct KnotRecord {
    pub name: String,
    pub crossings: Option<u32>,
    pub alternating: Option<bool>,
    pub newsud: DirectionSequence,
    pub validation: ValidationReport,
    /// Soft findings, e.g. a claimed knot shorter than 24 steps.
    pub warnings: Vec<String>,
}

impl KnotRecord {
    pub fn new(
        name: impl Into<String>,
        crossings: Option<u32>,
        alternating: Option<bool>,
        newsud: DirectionSequence,
    ) -> KnotRecord {
        let validation = lattice::validate_polygon(&newsud);
        let mut warnings = Vec::new();
        if let Some(c) = crossings {
            if c >= 3 && !validation.meets_min_knot_length {
                warnings.push(format!(
                    "{} steps is below the {MIN_KNOT_STEPS}-step minimum for a knot",
                    validation.length
                ));
            }
        }
        KnotRecord {
            name: name.into(),
            crossings,
            alternating,
            newsud,
            validation,
            warnings,
        }
    }
}

/// A labelled, ordered collection of records plus the letter distribution
/// of all sequences concatenated.
#[derive(Debug, Clone)]
pub struct KnotDataset {
    label: String,
    records: Vec<KnotRecord>,
    /// Letter frequencies in [`Direction::ALL`] order; sums to 1.
    char_distribution: [f64; 6],
}

impl KnotDataset {
    pub fn from_records(
        label: impl Into<String>,
        records: Vec<KnotRecord>,
    ) -> Result<KnotDataset, DatasetError> {
        let label = label.into();
        if records.is_empty() {
            return Err(DatasetError::Empty { label });
        }
        let mut seen = HashSet::new();
        for (i, rec) in records.iter().enumerate() {
            if rec.name.is_empty() {
                return Err(DatasetError::EmptyName { row: i + 1 });
            }
            if !seen.insert(rec.name.clone()) {
                return Err(DatasetError::DuplicateName {
                    row: i + 1,
                    name: rec.name.clone(),
                });
            }
        }
        let char_distribution = distribution_of(&records);
        Ok(KnotDataset {
            label,
            records,
            char_distribution,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn records(&self) -> &[KnotRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        false // non-empty by construction
    }

    /// Letter frequencies in [`Direction::ALL`] order.
    pub fn char_distribution(&self) -> [f64; 6] {
        self.char_distribution
    }
}

fn distribution_of(records: &[KnotRecord]) -> [f64; 6] {
    let mut counts = [0usize; 6];
    for rec in records {
        let c = rec.newsud.letter_counts();
        for i in 0..6 {
            counts[i] += c[i];
        }
    }
    let total: usize = counts.iter().sum();
    let mut dist = [0.0f64; 6];
    if total > 0 {
        for i in 0..6 {
            dist[i] = counts[i] as f64 / total as f64;
        }
    }
    dist
}

#[derive(Debug, Deserialize)]
struct RawRow {
    name: String,
    crossings: Option<u32>,
    alternating: Option<bool>,
    newsud: String,
}

/// Loads a dataset from CSV. The label comes from a `# label:` comment if
/// present, otherwise the file stem.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<KnotDataset, DatasetError> {
    let path = path.as_ref();
    let content = fs::read_to_string(path)?;
    let default_label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    load_dataset_from_str(&content, &default_label)
}

pub fn load_dataset_from_str(
    content: &str,
    default_label: &str,
) -> Result<KnotDataset, DatasetError> {
    let mut label = default_label.to_string();
    for line in content.lines() {
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(value) = rest.trim().strip_prefix("label:") {
                label = value.trim().to_string();
            }
        }
    }
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(content.as_bytes());
    let mut records = Vec::new();
    for (i, row) in reader.deserialize::<RawRow>().enumerate() {
        let row = row?;
        let data_row = i + 1;
        if row.name.is_empty() {
            return Err(DatasetError::EmptyName { row: data_row });
        }
        let newsud =
            DirectionSequence::parse(&row.newsud).map_err(|source| DatasetError::BadSequence {
                row: data_row,
                name: row.name.clone(),
                source,
            })?;
        records.push(KnotRecord::new(
            row.name,
            row.crossings,
            row.alternating,
            newsud,
        ));
    }
    KnotDataset::from_records(label, records)
}

/// Writes a dataset as CSV, with any extra comment lines (sans `#`) first.
pub fn save_dataset(
    dataset: &KnotDataset,
    path: impl AsRef<Path>,
    comments: &[String],
) -> Result<(), DatasetError> {
    let mut out = Vec::new();
    write_dataset(dataset, &mut out, comments)?;
    fs::write(path, out)?;
    Ok(())
}

pub fn write_dataset(
    dataset: &KnotDataset,
    mut w: impl Write,
    comments: &[String],
) -> Result<(), DatasetError> {
    writeln!(w, "# label: {}", dataset.label())?;
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    writeln!(w, "name,crossings,alternating,newsud")?;
    for rec in dataset.records() {
        let crossings = rec.crossings.map(|c| c.to_string()).unwrap_or_default();
        let alternating = rec.alternating.map(|a| a.to_string()).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{}",
            rec.name,
            crossings,
            alternating,
            rec.newsud.text()
        )?;
    }
    Ok(())
}

/// How control sequences are randomised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ControlMode {
    /// Letters drawn i.i.d. from the dataset-wide letter distribution;
    /// lengths match the source record-for-record.
    #[default]
    IidDistribution,
    /// Each record's own letters shuffled, preserving per-record letter
    /// counts exactly.
    PermuteEachRecord,
}

/// Builds a randomised control dataset: one record per source record with
/// the same length, letters randomised per `mode`, names suffixed with the
/// control label. Controls are not constrained to close or self-avoid.
/// Deterministic for a given `(source, seed, mode)`.
pub fn generate_controls(
    source: &KnotDataset,
    seed: u64,
    label: &str,
    mode: ControlMode,
) -> Result<KnotDataset, DatasetError> {
    if source.records().is_empty() {
        return Err(DatasetError::Empty {
            label: source.label().to_string(),
        });
    }
    let mut rng = SplitMix64::new(seed);
    let dist = source.char_distribution();
    let mut cumulative = [0.0f64; 6];
    let mut acc = 0.0;
    for i in 0..6 {
        acc += dist[i];
        cumulative[i] = acc;
    }

    let mut records = Vec::with_capacity(source.len());
    for rec in source.records() {
        let directions = match mode {
            ControlMode::IidDistribution => {
                let mut dirs = Vec::with_capacity(rec.newsud.len());
                for _ in 0..rec.newsud.len() {
                    let x = rng.next_f64();
                    let pick = Direction::ALL
                        .into_iter()
                        .zip(cumulative)
                        .find(|(_, edge)| x < *edge)
                        .map(|(d, _)| d)
                        .unwrap_or(Direction::ALL[5]);
                    dirs.push(pick);
                }
                dirs
            }
            ControlMode::PermuteEachRecord => {
                let mut dirs = rec.newsud.directions().to_vec();
                rng.shuffle(&mut dirs);
                dirs
            }
        };
        let newsud = DirectionSequence::from_directions(directions).expect("length >= 1");
        records.push(KnotRecord::new(
            format!("{}_{}", rec.name, label),
            None,
            None,
            newsud,
        ));
    }
    KnotDataset::from_records(label, records)
}
