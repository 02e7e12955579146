//! The Monte Carlo measurement grid and its statistical summaries.
//!
//! [`run_grid`] evaluates one entropy measure for every (record, encoding
//! table) cell of a dataset crossed with an encoding set. Cells are
//! independent and computed in parallel, then assembled into a canonical
//! row order (item, encoding set, encoding index), so output is identical
//! regardless of scheduling. Aggregation pools every encoding of an item
//! (across sets, when several are merged); group comparisons run Welch's
//! t-test on per-item means by default, or on raw per-encoding values.
//!
//! Results persist as CSV with header `item,encoding_set,encoding_index,
//! measure,value` and values printed to 9 decimal places, fixed so repeat
//! runs are byte-comparable. The summary JSON carries per-item aggregates
//! and a provenance block (seeds, labels, widths, generator, tool version)
//! sufficient to reproduce the run.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bitstring::DerivativeMode;
use crate::dataset::KnotDataset;
use crate::encoding::{encode_sequence, EncodingSet};
use crate::entropy::{bientropy, WeightScheme};
use crate::stats::{self, GroupStats, StatsError};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("unknown measure {name:?} (expected bien, tbien, kbien or ktbien)")]
    UnknownMeasure { name: String },
    #[error("cannot merge results for different measures ({left} vs {right})")]
    MeasureMismatch { left: String, right: String },
    #[error("item {item:?} appears in more than one dataset")]
    AmbiguousItem { item: String },
    #[error("{grouping} grouping: required metadata missing for every item")]
    MetadataMissing { grouping: &'static str },
    #[error("group {group:?} has no observations")]
    EmptyGroup { group: String },
    #[error("results row {row}: {detail}")]
    MalformedRow { row: usize, detail: String },
    #[error("results table has no rows")]
    Empty,
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// Which BiEntropy variant the grid evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Measure {
    Bien,
    Tbien,
    Kbien,
    #[default]
    Ktbien,
}

impl Measure {
    pub fn name(self) -> &'static str {
        match self {
            Measure::Bien => "BiEn",
            Measure::Tbien => "TBiEn",
            Measure::Kbien => "KBiEn",
            Measure::Ktbien => "KTBiEn",
        }
    }

    pub fn mode(self) -> DerivativeMode {
        match self {
            Measure::Bien | Measure::Tbien => DerivativeMode::Linear,
            Measure::Kbien | Measure::Ktbien => DerivativeMode::Cyclic,
        }
    }

    pub fn scheme(self) -> WeightScheme {
        match self {
            Measure::Bien | Measure::Kbien => WeightScheme::PowerOfTwo,
            Measure::Tbien | Measure::Ktbien => WeightScheme::Logarithmic,
        }
    }
}

impl FromStr for Measure {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "bien" => Ok(Measure::Bien),
            "tbien" => Ok(Measure::Tbien),
            "kbien" => Ok(Measure::Kbien),
            "ktbien" => Ok(Measure::Ktbien),
            _ => Err(ExperimentError::UnknownMeasure {
                name: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One measured cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub item: String,
    pub encoding_set: String,
    pub encoding_index: u32,
    pub value: f64,
}

/// Per-item annotations carried alongside the grid for grouping.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ItemMeta {
    pub dataset_label: String,
    /// NEWSUD letter count of the item.
    pub letters: usize,
    pub crossings: Option<u32>,
    pub alternating: Option<bool>,
}

/// Provenance of one encoding set used by a grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EncodingSetInfo {
    pub label: String,
    pub seed: Option<u64>,
    pub bit_width: u32,
    pub table_count: usize,
    pub generator: Option<String>,
}

/// A complete grid of measure values plus enough context to aggregate,
/// group and reproduce it.
#[derive(Debug, Clone)]
pub struct ResultTable {
    measure: Measure,
    rows: Vec<ResultRow>,
    item_order: Vec<String>,
    set_order: Vec<String>,
    item_meta: BTreeMap<String, ItemMeta>,
    encoding_sets: Vec<EncodingSetInfo>,
    dataset_labels: Vec<String>,
}

impl ResultTable {
    /// Builds a table from bare rows (fixtures, loaded CSV). Item and set
    /// order follow first appearance.
    pub fn from_rows(
        measure: Measure,
        rows: Vec<ResultRow>,
    ) -> Result<ResultTable, ExperimentError> {
        if rows.is_empty() {
            return Err(ExperimentError::Empty);
        }
        let mut item_order = Vec::new();
        let mut set_order = Vec::new();
        let mut items_seen = HashSet::new();
        let mut sets_seen = HashSet::new();
        for row in &rows {
            if items_seen.insert(row.item.clone()) {
                item_order.push(row.item.clone());
            }
            if sets_seen.insert(row.encoding_set.clone()) {
                set_order.push(row.encoding_set.clone());
            }
        }
        Ok(ResultTable {
            measure,
            rows,
            item_order,
            set_order,
            item_meta: BTreeMap::new(),
            encoding_sets: Vec::new(),
            dataset_labels: Vec::new(),
        })
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn rows(&self) -> &[ResultRow] {
        &self.rows
    }

    pub fn item_order(&self) -> &[String] {
        &self.item_order
    }

    pub fn item_meta(&self) -> &BTreeMap<String, ItemMeta> {
        &self.item_meta
    }

    pub fn encoding_sets(&self) -> &[EncodingSetInfo] {
        &self.encoding_sets
    }

    pub fn dataset_labels(&self) -> &[String] {
        &self.dataset_labels
    }

    /// Combines two grids (e.g. the same dataset under a second encoding
    /// set) and re-sorts rows into canonical (item, set, index) order.
    pub fn merge(mut self, other: ResultTable) -> Result<ResultTable, ExperimentError> {
        if self.measure != other.measure {
            return Err(ExperimentError::MeasureMismatch {
                left: self.measure.name().to_string(),
                right: other.measure.name().to_string(),
            });
        }
        for item in other.item_order {
            if !self.item_order.contains(&item) {
                self.item_order.push(item);
            }
        }
        for set in other.set_order {
            if !self.set_order.contains(&set) {
                self.set_order.push(set);
            }
        }
        for (item, meta) in other.item_meta {
            match self.item_meta.get(&item) {
                Some(existing) if *existing != meta => {
                    return Err(ExperimentError::AmbiguousItem { item })
                }
                _ => {
                    self.item_meta.insert(item, meta);
                }
            }
        }
        self.encoding_sets.extend(other.encoding_sets);
        for label in other.dataset_labels {
            if !self.dataset_labels.contains(&label) {
                self.dataset_labels.push(label);
            }
        }
        self.rows.extend(other.rows);

        let item_index: HashMap<&str, usize> = self
            .item_order
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let set_index: HashMap<&str, usize> = self
            .set_order
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        self.rows.sort_by_key(|r| {
            (
                item_index[r.item.as_str()],
                set_index[r.encoding_set.as_str()],
                r.encoding_index,
            )
        });
        Ok(self)
    }

    /// Attaches item metadata by looking names up in the given datasets.
    /// Items not found in any dataset are left bare; a name found in two
    /// datasets is an error.
    pub fn attach_metadata(&mut self, datasets: &[&KnotDataset]) -> Result<(), ExperimentError> {
        let mut by_name: HashMap<&str, ItemMeta> = HashMap::new();
        for ds in datasets {
            for rec in ds.records() {
                let meta = ItemMeta {
                    dataset_label: ds.label().to_string(),
                    letters: rec.newsud.len(),
                    crossings: rec.crossings,
                    alternating: rec.alternating,
                };
                if by_name.insert(rec.name.as_str(), meta).is_some() {
                    return Err(ExperimentError::AmbiguousItem {
                        item: rec.name.clone(),
                    });
                }
            }
        }
        for item in &self.item_order {
            if let Some(meta) = by_name.get(item.as_str()) {
                self.item_meta.insert(item.clone(), meta.clone());
                if !self.dataset_labels.contains(&meta.dataset_label) {
                    self.dataset_labels.push(meta.dataset_label.clone());
                }
            }
        }
        Ok(())
    }
}

/// Evaluates `measure` for every (record, table) cell: each record's
/// NEWSUD string is encoded under each table and the resulting bit string
/// measured. Cells run in parallel; rows come back in (item, encoding
/// index) order independent of scheduling. Emptiness is ruled out upstream:
/// neither a [`KnotDataset`] nor an [`EncodingSet`] can be constructed
/// without content.
pub fn run_grid(
    dataset: &KnotDataset,
    encodings: &EncodingSet,
    measure: Measure,
) -> Result<ResultTable, ExperimentError> {
    let mode = measure.mode();
    let scheme = measure.scheme();
    let per_item: Vec<Vec<f64>> = dataset
        .records()
        .par_iter()
        .map(|rec| {
            encodings
                .tables()
                .iter()
                .map(|table| {
                    let bits = encode_sequence(&rec.newsud, table);
                    bientropy(&bits, mode, scheme)
                        .expect("encoded strings have >= 3 bits")
                        .value
                })
                .collect()
        })
        .collect();

    let mut rows = Vec::with_capacity(dataset.len() * encodings.len());
    let mut item_order = Vec::with_capacity(dataset.len());
    let mut item_meta = BTreeMap::new();
    for (rec, values) in dataset.records().iter().zip(per_item) {
        item_order.push(rec.name.clone());
        item_meta.insert(
            rec.name.clone(),
            ItemMeta {
                dataset_label: dataset.label().to_string(),
                letters: rec.newsud.len(),
                crossings: rec.crossings,
                alternating: rec.alternating,
            },
        );
        for (index, value) in values.into_iter().enumerate() {
            rows.push(ResultRow {
                item: rec.name.clone(),
                encoding_set: encodings.label().to_string(),
                encoding_index: index as u32,
                value,
            });
        }
    }
    Ok(ResultTable {
        measure,
        rows,
        item_order,
        set_order: vec![encodings.label().to_string()],
        item_meta,
        encoding_sets: vec![EncodingSetInfo {
            label: encodings.label().to_string(),
            seed: encodings.seed(),
            bit_width: encodings.bit_width(),
            table_count: encodings.len(),
            generator: encodings.generator().map(str::to_string),
        }],
        dataset_labels: vec![dataset.label().to_string()],
    })
}

/// Per-item summary over all encodings (all sets pooled).
#[derive(Debug, Clone, Serialize)]
pub struct ItemAggregate {
    pub item: String,
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    /// Standard error of the mean, `sd / sqrt(n)`.
    pub stderr: f64,
    pub min: f64,
    pub max: f64,
}

/// One aggregate row per item, in the table's item order. Values are
/// summed in sorted order, so aggregates depend only on the multiset of
/// values, not on row arrangement.
pub fn aggregate(table: &ResultTable) -> Vec<ItemAggregate> {
    let mut values: HashMap<&str, Vec<f64>> = HashMap::new();
    for row in &table.rows {
        values.entry(row.item.as_str()).or_default().push(row.value);
    }
    table
        .item_order
        .iter()
        .filter_map(|item| {
            let mut vs = values.remove(item.as_str())?;
            vs.sort_by(f64::total_cmp);
            let n = vs.len();
            let mean = stats::mean(&vs);
            let sd = stats::sample_sd(&vs);
            Some(ItemAggregate {
                item: item.clone(),
                n,
                mean,
                sd,
                stderr: sd / (n as f64).sqrt(),
                min: vs[0],
                max: vs[n - 1],
            })
        })
        .collect()
}

/// How items are split or bucketed for comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Grouping {
    /// Items from the named control datasets against everything else.
    KnotsVsControls { control_labels: BTreeSet<String> },
    /// Alternating against non-alternating items, optionally restricted to
    /// one crossing number.
    AlternatingVsNon { crossings: Option<u32> },
    /// Mean per crossing number.
    ByCrossings,
    /// Mean per NEWSUD letter count.
    ByLength,
}

/// What counts as one observation in a comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Observations {
    /// One observation per item: its mean over all encodings.
    #[default]
    ItemMeans,
    /// Every per-encoding value is an observation.
    Raw,
}

/// Mean of one bucket of a [`Grouping::ByCrossings`] / [`Grouping::ByLength`]
/// summary.
#[derive(Debug, Clone, Serialize)]
pub struct BucketSummary {
    /// Crossing number or letter count.
    pub bucket: u32,
    pub n_items: usize,
    pub n_obs: usize,
    pub mean: f64,
    pub sd: f64,
}

/// Outcome of [`group_compare`]: a two-group test or per-bucket means.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupReport {
    Test(GroupStats),
    Buckets { buckets: Vec<BucketSummary> },
}

fn observations_for<'a>(
    table: &'a ResultTable,
    items: &HashSet<&str>,
    mode: Observations,
    aggregates: &'a [ItemAggregate],
) -> Vec<f64> {
    let mut obs: Vec<f64> = match mode {
        Observations::ItemMeans => aggregates
            .iter()
            .filter(|a| items.contains(a.item.as_str()))
            .map(|a| a.mean)
            .collect(),
        Observations::Raw => table
            .rows
            .iter()
            .filter(|r| items.contains(r.item.as_str()))
            .map(|r| r.value)
            .collect(),
    };
    obs.sort_by(f64::total_cmp);
    obs
}

/// Splits or buckets the table's items per `grouping` and compares them.
/// Items lacking the needed metadata are excluded; it is an error for all
/// of them to lack it.
pub fn group_compare(
    table: &ResultTable,
    grouping: &Grouping,
    observations: Observations,
) -> Result<GroupReport, ExperimentError> {
    let aggregates = aggregate(table);
    match grouping {
        Grouping::KnotsVsControls { control_labels } => {
            let mut knots: HashSet<&str> = HashSet::new();
            let mut controls: HashSet<&str> = HashSet::new();
            for (item, meta) in &table.item_meta {
                if control_labels.contains(&meta.dataset_label) {
                    controls.insert(item.as_str());
                } else {
                    knots.insert(item.as_str());
                }
            }
            if table.item_meta.is_empty() {
                return Err(ExperimentError::MetadataMissing {
                    grouping: "knots-vs-controls",
                });
            }
            let a = observations_for(table, &knots, observations, &aggregates);
            let b = observations_for(table, &controls, observations, &aggregates);
            ensure_group("knots", &a)?;
            ensure_group("controls", &b)?;
            Ok(GroupReport::Test(stats::welch_t_test(
                "knots", &a, "controls", &b,
            )?))
        }
        Grouping::AlternatingVsNon { crossings } => {
            let mut alternating: HashSet<&str> = HashSet::new();
            let mut non_alternating: HashSet<&str> = HashSet::new();
            let mut any_metadata = false;
            for (item, meta) in &table.item_meta {
                if let Some(filter) = crossings {
                    if meta.crossings != Some(*filter) {
                        continue;
                    }
                }
                match meta.alternating {
                    Some(true) => {
                        alternating.insert(item.as_str());
                        any_metadata = true;
                    }
                    Some(false) => {
                        non_alternating.insert(item.as_str());
                        any_metadata = true;
                    }
                    None => {}
                }
            }
            if !any_metadata {
                return Err(ExperimentError::MetadataMissing {
                    grouping: "alternating-vs-non",
                });
            }
            let a = observations_for(table, &alternating, observations, &aggregates);
            let b = observations_for(table, &non_alternating, observations, &aggregates);
            ensure_group("alternating", &a)?;
            ensure_group("non-alternating", &b)?;
            Ok(GroupReport::Test(stats::welch_t_test(
                "alternating",
                &a,
                "non-alternating",
                &b,
            )?))
        }
        Grouping::ByCrossings => {
            bucket_summary(table, observations, &aggregates, "by-crossings", |meta| {
                meta.crossings
            })
        }
        Grouping::ByLength => {
            bucket_summary(table, observations, &aggregates, "by-length", |meta| {
                Some(meta.letters as u32)
            })
        }
    }
}

fn ensure_group(name: &str, obs: &[f64]) -> Result<(), ExperimentError> {
    if obs.is_empty() {
        return Err(ExperimentError::EmptyGroup {
            group: name.to_string(),
        });
    }
    Ok(())
}

fn bucket_summary(
    table: &ResultTable,
    observations: Observations,
    aggregates: &[ItemAggregate],
    grouping: &'static str,
    key: impl Fn(&ItemMeta) -> Option<u32>,
) -> Result<GroupReport, ExperimentError> {
    let mut buckets: BTreeMap<u32, Vec<&str>> = BTreeMap::new();
    for (item, meta) in &table.item_meta {
        if let Some(k) = key(meta) {
            buckets.entry(k).or_default().push(item.as_str());
        }
    }
    if buckets.is_empty() {
        return Err(ExperimentError::MetadataMissing { grouping });
    }
    let mut out = Vec::with_capacity(buckets.len());
    for (bucket, items) in buckets {
        let set: HashSet<&str> = items.iter().copied().collect();
        let obs = observations_for(table, &set, observations, aggregates);
        out.push(BucketSummary {
            bucket,
            n_items: items.len(),
            n_obs: obs.len(),
            mean: stats::mean(&obs),
            sd: stats::sample_sd(&obs),
        });
    }
    Ok(GroupReport::Buckets { buckets: out })
}

pub const RESULTS_CSV_HEADER: &str = "item,encoding_set,encoding_index,measure,value";

/// Writes the pinned results CSV: one row per cell, values to 9 decimal
/// places.
pub fn write_results_csv(table: &ResultTable, mut w: impl Write) -> Result<(), ExperimentError> {
    writeln!(w, "{RESULTS_CSV_HEADER}")?;
    let measure = table.measure.name();
    for row in &table.rows {
        writeln!(
            w,
            "{},{},{},{},{:.9}",
            row.item, row.encoding_set, row.encoding_index, measure, row.value
        )?;
    }
    Ok(())
}

pub fn save_results_csv(
    table: &ResultTable,
    path: impl AsRef<Path>,
) -> Result<(), ExperimentError> {
    let mut buf = Vec::new();
    write_results_csv(table, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn load_results_csv(path: impl AsRef<Path>) -> Result<ResultTable, ExperimentError> {
    let content = fs::read_to_string(path)?;
    parse_results_csv(&content)
}

pub fn parse_results_csv(content: &str) -> Result<ResultTable, ExperimentError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(content.as_bytes());
    let mut rows = Vec::new();
    let mut measure: Option<Measure> = None;
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row_no = i + 1;
        if record.len() != 5 {
            return Err(ExperimentError::MalformedRow {
                row: row_no,
                detail: format!("expected 5 cells, got {}", record.len()),
            });
        }
        let m: Measure = record[3].parse()?;
        match measure {
            None => measure = Some(m),
            Some(existing) if existing != m => {
                return Err(ExperimentError::MeasureMismatch {
                    left: existing.name().to_string(),
                    right: m.name().to_string(),
                });
            }
            _ => {}
        }
        let encoding_index: u32 = record[2]
            .parse()
            .map_err(|_| ExperimentError::MalformedRow {
                row: row_no,
                detail: format!("bad encoding index {:?}", &record[2]),
            })?;
        let value: f64 = record[4]
            .parse()
            .map_err(|_| ExperimentError::MalformedRow {
                row: row_no,
                detail: format!("bad value {:?}", &record[4]),
            })?;
        rows.push(ResultRow {
            item: record[0].to_string(),
            encoding_set: record[1].to_string(),
            encoding_index,
            value,
        });
    }
    let measure = measure.ok_or(ExperimentError::Empty)?;
    ResultTable::from_rows(measure, rows)
}

/// Reproducibility block embedded in summaries.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool_version: String,
    pub measure: String,
    pub dataset_labels: Vec<String>,
    pub encoding_sets: Vec<EncodingSetInfo>,
}

/// The summary JSON payload: provenance plus per-item aggregates.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub provenance: Provenance,
    pub items: Vec<ItemAggregate>,
    pub item_meta: BTreeMap<String, ItemMeta>,
}

pub fn build_summary(table: &ResultTable, tool_version: &str) -> Summary {
    Summary {
        provenance: Provenance {
            tool_version: tool_version.to_string(),
            measure: table.measure.name().to_string(),
            dataset_labels: table.dataset_labels.clone(),
            encoding_sets: table.encoding_sets.clone(),
        },
        items: aggregate(table),
        item_meta: table.item_meta.clone(),
    }
}

pub fn write_summary_json(summary: &Summary, mut w: impl Write) -> Result<(), ExperimentError> {
    serde_json::to_writer_pretty(&mut w, summary).map_err(std::io::Error::other)?;
    writeln!(w)?;
    Ok(())
}
