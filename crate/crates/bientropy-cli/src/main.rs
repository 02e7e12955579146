//! `bientropy`: order/disorder measurement of binary strings and
//! NEWSUD-encoded lattice knots, with a reproducible Monte Carlo
//! encoding-experiment pipeline.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use bientropy::bitstring::{derivative_chain, DerivativeMode};
use bientropy::dataset::{self, ControlMode, KnotDataset};
use bientropy::encoding::{generate_encoding_set, load_encoding_set, save_encoding_set};
use bientropy::entropy::{bientropy as bientropy_of, BiEntropyResult, WeightScheme};
use bientropy::experiment::{
    build_summary, group_compare, load_results_csv, run_grid, save_results_csv, write_summary_json,
    GroupReport, Grouping, Measure, Observations, ResultTable,
};
use bientropy::rng::GENERATOR_ID;
use bientropy::BitString;

#[derive(Parser)]
#[command(
    name = "bientropy",
    version,
    about = "BiEntropy measures of binary strings and lattice knots",
    args_conflicts_with_subcommands = true
)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    #[command(flatten)]
    measure: MeasureArgs,
}

/// Bare invocation: `bientropy <INPUT> [--mode ..] [--scheme ..] [--trace]`.
#[derive(Args)]
struct MeasureArgs {
    /// Bit string of '0'/'1' characters, or 0x-prefixed hex (needs --bits)
    input: Option<String>,
    /// Exact bit length of a hex input
    #[arg(long)]
    bits: Option<usize>,
    /// Derivative chain shape
    #[arg(long, value_enum, default_value_t = ModeArg::Knot)]
    mode: ModeArg,
    /// Weighting of the per-level entropies
    #[arg(long, value_enum, default_value_t = SchemeArg::Tbien)]
    scheme: SchemeArg,
    /// Print the per-level working alongside the value
    #[arg(long)]
    trace: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Geometrically validate every record of a knots CSV
    Validate {
        /// Knots CSV (header: name,crossings,alternating,newsud)
        #[arg(long)]
        knots: PathBuf,
        /// Exit nonzero if any record fails closure or self-avoidance
        #[arg(long)]
        strict: bool,
    },
    /// Generate a seeded set of random injective direction encodings
    GenEncodings {
        /// Seed (decimal or 0x-hex)
        #[arg(long, value_parser = parse_seed)]
        seed: u64,
        #[arg(long, default_value_t = 256)]
        count: usize,
        /// Code width in bits (3, 4 or 8)
        #[arg(long, default_value_t = 8)]
        width: u32,
        /// Label recorded in the file metadata (e.g. ENCODING_A)
        #[arg(long)]
        label: String,
        /// Output CSV path
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Generate a randomised control dataset matching a source dataset
    GenControls {
        /// Source knots CSV
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_parser = parse_seed)]
        seed: u64,
        /// Label of the control dataset; also suffixes record names
        #[arg(long)]
        label: String,
        /// iid samples the dataset-wide letter distribution; permute
        /// shuffles each record's own letters
        #[arg(long, value_enum, default_value_t = ControlModeArg::Iid)]
        mode: ControlModeArg,
        /// Output CSV path
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Measure every (record, encoding) cell of a dataset
    Experiment {
        /// Knots CSV
        #[arg(long)]
        knots: PathBuf,
        /// Encodings CSV (repeat for several sets)
        #[arg(long, required = true)]
        encodings: Vec<PathBuf>,
        /// bien, tbien, kbien or ktbien
        #[arg(long, default_value = "ktbien")]
        measure: String,
        /// Results CSV path
        #[arg(short, long)]
        output: PathBuf,
        /// Summary JSON path
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Manifest path (default: <output>.manifest.json)
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Group statistics over results files
    Report {
        /// Results CSV (repeatable; rows are pooled)
        #[arg(long, required = true)]
        results: Vec<PathBuf>,
        /// Dataset CSVs supplying item metadata (crossings, lengths, labels)
        #[arg(long)]
        knots: Vec<PathBuf>,
        #[arg(long, value_enum)]
        grouping: GroupingArg,
        /// Restrict alternating-vs-non to one crossing number
        #[arg(long)]
        crossings: Option<u32>,
        /// Dataset label(s) forming the control side of knots-vs-controls
        #[arg(long)]
        control_label: Vec<String>,
        #[arg(long, value_enum, default_value_t = ObservationsArg::ItemMeans)]
        observations: ObservationsArg,
        /// Also write the report as JSON
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Linear,
    Knot,
}

impl From<ModeArg> for DerivativeMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Linear => DerivativeMode::Linear,
            ModeArg::Knot => DerivativeMode::Cyclic,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    /// Power-of-two weights
    Bien,
    /// Logarithmic weights
    Tbien,
    /// Linear weights
    Lbien,
    /// Zero weights (plain Shannon entropy)
    Pbien,
}

impl SchemeArg {
    fn scheme(self) -> WeightScheme {
        match self {
            SchemeArg::Bien => WeightScheme::PowerOfTwo,
            SchemeArg::Tbien => WeightScheme::Logarithmic,
            SchemeArg::Lbien => WeightScheme::Linear,
            SchemeArg::Pbien => WeightScheme::Zero,
        }
    }

    fn label(self, mode: ModeArg) -> String {
        let base = match self {
            SchemeArg::Bien => "BiEn",
            SchemeArg::Tbien => "TBiEn",
            SchemeArg::Lbien => "LBiEn",
            SchemeArg::Pbien => "PBiEn",
        };
        match mode {
            ModeArg::Linear => base.to_string(),
            ModeArg::Knot => format!("K{base}"),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ControlModeArg {
    Iid,
    Permute,
}

#[derive(Clone, Copy, ValueEnum)]
enum GroupingArg {
    KnotsVsControls,
    AlternatingVsNon,
    ByCrossings,
    ByLength,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObservationsArg {
    ItemMeans,
    Raw,
}

fn parse_seed(value: &str) -> Result<u64, String> {
    let parsed = if let Some(hex) = value
        .strip_prefix("0x")
        .or_else(|| value.strip_prefix("0X"))
    {
        u64::from_str_radix(hex, 16)
    } else {
        value.parse()
    };
    parsed.map_err(|_| format!("{value:?} is not a decimal or 0x-hex 64-bit value"))
}

/// Errors split by exit code: usage problems exit 1, data problems exit 2.
enum CliError {
    Usage(String),
    Data(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage: {msg}"),
            CliError::Data(msg) => write!(f, "{msg}"),
        }
    }
}

impl<E: std::error::Error> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Data(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{e}");
                    ExitCode::from(1)
                }
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(err @ CliError::Usage(_)) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
        Err(err @ CliError::Data(_)) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Some(Command::Validate { knots, strict }) => cmd_validate(&knots, strict),
        Some(Command::GenEncodings {
            seed,
            count,
            width,
            label,
            output,
        }) => cmd_gen_encodings(seed, count, width, &label, &output),
        Some(Command::GenControls {
            input,
            seed,
            label,
            mode,
            output,
        }) => cmd_gen_controls(&input, seed, &label, mode, &output),
        Some(Command::Experiment {
            knots,
            encodings,
            measure,
            output,
            summary,
            manifest,
        }) => cmd_experiment(&knots, &encodings, &measure, &output, summary, manifest),
        Some(Command::Report {
            results,
            knots,
            grouping,
            crossings,
            control_label,
            observations,
            json,
        }) => cmd_report(
            &results,
            &knots,
            grouping,
            crossings,
            control_label,
            observations,
            json,
        ),
        None => cmd_bientropy(cli.measure),
    }
}

/// Round to two decimals, ties away from zero, matching the convention of
/// printed worked examples.
fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn cmd_bientropy(args: MeasureArgs) -> Result<ExitCode, CliError> {
    let input = args.input.as_deref().ok_or_else(|| {
        CliError::Usage("expected a bit string or a subcommand; see --help".into())
    })?;
    let bits = parse_bit_input(input, args.bits)?;
    let mode: DerivativeMode = args.mode.into();
    let result = bientropy_of(&bits, mode, args.scheme.scheme())?;
    if args.trace {
        print_trace(&bits, &result, &args.scheme.label(args.mode));
    }
    println!("{:.6}", result.value);
    Ok(ExitCode::SUCCESS)
}

fn parse_bit_input(input: &str, bits: Option<usize>) -> Result<BitString, CliError> {
    if let Some(hex) = input
        .strip_prefix("0x")
        .or_else(|| input.strip_prefix("0X"))
    {
        let bit_len = bits.ok_or_else(|| {
            CliError::Usage("hex input needs --bits to fix the exact bit length".into())
        })?;
        let padded = if hex.len() % 2 == 1 {
            format!("{hex}0") // odd nibble count: pad on the right
        } else {
            hex.to_string()
        };
        let bytes = hex::decode(&padded).map_err(|e| CliError::Data(format!("bad hex: {e}")))?;
        Ok(BitString::from_bytes(&bytes, bit_len)?)
    } else {
        if bits.is_some() {
            return Err(CliError::Usage(
                "--bits only applies to 0x-prefixed hex input".into(),
            ));
        }
        Ok(BitString::from_text(input)?)
    }
}

fn print_trace(input: &BitString, result: &BiEntropyResult, label: &str) {
    let chain = derivative_chain(input, result.mode, input.len() - 1)
        .expect("input already measured, so n >= 2");
    println!("level  bits  p  H  weight  weighted");
    for level in &result.per_level {
        println!(
            "{}  {}  {:.2}  {:.2}  {:.6}  {:.6}",
            level.level,
            chain.levels[level.level],
            round2(level.ones_fraction),
            round2(level.shannon),
            level.weight,
            level.weighted,
        );
    }
    println!(
        "final  {}  (level {}, unweighted)",
        result.final_derivative,
        result.per_level.len()
    );
    println!("weight sum = {:.6}", result.weight_sum);
    println!("weighted entropy sum = {:.6}", result.weighted_sum);
    println!("normalizer = {:.6}", result.weight_sum);
    println!("{label} = {:.6}", result.value);
}

fn cmd_validate(knots: &Path, strict: bool) -> Result<ExitCode, CliError> {
    let ds = dataset::load_dataset(knots)?;
    println!("name,steps,closed,self_avoiding,displacement,meets_min_knot_length,notes");
    let mut failures = 0usize;
    for rec in ds.records() {
        let v = &rec.validation;
        let mut notes: Vec<String> = rec.warnings.clone();
        if let Some((i, j)) = v.first_vertex_collision {
            notes.push(format!("vertices {i} and {j} coincide"));
        }
        if let Some((i, j)) = v.repeated_edge {
            notes.push(format!("steps {i} and {j} traverse the same edge"));
        }
        if !v.closed || !v.self_avoiding {
            failures += 1;
        }
        println!(
            "{},{},{},{},({} {} {}),{},{}",
            rec.name,
            v.length,
            v.closed,
            v.self_avoiding,
            v.displacement[0],
            v.displacement[1],
            v.displacement[2],
            v.meets_min_knot_length,
            notes.join("; ")
        );
    }
    eprintln!(
        "validated {} records from {} ({failures} with defects)",
        ds.len(),
        ds.label()
    );
    if strict && failures > 0 {
        return Err(CliError::Data(format!(
            "{failures} record(s) fail closure or self-avoidance"
        )));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_gen_encodings(
    seed: u64,
    count: usize,
    width: u32,
    label: &str,
    output: &Path,
) -> Result<ExitCode, CliError> {
    let set = generate_encoding_set(label, seed, count, width)?;
    save_encoding_set(&set, output)?;
    eprintln!(
        "wrote {count} {width}-bit encodings to {} (label {label}, seed {seed}, generator {GENERATOR_ID})",
        output.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_gen_controls(
    input: &Path,
    seed: u64,
    label: &str,
    mode: ControlModeArg,
    output: &Path,
) -> Result<ExitCode, CliError> {
    let source = dataset::load_dataset(input)?;
    let control_mode = match mode {
        ControlModeArg::Iid => ControlMode::IidDistribution,
        ControlModeArg::Permute => ControlMode::PermuteEachRecord,
    };
    let controls = dataset::generate_controls(&source, seed, label, control_mode)?;
    let comments = vec![
        format!("seed: {seed}"),
        format!("generator: {GENERATOR_ID}"),
        format!(
            "mode: {}",
            match mode {
                ControlModeArg::Iid => "iid",
                ControlModeArg::Permute => "permute",
            }
        ),
        format!("source: {}", source.label()),
    ];
    dataset::save_dataset(&controls, output, &comments)?;
    eprintln!(
        "wrote {} control records to {} (label {label}, seed {seed})",
        controls.len(),
        output.display()
    );
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct FileDigest {
    path: String,
    sha256: String,
}

/// Sidecar record of how an output was produced: enough to re-run the
/// command and to check that inputs have not drifted. Timestamps live here
/// and only here, keeping the primary outputs byte-reproducible.
#[derive(Serialize)]
struct RunManifest {
    tool_version: String,
    command_line: Vec<String>,
    seeds: Vec<u64>,
    generator: String,
    inputs: Vec<FileDigest>,
    outputs: Vec<String>,
    unix_time_secs: u64,
}

fn digest_file(path: &Path) -> Result<FileDigest, CliError> {
    let bytes =
        std::fs::read(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(FileDigest {
        path: path.display().to_string(),
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}

fn write_manifest(path: &Path, manifest: &RunManifest) -> Result<(), CliError> {
    let mut buf = serde_json::to_vec_pretty(manifest).map_err(|e| CliError::Data(e.to_string()))?;
    buf.push(b'\n');
    std::fs::write(path, buf).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(())
}

fn cmd_experiment(
    knots: &Path,
    encodings: &[PathBuf],
    measure: &str,
    output: &Path,
    summary: Option<PathBuf>,
    manifest: Option<PathBuf>,
) -> Result<ExitCode, CliError> {
    let measure: Measure = measure
        .parse()
        .map_err(|e: bientropy::experiment::ExperimentError| CliError::Usage(e.to_string()))?;
    let ds = dataset::load_dataset(knots)?;

    let mut merged: Option<ResultTable> = None;
    let mut seeds = Vec::new();
    for path in encodings {
        let set = load_encoding_set(path)?;
        if let Some(seed) = set.seed() {
            seeds.push(seed);
        }
        let grid = run_grid(&ds, &set, measure)?;
        merged = Some(match merged {
            None => grid,
            Some(acc) => acc.merge(grid)?,
        });
    }
    let table = merged.expect("at least one encoding set is required");

    save_results_csv(&table, output)?;
    eprintln!(
        "wrote {} rows ({} items x {} encoding sets) to {}",
        table.rows().len(),
        ds.len(),
        encodings.len(),
        output.display()
    );

    if let Some(summary_path) = &summary {
        let summary_doc = build_summary(&table, env!("CARGO_PKG_VERSION"));
        let mut buf = Vec::new();
        write_summary_json(&summary_doc, &mut buf)?;
        std::fs::write(summary_path, buf)
            .map_err(|e| CliError::Data(format!("{}: {e}", summary_path.display())))?;
        eprintln!("wrote summary to {}", summary_path.display());
    }

    let manifest_path =
        manifest.unwrap_or_else(|| PathBuf::from(format!("{}.manifest.json", output.display())));
    let mut inputs = vec![digest_file(knots)?];
    for path in encodings {
        inputs.push(digest_file(path)?);
    }
    let mut outputs = vec![output.display().to_string()];
    if let Some(s) = &summary {
        outputs.push(s.display().to_string());
    }
    write_manifest(
        &manifest_path,
        &RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command_line: std::env::args().collect(),
            seeds,
            generator: GENERATOR_ID.to_string(),
            inputs,
            outputs,
            unix_time_secs: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        },
    )?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct ReportDocument {
    grouping: String,
    observations: String,
    results_files: Vec<FileDigest>,
    dataset_files: Vec<FileDigest>,
    report: GroupReport,
}

fn cmd_report(
    results: &[PathBuf],
    knots: &[PathBuf],
    grouping: GroupingArg,
    crossings: Option<u32>,
    control_labels: Vec<String>,
    observations: ObservationsArg,
    json: Option<PathBuf>,
) -> Result<ExitCode, CliError> {
    let mut merged: Option<ResultTable> = None;
    for path in results {
        let table = load_results_csv(path)?;
        merged = Some(match merged {
            None => table,
            Some(acc) => acc.merge(table)?,
        });
    }
    let mut table = merged.expect("at least one results file is required");

    let datasets: Vec<KnotDataset> = knots
        .iter()
        .map(dataset::load_dataset)
        .collect::<Result<_, dataset::DatasetError>>()?;
    let refs: Vec<&KnotDataset> = datasets.iter().collect();
    table.attach_metadata(&refs)?;

    let grouping = match grouping {
        GroupingArg::KnotsVsControls => {
            if control_labels.is_empty() {
                return Err(CliError::Usage(
                    "knots-vs-controls needs at least one --control-label".into(),
                ));
            }
            Grouping::KnotsVsControls {
                control_labels: BTreeSet::from_iter(control_labels),
            }
        }
        GroupingArg::AlternatingVsNon => Grouping::AlternatingVsNon { crossings },
        GroupingArg::ByCrossings => Grouping::ByCrossings,
        GroupingArg::ByLength => Grouping::ByLength,
    };
    let obs = match observations {
        ObservationsArg::ItemMeans => Observations::ItemMeans,
        ObservationsArg::Raw => Observations::Raw,
    };
    let report = group_compare(&table, &grouping, obs)?;

    let grouping_name = match &grouping {
        Grouping::KnotsVsControls { .. } => "knots-vs-controls",
        Grouping::AlternatingVsNon { .. } => "alternating-vs-non",
        Grouping::ByCrossings => "by-crossings",
        Grouping::ByLength => "by-length",
    };
    let observations_name = match obs {
        Observations::ItemMeans => "item-means",
        Observations::Raw => "raw",
    };
    println!("grouping: {grouping_name} (observations: {observations_name})");
    match &report {
        GroupReport::Test(s) => {
            println!("group,n,mean,sd");
            println!("{},{},{:.9},{:.9}", s.group_a, s.n_a, s.mean_a, s.sd_a);
            println!("{},{},{:.9},{:.9}", s.group_b, s.n_b, s.mean_b, s.sd_b);
            println!(
                "t = {:.6}, df = {:.3}, p (two-sided) = {:.6e}",
                s.t, s.df, s.p_two_sided
            );
        }
        GroupReport::Buckets { buckets } => {
            println!("bucket,n_items,n_obs,mean,sd");
            for b in buckets {
                println!(
                    "{},{},{},{:.9},{:.9}",
                    b.bucket, b.n_items, b.n_obs, b.mean, b.sd
                );
            }
        }
    }

    if let Some(json_path) = json {
        let doc = ReportDocument {
            grouping: grouping_name.to_string(),
            observations: observations_name.to_string(),
            results_files: results
                .iter()
                .map(|p| digest_file(p))
                .collect::<Result<_, _>>()?,
            dataset_files: knots
                .iter()
                .map(|p| digest_file(p))
                .collect::<Result<_, _>>()?,
            report,
        };
        let mut buf = serde_json::to_vec_pretty(&doc).map_err(|e| CliError::Data(e.to_string()))?;
        buf.push(b'\n');
        std::fs::write(&json_path, buf)
            .map_err(|e| CliError::Data(format!("{}: {e}", json_path.display())))?;
        eprintln!("wrote report to {}", json_path.display());
    }
    Ok(ExitCode::SUCCESS)
}
