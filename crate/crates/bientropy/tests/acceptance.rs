//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (run with `--nocapture` to see them all).

use std::collections::BTreeMap;
use std::panic::{catch_unwind, resume_unwind, UnwindSafe};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use bientropy::bitstring::DerivativeMode;
use bientropy::dataset::{KnotDataset, KnotRecord};
use bientropy::encoding::{encode_sequence, generate_encoding_set, EncodingTable};
use bientropy::entropy::{bien, bientropy, ktbien, ktbien_table, WeightScheme};
use bientropy::experiment::{
    aggregate, build_summary, run_grid, write_results_csv, write_summary_json, ItemAggregate,
    Measure,
};
use bientropy::lattice::{validate_polygon, Direction, DirectionSequence};
use bientropy::rng::SplitMix64;
use bientropy::stats::{self, welch_t_test};
use bientropy::BitString;

fn criterion(id: u32, desc: &str, body: impl FnOnce() + UnwindSafe) {
    let outcome = catch_unwind(body);
    match &outcome {
        Ok(()) => println!("criterion {id:02} PASS - {desc}"),
        Err(_) => println!("criterion {id:02} FAIL - {desc}"),
    }
    if let Err(cause) = outcome {
        resume_unwind(cause);
    }
}

fn bs(text: &str) -> BitString {
    text.parse().unwrap()
}

/// Round to two decimals, ties away from zero (spreadsheet convention).
fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

#[test]
fn criterion_01_worked_example_fidelity() {
    criterion(1, "worked-example fidelity for KTBiEn(10101110)", || {
        let start = Instant::now();
        let r = bientropy(
            &bs("10101110"),
            DerivativeMode::Cyclic,
            WeightScheme::Logarithmic,
        )
        .unwrap();
        assert!((r.value - 0.920913).abs() <= 5e-4, "value = {}", r.value);

        let expected_p = [0.63, 0.75, 0.25, 0.50, 0.25, 0.50, 0.50];
        assert_eq!(r.per_level.len(), expected_p.len());
        for (trace, expect) in r.per_level.iter().zip(expected_p) {
            assert_eq!(
                round2(trace.ones_fraction),
                expect,
                "level {}: p = {}",
                trace.level,
                trace.ones_fraction
            );
        }
        assert!(
            (r.weight_sum - 15.2992).abs() <= 5e-4,
            "weight sum = {}",
            r.weight_sum
        );
        assert!(
            (r.weighted_sum - 14.089).abs() <= 5e-3,
            "weighted sum = {}",
            r.weighted_sum
        );
        assert!(
            start.elapsed() < Duration::from_millis(100),
            "not instantaneous: {:?}",
            start.elapsed()
        );
    });
}

#[test]
fn criterion_02_four_bit_table() {
    criterion(
        2,
        "published 4-bit KTBiEn row (values and assignment)",
        || {
            let table = ktbien_table(4).unwrap();
            assert_eq!(table.len(), 16);
            let expected: BTreeMap<u64, f64> = [
                (0, 0.0),
                (15, 0.0),
                (5, 0.22),
                (10, 0.22),
                (3, 0.56),
                (6, 0.56),
                (9, 0.56),
                (12, 0.56),
            ]
            .into_iter()
            .collect();
            let mut multiset: BTreeMap<String, usize> = BTreeMap::new();
            for (n, (s, v)) in table.iter().enumerate() {
                assert_eq!(s, &BitString::from_value(n as u64, 4).unwrap());
                let want = expected.get(&(n as u64)).copied().unwrap_or(0.96);
                assert!((v - want).abs() <= 5e-3, "N={n}: KTBiEn = {v}, want {want}");
                *multiset.entry(format!("{:.2}", round2(*v))).or_default() += 1;
            }
            let counts: Vec<(String, usize)> = multiset.into_iter().collect();
            assert_eq!(
                counts,
                vec![
                    ("0.00".to_string(), 2),
                    ("0.22".to_string(), 2),
                    ("0.56".to_string(), 4),
                    ("0.96".to_string(), 8),
                ]
            );
        },
    );
}

#[test]
fn criterion_03_eight_bit_spot_checks() {
    criterion(3, "published 8-bit KTBiEn spot checks", || {
        for (text, want) in [
            ("00001111", 0.43),
            ("01010101", 0.07),
            ("00110011", 0.17),
            ("00000000", 0.00),
        ] {
            let v = ktbien(&bs(text)).unwrap();
            assert!((v - want).abs() <= 5e-3, "{text}: {v}, want {want}");
        }
    });
}

#[test]
fn criterion_04_boundary_values() {
    criterion(
        4,
        "exact 2-bit boundaries; strict bounds for 2 < n <= 12",
        || {
            assert_eq!(bien(&bs("00")).unwrap(), 0.0);
            assert_eq!(bien(&bs("11")).unwrap(), 0.0);
            assert_eq!(bien(&bs("01")).unwrap(), 1.0);
            assert_eq!(bien(&bs("10")).unwrap(), 1.0);

            let weighted = [
                WeightScheme::PowerOfTwo,
                WeightScheme::Logarithmic,
                WeightScheme::Linear,
            ];
            let modes = [DerivativeMode::Linear, DerivativeMode::Cyclic];
            for n in 3..=12usize {
                for value in 0..(1u64 << n) {
                    let s = BitString::from_value(value, n).unwrap();
                    let constant = s.is_all_zeros() || s.is_all_ones();
                    for mode in modes {
                        for scheme in weighted {
                            let v = bientropy(&s, mode, scheme).unwrap().value;
                            if constant {
                                assert_eq!(v, 0.0, "n={n} v={value:b} {mode:?} {scheme:?}");
                            } else {
                                assert!(
                                    v > 0.0 && v < 1.0,
                                    "n={n} v={value:b} {mode:?} {scheme:?} -> {v}"
                                );
                            }
                        }
                        // plain Shannon entropy attains 1.0 on balanced strings,
                        // so only the lower bound is strict there
                        let v = bientropy(&s, mode, WeightScheme::Zero).unwrap().value;
                        if constant {
                            assert_eq!(v, 0.0);
                        } else {
                            assert!(v > 0.0 && v <= 1.0);
                        }
                    }
                }
            }
        },
    );
}

#[test]
fn criterion_05_invariance_suite() {
    criterion(
        5,
        "rotation/complement/reversal invariance, exhaustive n <= 12",
        || {
            let knot_schemes = [WeightScheme::Logarithmic, WeightScheme::PowerOfTwo];
            for n in 2..=12usize {
                for value in 0..(1u64 << n) {
                    let s = BitString::from_value(value, n).unwrap();
                    for scheme in knot_schemes {
                        let base = bientropy(&s, DerivativeMode::Cyclic, scheme).unwrap().value;
                        for k in 0..n {
                            let rotated =
                                bientropy(&s.rotate_left(k), DerivativeMode::Cyclic, scheme)
                                    .unwrap()
                                    .value;
                            assert_eq!(base, rotated, "rotation n={n} v={value:b} k={k}");
                        }
                        let complemented =
                            bientropy(&s.complement(), DerivativeMode::Cyclic, scheme)
                                .unwrap()
                                .value;
                        assert_eq!(base, complemented, "complement n={n} v={value:b}");
                        let reversed = bientropy(&s.reverse(), DerivativeMode::Cyclic, scheme)
                            .unwrap()
                            .value;
                        assert_eq!(base, reversed, "reversal n={n} v={value:b}");

                        let linear = bientropy(&s, DerivativeMode::Linear, scheme).unwrap().value;
                        let linear_c = bientropy(&s.complement(), DerivativeMode::Linear, scheme)
                            .unwrap()
                            .value;
                        assert_eq!(linear, linear_c, "linear complement n={n} v={value:b}");
                    }
                }
            }
        },
    );
}

#[test]
fn criterion_06_encoding_fidelity() {
    criterion(
        6,
        "bit-exact worked encoding; 192/512-bit output lengths",
        || {
            let table = EncodingTable::new(8, [84, 41, 102, 101, 67, 222]).unwrap();
            let unknot = DirectionSequence::parse("DEUW").unwrap();
            assert_eq!(
                encode_sequence(&unknot, &table).to_string(),
                "11011110001010010100001101100110"
            );

            let seq24 = DirectionSequence::parse(&"DEUW".repeat(6)).unwrap();
            assert_eq!(encode_sequence(&seq24, &table).len(), 192);
            let seq64 = DirectionSequence::parse(&"DEUW".repeat(16)).unwrap();
            assert_eq!(encode_sequence(&seq64, &table).len(), 512);
        },
    );
}

#[test]
fn criterion_07_geometry() {
    criterion(
        7,
        "unknot closes; printed trefoil does not; NS repeats an edge",
        || {
            let unknot = validate_polygon(&DirectionSequence::parse("DEUW").unwrap());
            assert!(unknot.closed);
            assert!(unknot.self_avoiding);

            let trefoil =
                validate_polygon(&DirectionSequence::parse("DDDEEUUSWWNNEEDSSSUUNNW").unwrap());
            assert!(!trefoil.closed);
            assert_eq!(trefoil.displacement, [1, 0, 0]);
            assert_eq!(trefoil.length, 23);

            let ns = validate_polygon(&DirectionSequence::parse("NS").unwrap());
            assert!(!ns.self_avoiding);
            assert!(ns.repeated_edge.is_some());
        },
    );
}

// independent oracle: two-sided permutation test on |mean(a) - mean(b)|
fn permutation_p(a: &[f64], b: &[f64], iters: usize, seed: u64) -> f64 {
    let observed = (stats::mean(a) - stats::mean(b)).abs();
    let mut pool: Vec<f64> = a.iter().chain(b).copied().collect();
    let mut rng = SplitMix64::new(seed);
    let mut exceed = 0usize;
    for _ in 0..iters {
        rng.shuffle(&mut pool);
        let (pa, pb) = pool.split_at(a.len());
        if (stats::mean(pa) - stats::mean(pb)).abs() >= observed {
            exceed += 1;
        }
    }
    exceed as f64 / iters as f64
}

// independent oracle: direct textbook evaluation of the Pearson formula
fn pearson_oracle(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let dx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let dy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    num / (dx * dy).sqrt()
}

fn noisy_samples(seed: u64, n: usize, center: f64) -> Vec<f64> {
    // uniform noise of sd ~0.002 around the center
    let mut rng = SplitMix64::new(seed);
    (0..n)
        .map(|_| center + (rng.next_f64() - 0.5) * 0.0069)
        .collect()
}

#[test]
fn criterion_08_statistics_oracles() {
    criterion(
        8,
        "Welch p vs permutation oracle; Pearson vs direct formula",
        || {
            // fixtures spanning p ~ 0.5, ~0.01, ~0.001 (100 points per group)
            let fixtures = [
                (0.980, 0.980684367, 0xF1A, 0xF1B, 0.3, 0.7),
                (0.980, 0.980728776, 0xF2A, 0xF2B, 0.005, 0.02),
                (0.980, 0.980633491, 0xF3A, 0xF3B, 0.0005, 0.002),
            ];
            for (ca, cb, seed_a, seed_b, lo, hi) in fixtures {
                let a = noisy_samples(seed_a, 100, ca);
                let b = noisy_samples(seed_b, 100, cb);
                let welch = welch_t_test("a", &a, "b", &b).unwrap();
                assert!(
                    welch.p_two_sided > lo && welch.p_two_sided < hi,
                    "fixture ({ca}, {cb}): p = {} outside [{lo}, {hi}]",
                    welch.p_two_sided
                );
                let perm = permutation_p(&a, &b, 20_000, seed_a ^ seed_b);
                assert!(
                    (welch.p_two_sided - perm).abs() <= 0.01,
                    "fixture ({ca}, {cb}): welch {} vs permutation {perm}",
                    welch.p_two_sided
                );
            }

            // Pearson against the direct-formula oracle
            let xs = [1.0, 2.0, 3.0];
            let ys = [2.0, 4.0, 7.0];
            let got = stats::pearson(&xs, &ys).unwrap();
            assert!((got - pearson_oracle(&xs, &ys)).abs() <= 1e-9);
            assert!((got - 0.9933992677987828).abs() <= 1e-9);

            let mut rng = SplitMix64::new(0x9E9E);
            let rx: Vec<f64> = (0..50).map(|_| rng.next_f64()).collect();
            let ry: Vec<f64> = rx.iter().map(|x| 0.3 * x + 0.1 * rng.next_f64()).collect();
            let got = stats::pearson(&rx, &ry).unwrap();
            assert!((got - pearson_oracle(&rx, &ry)).abs() <= 1e-9);
        },
    );
}

const DATASET_SEED: u64 = 0x5EED_DA7A;
const ENC_A_SEED: u64 = 0xACE_0001;
const ENC_B_SEED: u64 = 0xACE_0002;

/// 60 random closed-ish sequences, lengths 24..=64: balanced direction
/// pairs shuffled, plus one free letter when the length is odd.
fn synthetic_controls() -> KnotDataset {
    let mut rng = SplitMix64::new(DATASET_SEED);
    let mut records = Vec::with_capacity(60);
    for i in 0..60 {
        let len = 24 + rng.next_below(41) as usize;
        let mut letters: Vec<Direction> = Vec::with_capacity(len);
        for _ in 0..len / 2 {
            let d = Direction::ALL[rng.next_below(6) as usize];
            letters.push(d);
            letters.push(d.opposite());
        }
        if len % 2 == 1 {
            letters.push(Direction::ALL[rng.next_below(6) as usize]);
        }
        rng.shuffle(&mut letters);
        let seq = DirectionSequence::from_directions(letters).unwrap();
        records.push(KnotRecord::new(format!("ctrl_{i:02}"), None, None, seq));
    }
    KnotDataset::from_records("SYNTH_CONTROLS", records).unwrap()
}

struct PipelineOutput {
    csv: Vec<u8>,
    json: Vec<u8>,
    means_a: Vec<f64>,
    means_b: Vec<f64>,
    pooled: Vec<ItemAggregate>,
    elapsed: Duration,
}

fn run_pipeline() -> PipelineOutput {
    let start = Instant::now();
    let dataset = synthetic_controls();
    let enc_a = generate_encoding_set("ACC_A", ENC_A_SEED, 256, 8).unwrap();
    let enc_b = generate_encoding_set("ACC_B", ENC_B_SEED, 256, 8).unwrap();
    let grid_a = run_grid(&dataset, &enc_a, Measure::Ktbien).unwrap();
    let grid_b = run_grid(&dataset, &enc_b, Measure::Ktbien).unwrap();
    let means_a: Vec<f64> = aggregate(&grid_a).iter().map(|a| a.mean).collect();
    let means_b: Vec<f64> = aggregate(&grid_b).iter().map(|a| a.mean).collect();
    let merged = grid_a.merge(grid_b).unwrap();
    let pooled = aggregate(&merged);

    let mut csv = Vec::new();
    write_results_csv(&merged, &mut csv).unwrap();
    let mut json = Vec::new();
    let summary = build_summary(&merged, bientropy::VERSION);
    write_summary_json(&summary, &mut json).unwrap();

    PipelineOutput {
        csv,
        json,
        means_a,
        means_b,
        pooled,
        elapsed: start.elapsed(),
    }
}

fn pipeline() -> &'static PipelineOutput {
    static PIPELINE: OnceLock<PipelineOutput> = OnceLock::new();
    PIPELINE.get_or_init(run_pipeline)
}

#[test]
fn criterion_09_cross_encoding_stability() {
    criterion(
        9,
        "per-item means correlate across independent encoding sets",
        || {
            let out = pipeline();
            assert_eq!(out.means_a.len(), 60);
            assert_eq!(out.means_b.len(), 60);
            let r = stats::pearson(&out.means_a, &out.means_b).unwrap();
            assert!(r >= 0.9, "pearson r = {r}");
            assert!(
                out.elapsed < Duration::from_secs(60),
                "pipeline took {:?}",
                out.elapsed
            );
            assert_eq!(
                out.csv.iter().filter(|&&b| b == b'\n').count(),
                60 * 512 + 1
            );
        },
    );
}

#[test]
fn criterion_10_disorder_level() {
    criterion(10, "encoded sequences are highly disordered", || {
        let out = pipeline();
        for item in &out.pooled {
            assert!(
                item.mean > 0.95,
                "{}: mean KTBiEn = {}",
                item.item,
                item.mean
            );
        }
        let grand = stats::mean(&out.pooled.iter().map(|a| a.mean).collect::<Vec<_>>());
        assert!(grand > 0.97, "grand mean = {grand}");
    });
}

#[test]
fn criterion_11_determinism() {
    criterion(
        11,
        "re-running the pipeline reproduces outputs byte for byte",
        || {
            let first = pipeline();
            let second = run_pipeline();
            assert_eq!(first.csv, second.csv, "results CSV differs between runs");
            assert_eq!(first.json, second.json, "summary JSON differs between runs");
        },
    );
}
