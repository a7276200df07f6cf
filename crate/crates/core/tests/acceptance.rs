//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Runs without the libtest harness so the lines always print.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use adl_sense::audio::{idct2_orthonormal, mfcc, AudioVariant, MfccConfig, MfccExtractor};
use adl_sense::data::{
    build_dataset, default_environments, stratified_split, synth_corpus, EnvSource, FeatureConfig, LabeledDataset,
    SynthPreset, SynthSpec, Variant,
};
use adl_sense::motion::{detect_peaks, peak_stats, top5_peak_distances, MotionVariant};
use adl_sense::nn::{fit_model, fit_normalizer, NetworkConfig, NormalizationKind, OutputActivation, Preset};
use adl_sense::pipeline::{route_method, train_pipeline, MethodId, PipelineConfig};
use adl_sense::sensors::SensorSet;
use adl_sense::signal::{fft, raw_stats, SampleSeries};
use adl_sense::Error;
use common::{
    brute_peaks, column_stats, direct_stats, gap_sort, mfcc_oracle, naive_dft, random_vec, rng, worst_gradient_error,
    MfccParams,
};
use rand::seq::IndexedRandom;
use rand::Rng;

const SEED: u64 = 42;
const WINDOWS_PER_LABEL: usize = 200;
const TEST_FRACTION: f64 = 0.3;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

struct Suite {
    failures: usize,
}

impl Suite {
    /// Runs one criterion; exceeding `limit` fails it as well.
    fn run(&mut self, id: u32, name: &str, limit: Duration, f: impl FnOnce() -> Verdict) {
        let start = Instant::now();
        let v = f();
        let elapsed = start.elapsed();
        let in_time = elapsed < limit;
        let pass = v.pass && in_time;
        if !pass {
            self.failures += 1;
        }
        let timing = if in_time {
            format!("{:.1} s", elapsed.as_secs_f64())
        } else {
            format!("{:.1} s, over the {} s limit", elapsed.as_secs_f64(), limit.as_secs())
        };
        println!(
            "[{}] criterion {id:>2} {name}: {} ({timing})",
            if pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn gradient_correctness() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut nets = 0;
    for seed in 0..100 {
        for sizes in [&[5, 8, 3][..], &[10, 6, 6, 4][..]] {
            for l2 in [0.0, 1e-2] {
                worst = worst.max(worst_gradient_error(sizes, seed, l2, OutputActivation::Softmax));
                nets += 1;
            }
        }
    }
    verdict(
        worst <= 1e-4,
        format!("{nets} nets, worst relative error {worst:.2e} (limit 1e-4)"),
    )
}

fn dft_oracle() -> Verdict {
    let mut r = rng(SEED);
    let (mut worst_bin, mut worst_parseval): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let x = random_vec(&mut r, 256, 1.0);
        let spec = fft(&SampleSeries::new(x.clone(), 1.0).unwrap(), 256).unwrap();
        for (got, (re, im)) in spec.bins().iter().zip(naive_dft(&x, 256)) {
            let diff = ((got.re - re).powi(2) + (got.im - im).powi(2)).sqrt();
            worst_bin = worst_bin.max(diff / (re * re + im * im).sqrt());
        }
        let time: f64 = x.iter().map(|v| v * v).sum();
        let freq: f64 = spec.bins().iter().map(|b| b.norm_sqr()).sum::<f64>() / 256.0;
        worst_parseval = worst_parseval.max((time - freq).abs() / time);
    }
    verdict(
        worst_bin <= 1e-9 && worst_parseval <= 1e-9,
        format!("worst bin error {worst_bin:.2e}, worst Parseval error {worst_parseval:.2e} (limit 1e-9)"),
    )
}

fn mfcc_structure() -> Verdict {
    let cfg = MfccConfig::default();
    let silent = mfcc(&SampleSeries::new(vec![0.0; 40_000], 8000.0).unwrap(), &cfg).unwrap();
    let dc_only = silent[1..].iter().all(|&c| c == 0.0);

    let ex = MfccExtractor::<f64>::new(&cfg).unwrap();
    let mut r = rng(SEED);
    let noise = SampleSeries::new(random_vec(&mut r, 4000, 0.5), 8000.0).unwrap();
    let frames = adl_sense::audio::frame_signal(&noise, &cfg).unwrap();
    let coeffs = ex.frame_coefficients(&noise).unwrap();
    let mut round_trip: f64 = 0.0;
    for (frame, c) in frames.iter().zip(&coeffs) {
        for (a, b) in idct2_orthonormal(c).iter().zip(ex.log_mel_energies(frame)) {
            round_trip = round_trip.max((a - b).abs());
        }
    }

    let tone: Vec<f64> = (0..40_000)
        .map(|i| 0.5 * (2.0 * std::f64::consts::PI * 1000.0 * i as f64 / 8000.0).sin())
        .collect();
    let got = mfcc(&SampleSeries::new(tone.clone(), 8000.0).unwrap(), &cfg).unwrap();
    let want = mfcc_oracle(&tone, &MfccParams::default());
    let tone_err = got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    verdict(
        dc_only && round_trip <= 1e-9 && tone_err <= 1e-6,
        format!(
            "silent c1..c25 all zero: {dc_only}; DCT round trip {round_trip:.2e} (limit 1e-9); \
             1 kHz tone vs reference {tone_err:.2e} (limit 1e-6)"
        ),
    )
}

fn feature_oracles() -> Verdict {
    let mut r = rng(SEED);
    let mut mismatches = 0;
    let mut stats_err: f64 = 0.0;
    for i in 0..1000 {
        let n = r.random_range(2..700);
        let x: Vec<f64> = if i % 3 == 0 {
            (0..n).map(|_| r.random_range(0..5) as f64).collect()
        } else {
            random_vec(&mut r, n, 20.0)
        };
        let s = SampleSeries::new(x.clone(), 100.0).unwrap();
        let p = detect_peaks(&s);
        let (idx, amps) = brute_peaks(&x);
        if p.indices != idx || p.amplitudes != amps || top5_peak_distances(&p) != gap_sort(&idx) {
            mismatches += 1;
        }
        let ps = peak_stats(&p);
        if !amps.is_empty() {
            let [m, sd, v, med, _, _] = direct_stats(&amps);
            for (g, w) in ps.iter().zip([m, sd, v, med]) {
                stats_err = stats_err.max((g - w).abs());
            }
        } else if ps != [0.0; 4] {
            mismatches += 1;
        }
        let rs = raw_stats(&s).unwrap();
        let [m, sd, v, med, mx, mn] = direct_stats(&x);
        for (g, w) in [(rs.mean, m), (rs.std_dev, sd), (rs.variance, v), (rs.median, med)] {
            stats_err = stats_err.max((g - w).abs());
        }
        if rs.maximum != mx || rs.minimum != mn {
            mismatches += 1;
        }
    }
    verdict(
        mismatches == 0 && stats_err <= 1e-12,
        format!("1000 series, {mismatches} exact mismatches, worst statistic error {stats_err:.2e} (limit 1e-12)"),
    )
}

/// Artifacts of the training criteria, compared across repeated runs.
#[derive(PartialEq)]
struct TrainingRun {
    env: (String, f64),
    standing: Vec<(String, f64)>,
    adl: (String, f64),
}

fn env_labels() -> Vec<String> {
    default_environments().into_iter().map(|e| e.label).collect()
}

fn split(ds: &LabeledDataset<f64>) -> (LabeledDataset<f64>, LabeledDataset<f64>) {
    stratified_split(ds, TEST_FRACTION, SEED).unwrap()
}

fn train_env() -> (String, f64) {
    let corpus = synth_corpus::<f64>(&SynthSpec::preset(SynthPreset::Environments, WINDOWS_PER_LABEL, SEED)).unwrap();
    let ds = build_dataset(
        &corpus,
        &Variant::Audio(AudioVariant::A1),
        None,
        &FeatureConfig::default(),
    )
    .unwrap();
    let (train, test) = split(&ds);
    let cfg = NetworkConfig::for_preset(Preset::Feedforward)
        .with_normalization(NormalizationKind::None)
        .with_budget(2_000_000)
        .with_seed(SEED);
    let (model, _) = fit_model(&cfg, &train).unwrap();
    let acc = model.evaluate(&test).unwrap().accuracy;
    (model.to_json().unwrap(), acc)
}

fn train_standing(sensors: SensorSet) -> (String, f64) {
    let corpus = synth_corpus::<f64>(&SynthSpec::preset(SynthPreset::Standing, WINDOWS_PER_LABEL, SEED)).unwrap();
    let labels = env_labels();
    let variant = Variant::motion(MotionVariant::F1, sensors, true);
    let ds = build_dataset(
        &corpus,
        &variant,
        Some(EnvSource::Oracle(&labels)),
        &FeatureConfig::default(),
    )
    .unwrap();
    let (train, test) = split(&ds);
    let cfg = NetworkConfig::for_preset(Preset::Deep)
        .with_budget(1_000_000)
        .with_seed(SEED);
    let (model, _) = fit_model(&cfg, &train).unwrap();
    let acc = model.evaluate(&test).unwrap().accuracy;
    (model.to_json().unwrap(), acc)
}

fn train_adl() -> (String, f64) {
    let corpus = synth_corpus::<f64>(&SynthSpec::preset(SynthPreset::Adl, WINDOWS_PER_LABEL, SEED)).unwrap();
    let variant = Variant::motion(MotionVariant::F1, SensorSet::ACC, false);
    let ds = build_dataset(&corpus, &variant, None, &FeatureConfig::default()).unwrap();
    let (train, test) = split(&ds);
    let cfg = NetworkConfig::for_preset(Preset::Deep)
        .with_budget(1_000_000)
        .with_seed(SEED);
    let (model, _) = fit_model(&cfg, &train).unwrap();
    let acc = model.evaluate(&test).unwrap().accuracy;
    (model.to_json().unwrap(), acc)
}

const STANDING_SETS: [SensorSet; 3] = [SensorSet::ACC, SensorSet::ACC_MAG, SensorSet::ACC_MAG_GYRO];

fn normalizer_invariants() -> Verdict {
    let corpus = synth_corpus::<f64>(&SynthSpec::preset(SynthPreset::Adl, 40, SEED)).unwrap();
    let variant = Variant::motion(MotionVariant::F1, SensorSet::ACC_MAG_GYRO, false);
    let mut rows = build_dataset(&corpus, &variant, None, &FeatureConfig::default())
        .unwrap()
        .rows;
    let mut r = rng(SEED);
    for row in &mut rows {
        row.push(7.25);
        row.push(r.random_range(-1e4..1e4));
    }
    let width = rows[0].len();
    let mm = fit_normalizer(NormalizationKind::MinMax, &rows).unwrap();
    let mm_rows = mm.apply_rows(&rows).unwrap();
    let zs = fit_normalizer(NormalizationKind::ZScore, &rows).unwrap();
    let zs_rows = zs.apply_rows(&rows).unwrap();
    let mut bad = Vec::new();
    let (mut worst_mean, mut worst_std): (f64, f64) = (0.0, 0.0);
    let mut constant = 0;
    for j in 0..width {
        let col: Vec<f64> = mm_rows.iter().map(|row| row[j]).collect();
        let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let is_constant = rows.iter().all(|row| row[j] == rows[0][j]);
        if is_constant {
            constant += 1;
            if col.iter().any(|&v| v != 0.0) || zs_rows.iter().any(|row| row[j] != 0.0) {
                bad.push(j);
            }
            continue;
        }
        if lo != 0.0 || hi != 1.0 {
            bad.push(j);
        }
        let (mean, std) = column_stats(&zs_rows, j);
        worst_mean = worst_mean.max(mean.abs());
        worst_std = worst_std.max((std - 1.0).abs());
    }
    verdict(
        bad.is_empty() && worst_mean <= 1e-9 && worst_std <= 1e-9,
        format!(
            "{width} columns ({constant} constant), min-max violations {bad:?}, \
             z-score worst |mean| {worst_mean:.2e}, worst |std - 1| {worst_std:.2e} (limit 1e-9)"
        ),
    )
}

/// Method with the most sensors whose needs are met, computed from the
/// method table rather than the routing rule.
fn maximal_method(available: SensorSet) -> Option<MethodId> {
    MethodId::ALL
        .into_iter()
        .filter(|m| available.is_superset_of(m.sensors()))
        .max_by_key(|m| m.sensors().len())
}

fn gating_and_routing() -> Verdict {
    let spec = |p| SynthSpec::preset(p, WINDOWS_PER_LABEL, SEED);
    let env = synth_corpus::<f64>(&spec(SynthPreset::Environments)).unwrap();
    let adl = synth_corpus::<f64>(&spec(SynthPreset::Adl)).unwrap();
    let standing = synth_corpus::<f64>(&spec(SynthPreset::Standing)).unwrap();
    let pipeline = match train_pipeline(&env, &adl, &standing, &PipelineConfig::new(SEED)) {
        Ok(p) => p,
        Err(e) => return verdict(false, format!("pipeline training failed: {e}")),
    };

    // 1000 windows across all seven activities, each seen through a random
    // subset of its sensors.
    let mixed = SynthSpec::preset(SynthPreset::Mixed, 1000usize.div_ceil(7), SEED + 1);
    let mut stream = synth_corpus::<f64>(&mixed).unwrap();
    stream.truncate(1000);
    let subsets: Vec<SensorSet> = SensorSet::all_subsets().collect();
    let mut r = rng(SEED);
    let (mut refined, mut violations, mut unsupported, mut other_errors) = (0, 0, 0, 0);
    for b in &stream {
        let channels = b.channels.restricted_to(*subsets.choose(&mut r).unwrap());
        match pipeline.classify(&channels) {
            Ok(res) => {
                let is_refined =
                    matches!(res.adl.as_deref(), Some("sleeping" | "watching TV")) && res.scores.standing.is_some();
                if res.scores.standing.is_some() || matches!(res.adl.as_deref(), Some("sleeping" | "watching TV")) {
                    if res.stage1_adl.as_deref() == Some("standing") && is_refined {
                        refined += 1;
                    } else {
                        violations += 1;
                    }
                }
            }
            Err(Error::UnsupportedConfiguration(_)) => unsupported += 1,
            Err(_) => other_errors += 1,
        }
    }

    let mut routing_errors = Vec::new();
    let mut rejected = Vec::new();
    for s in SensorSet::all_subsets() {
        match (route_method(s), maximal_method(s)) {
            (Ok(m), Some(want)) if m == want => {}
            (Err(Error::UnsupportedConfiguration(_)), None) => rejected.push(s.to_string()),
            (got, want) => routing_errors.push(format!("{s}: {got:?} vs {want:?}")),
        }
    }
    let rejected_ok = rejected.iter().all(|s| !s.contains("ACC") && !s.contains("MIC"));
    verdict(
        violations == 0 && other_errors == 0 && routing_errors.is_empty() && rejected_ok && refined > 0,
        format!(
            "1000 windows: {refined} standing refinements, {violations} gating violations, \
             {unsupported} windows without ACC or MIC rejected, {other_errors} other errors; \
             routing mismatches {routing_errors:?}; unsupported subsets [{}]",
            rejected.join(", ")
        ),
    )
}

fn main() -> ExitCode {
    let mut suite = Suite { failures: 0 };
    suite.run(1, "gradient correctness", secs(60), gradient_correctness);
    suite.run(2, "DFT oracle and Parseval", secs(30), dft_oracle);
    suite.run(3, "MFCC structure", secs(60), mfcc_structure);
    suite.run(4, "feature oracles", secs(60), feature_oracles);

    let mut first: Option<TrainingRun> = None;
    let mut env = (String::new(), 0.0);
    suite.run(
        5,
        "environment stage, feedforward A1 unnormalized 2M",
        secs(600),
        || {
            env = train_env();
            verdict(
                env.1 >= 0.85,
                format!("test accuracy {:.2}% (need >= 85.00%)", env.1 * 100.0),
            )
        },
    );
    let mut standing = Vec::new();
    for (i, sensors) in STANDING_SETS.into_iter().enumerate() {
        let name = format!("standing stage {} of 3, deep F1 z-score {sensors}+env 1M", i + 1);
        suite.run(6, &name, secs(300), || {
            let run = train_standing(sensors);
            let v = verdict(
                run.1 == 1.0,
                format!("test accuracy {:.2}% (need 100.00%)", run.1 * 100.0),
            );
            standing.push(run);
            v
        });
    }
    let mut adl = (String::new(), 0.0);
    suite.run(7, "activity stage, deep F1 z-score ACC 1M", secs(600), || {
        adl = train_adl();
        verdict(
            adl.1 >= 0.85,
            format!("test accuracy {:.2}% (need >= 85.00%)", adl.1 * 100.0),
        )
    });
    first.replace(TrainingRun { env, standing, adl });

    suite.run(8, "normalizer invariants", secs(60), normalizer_invariants);
    suite.run(9, "pipeline gating and routing", secs(900), gating_and_routing);
    suite.run(10, "determinism of criteria 5 to 7", secs(1500), || {
        let again = TrainingRun {
            env: train_env(),
            standing: STANDING_SETS.into_iter().map(train_standing).collect(),
            adl: train_adl(),
        };
        let first = first.as_ref().unwrap();
        let same_env = again.env == first.env;
        let same_standing = again.standing == first.standing;
        let same_adl = again.adl == first.adl;
        verdict(
            again == *first,
            format!(
                "model files and accuracies identical: environment {same_env}, standing {same_standing}, activity {same_adl}"
            ),
        )
    });

    let total = 13;
    println!("acceptance: {} of {total} checks passed", total - suite.failures);
    if suite.failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
