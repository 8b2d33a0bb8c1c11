//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run a subset with `cargo test --test acceptance -- 1 4 7`.

mod common;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use tstransfer::analysis::{
    mean_average_rank, nemenyi_cd, seasonality_dataset, significantly_different, transfer_savings, win_loss,
    EvalTable,
};
use tstransfer::io::{
    decode_checkpoint, encode_checkpoint, load_checkpoint, quantize, read_dataset, save_checkpoint, write_dataset,
    ClassMap,
    LabeledDataset, Record, FLAG_SYNTHETIC,
};
use tstransfer::labeler::label_vector;
use tstransfer::pipeline::{
    corpus_records, family_task, finetune, init_seed, pretrain, reduce_training_set, train_scratch,
    TrainConfig, DESK_FINETUNE_EPOCHS,
};
use tstransfer::synthgen::{generate_record, GenConfig};
use tstransfer::tensornet::{build_model, AdamState, ArchConfig};
use tstransfer::{Error, FormatError};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within(elapsed: Duration, limit: Duration) -> bool {
    elapsed <= limit
}

fn label_oracle() -> Outcome {
    let start = Instant::now();
    let config = GenConfig { count: 1000, global_seed: 2024, ..GenConfig::default() };
    let mut worst = 0.0f64;
    for i in 0..config.count {
        let series = generate_record(&config, i).unwrap().series.values;
        let fast = label_vector(&series).unwrap();
        let slow = common::oracle::brute_labels(&series);
        assert_eq!(slow.len(), fast.as_slice().len());
        for (a, b) in fast.as_slice().iter().zip(&slow) {
            worst = worst.max((a - b).abs());
        }
    }
    let t = start.elapsed();
    outcome(
        worst <= 1e-6 && within(t, Duration::from_secs(10)),
        format!("max |diff| {worst:.2e} over 1000 series in {t:.2?}"),
    )
}

fn gradients() -> Outcome {
    let start = Instant::now();
    let (mut worst, mut checked, mut kinks) = (0.0f64, 0, 0);
    for seed in 0..20 {
        let r = common::gradcheck::check_case(seed);
        worst = worst.max(r.max_relative_error);
        checked += r.checked;
        kinks += r.kinks;
    }
    let t = start.elapsed();
    outcome(
        worst < 1e-4 && within(t, Duration::from_secs(120)),
        format!("max relative error {worst:.2e} over {checked} coordinates ({kinks} at ReLU kinks skipped) in {t:.2?}"),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for workers in ["1", "8"] {
        common::cli_ok(
            &["generate", "--count", "10000", "--seed", "7", "--out", &format!("w{workers}.tsfg"), "--workers", workers],
            d,
        );
    }
    let same_data = std::fs::read(d.join("w1.tsfg")).unwrap() == std::fs::read(d.join("w8.tsfg")).unwrap();

    common::cli_ok(&["generate", "--count", "1000", "--seed", "3", "--out", "small.tsfg"], d);
    for run in ["a", "b"] {
        common::cli_ok(
            &[
                "pretrain", "--data", "small.tsfg", "--epochs", "5", "--seed", "11", "--out",
                &format!("{run}.ckpt"), "--history", &format!("{run}.csv"), "--quiet",
            ],
            d,
        );
    }
    let same_ckpt = std::fs::read(d.join("a.ckpt")).unwrap() == std::fs::read(d.join("b.ckpt")).unwrap();
    let same_hist = std::fs::read(d.join("a.csv")).unwrap() == std::fs::read(d.join("b.csv")).unwrap();
    outcome(
        same_data && same_ckpt && same_hist,
        format!("1 vs 8 workers identical: {same_data}; repeated pretrain identical: {}", same_ckpt && same_hist),
    )
}

fn reduction_example() -> Outcome {
    let data = LabeledDataset {
        series: (0..100).map(|i| vec![i as f64; 8]).collect(),
        classes: (0..100).map(|i| usize::from(i >= 70)).collect(),
        class_map: ClassMap { labels: vec!["1".into(), "2".into()] },
    };
    let mut all_ok = true;
    let mut seen = Vec::new();
    for seed in 0..10 {
        let r = reduce_training_set(&data, 0.1, seed).unwrap();
        let ones = r.classes.iter().filter(|&&c| c == 0).count();
        let twos = r.classes.iter().filter(|&&c| c == 1).count();
        all_ok &= (ones, twos) == (7, 3);
        seen.push((ones, twos));
    }
    outcome(all_ok, format!("per-class counts over 10 seeds: {:?}", seen[0]))
}

const PRETRAIN_SERIES: u64 = 50_000;
const TARGET_TRAIN_PER_CLASS: usize = 300;
const TARGET_TEST_PER_CLASS: usize = 500;
const TARGET_MAX_SEGMENTS: usize = 2;
const TRANSFER_SEEDS: u64 = 5;

fn positive_transfer() -> Outcome {
    let start = Instant::now();
    let corpus = GenConfig {
        count: PRETRAIN_SERIES,
        global_seed: 1,
        length_buckets: vec![60],
        ..GenConfig::default()
    };
    let records = corpus_records(&corpus, 1).unwrap();
    let model = build_model(&ArchConfig::pretext(), init_seed(0)).unwrap();
    let pre = pretrain(model, &records, &TrainConfig::pretrain(0)).unwrap();
    drop(records);
    let pretrain_time = start.elapsed();

    // go through a checkpoint file as the command line does
    let dir = tempfile::tempdir().unwrap();
    let ckpt_path = dir.path().join("core.tsfw");
    save_checkpoint(&ckpt_path, &pre.model, Some(&pre.adam)).unwrap();
    let (ckpt, _) = load_checkpoint(&ckpt_path).unwrap();

    // held-out streams: different global seeds from the pretraining corpus. With at most
    // two segments per series the dominant family covers at least half of every series.
    let task = |seed, per_class| {
        let config = GenConfig {
            count: 100_000,
            global_seed: seed,
            length_buckets: vec![60],
            max_segments: TARGET_MAX_SEGMENTS,
            ..GenConfig::default()
        };
        family_task(&config, per_class).unwrap()
    };
    let train = task(1001, TARGET_TRAIN_PER_CLASS);
    let test = task(2002, TARGET_TEST_PER_CLASS);

    let mut faster = 0;
    let (mut ft_final, mut sc_final) = (0.0, 0.0);
    let mut per_seed = Vec::new();
    for seed in 0..TRANSFER_SEEDS {
        let small = reduce_training_set(&train, 0.1, seed).unwrap();
        let config = TrainConfig::finetune(seed).with_epochs(DESK_FINETUNE_EPOCHS);
        let ft = finetune(&ckpt, &small, &test, &config).unwrap();
        let sc = train_scratch(&ArchConfig::pretext(), &small, &test, &config).unwrap();
        let s = transfer_savings(&sc.history.accuracies(), &ft.history.accuracies()).unwrap();
        // reaching the scratch best within half of the scratch epochs means savings of at least 50%
        if s.savings_fraction.is_some_and(|f| f >= 0.5) {
            faster += 1;
        }
        let f = ft.history.last().unwrap().test_accuracy.unwrap();
        let c = sc.history.last().unwrap().test_accuracy.unwrap();
        ft_final += f;
        sc_final += c;
        per_seed.push(format!(
            "seed {seed}: scratch best {:.3}@{} fine-tuned match {:?}, final {f:.3} vs {c:.3}",
            s.best_scratch_acc, s.epoch_scratch_best, s.epoch_pretrained_match
        ));
    }
    let n = TRANSFER_SEEDS as f64;
    let (ft_mean, sc_mean) = (ft_final / n, sc_final / n);
    let t = start.elapsed();
    for line in &per_seed {
        println!("    {line}");
    }
    outcome(
        faster >= 4 && ft_mean >= sc_mean && within(t, Duration::from_secs(4 * 3600)),
        format!(
            "faster in {faster}/{TRANSFER_SEEDS} seeds; mean final accuracy {ft_mean:.3} fine-tuned vs {sc_mean:.3} scratch; \
             pretraining stopped after {} epochs (best {}) in {pretrain_time:.0?}, total {t:.0?}",
            pre.history.len(),
            pre.best_epoch
        ),
    )
}

fn seasonality() -> Outcome {
    let start = Instant::now();
    let len = 200;
    let (mut sines_ok, mut noise_ok) = (0, 0);
    let (mut min_sine, mut max_noise) = (f64::INFINITY, 0.0f64);
    for trial in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(trial);
        let sines: Vec<Vec<f64>> = (0..100)
            .map(|_| {
                let period = rng.random_range(len as f64 / 10.0..=len as f64 / 3.0);
                let phase = rng.random_range(0.0..2.0 * PI);
                (0..len).map(|t| (2.0 * PI * t as f64 / period + phase).sin()).collect()
            })
            .collect();
        let noise: Vec<Vec<f64>> = (0..100)
            .map(|_| (0..len).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect();
        let s = seasonality_dataset(&sines).unwrap();
        let n = seasonality_dataset(&noise).unwrap();
        sines_ok += usize::from(s.is_seasonal);
        noise_ok += usize::from(!n.is_seasonal);
        min_sine = min_sine.min(s.sm);
        max_noise = max_noise.max(n.sm);
    }
    let t = start.elapsed();
    outcome(
        sines_ok == 100 && noise_ok == 100 && within(t, Duration::from_secs(60)),
        format!(
            "sinusoids seasonal {sines_ok}/100 (min SM {min_sine:.3}), noise non-seasonal {noise_ok}/100 (max SM {max_noise:.3}) in {t:.2?}"
        ),
    )
}

fn statistics() -> Outcome {
    let table = EvalTable::new(
        vec!["A".into(), "B".into(), "C".into()],
        (1..=4).map(|d| format!("d{d}")).collect(),
        vec![
            vec![0.9, 0.8, 0.7],
            vec![0.8, 0.8, 0.6],
            vec![0.5, 0.7, 0.7],
            vec![0.6, 0.6, 0.6],
        ],
    )
    .unwrap();
    // ranks per row: (1,2,3), (1.5,1.5,3), (3,1.5,1.5), (2,2,2)
    let expected_ranks = [7.5 / 4.0, 7.0 / 4.0, 9.5 / 4.0];
    let ranks = mean_average_rank(&table).unwrap();
    let ranks_ok = ranks.iter().zip(expected_ranks).all(|(a, b)| (a - b).abs() < 1e-12);
    let wl: Vec<(usize, usize)> = win_loss(&table).unwrap().iter().map(|w| (w.wins, w.losses)).collect();
    let wl_ok = wl == [(3, 2), (3, 1), (2, 3)];
    let cd = nemenyi_cd(7, 85, 0.05).unwrap();
    let cd_ok = (cd - 0.977).abs() <= 0.01;
    let not_sig = !significantly_different(3.494, 3.271, cd);
    outcome(
        ranks_ok && wl_ok && cd_ok && not_sig,
        format!("ranks {ranks:?}, wins/losses {wl:?}, CD(7, 85, 0.05) = {cd:.4}, 3.494 vs 3.271 significant: {}", !not_sig),
    )
}

fn format_roundtrips() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.tsfg");
    let config = GenConfig { count: 200, global_seed: 5, ..GenConfig::default() };
    let mut records = corpus_records(&config, 1).unwrap();
    records[3].class = Some(2);
    write_dataset(&path, &records, FLAG_SYNTHETIC).unwrap();
    let back = read_dataset(&path).unwrap().records;
    let bits = |r: &[Record]| -> Vec<u32> { r.iter().flat_map(|x| x.values.iter().chain(&x.labels)).map(|v| v.to_bits()).collect() };
    let dataset_exact = back == records && bits(&back) == bits(&records);

    let bytes = std::fs::read(&path).unwrap();
    let mut errors_ok = true;
    let mut bad = bytes.clone();
    bad[0] ^= 0xFF;
    std::fs::write(&path, &bad).unwrap();
    errors_ok &= matches!(read_dataset(&path), Err(Error::Format { source: FormatError::BadMagic { .. }, .. }));
    let mut bad = bytes.clone();
    bad[4] = 2;
    std::fs::write(&path, &bad).unwrap();
    errors_ok &= matches!(read_dataset(&path), Err(Error::Format { source: FormatError::UnsupportedVersion { .. }, .. }));
    std::fs::write(&path, &bytes[..bytes.len() - 10]).unwrap();
    errors_ok &= matches!(read_dataset(&path), Err(Error::Format { source: FormatError::Truncated(_), .. }));

    let model = build_model(&ArchConfig::pretext(), 9).unwrap();
    let adam = AdamState::new(&model, 1e-3);
    let encoded = encode_checkpoint(&model, Some(&adam)).unwrap();
    let (m2, a2) = decode_checkpoint(&encoded).unwrap();
    let ckpt_exact = m2 == quantize(&model) && encode_checkpoint(&m2, a2.as_ref()).unwrap() == encoded;
    let mut flipped = encoded.clone();
    let mid = flipped.len() / 2;
    flipped[mid] ^= 1;
    errors_ok &= matches!(decode_checkpoint(&flipped), Err(Error::FormatData(FormatError::Checksum)));

    outcome(
        dataset_exact && ckpt_exact && errors_ok,
        format!("dataset bit-exact: {dataset_exact}; checkpoint bit-exact: {ckpt_exact}; corruption rejected: {errors_ok}"),
    )
}

fn throughput() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let out = common::cli_ok(&["generate", "--count", "100000", "--seed", "1", "--out", "big.tsfg", "--workers", "8"], dir.path());
    let t = start.elapsed();
    let size = std::fs::metadata(dir.path().join("big.tsfg")).map(|m| m.len()).unwrap_or(0);
    outcome(
        within(t, Duration::from_secs(300)),
        format!(
            "{} in {t:.1?}, {:.1} MB",
            String::from_utf8_lossy(&out.stdout).trim(),
            size as f64 / 1e6
        ),
    )
}

fn main() {
    let wanted: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    type Criterion = (usize, &'static str, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        (1, "label oracle equivalence", label_oracle),
        (2, "gradient correctness", gradients),
        (3, "determinism", determinism),
        (4, "stratified reduction 70/30 -> 7/3", reduction_example),
        (6, "seasonality discrimination", seasonality),
        (7, "statistics oracle", statistics),
        (8, "format roundtrips", format_roundtrips),
        (9, "generation throughput", throughput),
        (5, "desk-scale positive transfer", positive_transfer),
    ];
    let mut failed = Vec::new();
    for (id, name, run) in criteria {
        if !wanted.is_empty() && !wanted.contains(&id) {
            continue;
        }
        let result = run();
        println!(
            "criterion {id} {name}: {} ({})",
            if result.pass { "PASS" } else { "FAIL" },
            result.detail
        );
        if !result.pass {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
