use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use tstransfer::analysis::{
    mean_average_rank, nemenyi_cd, seasonality_dataset, significantly_different, transfer_savings, win_loss,
    EvalTable, SEASONAL_THRESHOLD,
};
use tstransfer::io::{is_dataset_file, load_checkpoint, load_ucr_pair, load_ucr_tsv, read_dataset, save_checkpoint};
use tstransfer::pipeline::{
    finetune, init_seed, pretrain_with_progress, reduce_training_set, train_scratch, write_corpus, EarlyStop,
    TrainConfig, TrainHistory, TrainOutcome, DESK_FINETUNE_EPOCHS, PRETRAIN_EPOCHS,
};
use tstransfer::synthgen::GenConfig;
use tstransfer::tensornet::{build_model, ArchConfig};
use tstransfer::{Error, Result};

/// Synthetic pretraining and transfer learning for time series classification.
#[derive(Parser)]
#[command(name = "tstransfer", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate and label a synthetic corpus.
    Generate {
        #[arg(long, default_value_t = 100_000)]
        count: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_value = "60,120,240,500")]
        lengths: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; the output does not depend on this.
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Pretrain the network on a labeled corpus.
    Pretrain {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = PRETRAIN_EPOCHS)]
        epochs: usize,
        #[arg(long, default_value_t = 128)]
        batch: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        history: PathBuf,
        #[arg(long, default_value_t = 10)]
        patience: usize,
        #[arg(long, default_value_t = 1e-4)]
        min_delta: f64,
        #[arg(long, default_value_t = 1e-3)]
        lr: f64,
        #[arg(long)]
        quiet: bool,
    },
    /// Fine-tune a pretrained checkpoint on a UCR-style train/test pair.
    Finetune {
        #[arg(long)]
        ckpt: PathBuf,
        #[command(flatten)]
        target: TargetArgs,
        /// Train only the classification head.
        #[arg(long)]
        freeze_core: bool,
    },
    /// Train the same network from a random initialization.
    Scratch {
        #[command(flatten)]
        target: TargetArgs,
    },
    /// Seasonality metric of a UCR-style file or a corpus file.
    Seasonality {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank statistics over an accuracy table, plus transfer savings from paired histories.
    Report {
        #[arg(long)]
        table: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, requires = "pretrained_history")]
        scratch_history: Option<PathBuf>,
        #[arg(long, requires = "scratch_history")]
        pretrained_history: Option<PathBuf>,
    },
    /// Dump a corpus file as CSV.
    Export {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct TargetArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    /// Fraction of each training class to keep.
    #[arg(long, default_value_t = 1.0)]
    reduce: f64,
    #[arg(long, default_value_t = DESK_FINETUNE_EPOCHS)]
    epochs: usize,
    #[arg(long, default_value_t = 128)]
    batch: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    history: PathBuf,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    /// Where to save the trained classifier.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Input(format!("json: {e}")))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

fn run_target(args: &TargetArgs, freeze_core: bool, ckpt: Option<&Path>) -> Result<()> {
    let (train, test) = load_ucr_pair(&args.train, &args.test)?;
    let train = if args.reduce < 1.0 {
        reduce_training_set(&train, args.reduce, args.seed)?
    } else {
        train
    };
    let config = TrainConfig {
        batch_size: args.batch,
        freeze_core,
        learning_rate: args.lr,
        ..TrainConfig::finetune(args.seed).with_epochs(args.epochs)
    };
    let TrainOutcome { model, history } = match ckpt {
        Some(path) => finetune(&load_checkpoint(path)?.0, &train, &test, &config)?,
        None => train_scratch(&ArchConfig::pretext(), &train, &test, &config)?,
    };
    history.write_csv(&args.history)?;
    if let Some(out) = &args.out {
        save_checkpoint(out, &model, None)?;
    }
    if let Some(last) = history.last() {
        println!(
            "{} training series, {} classes, final test accuracy {:.4}",
            train.len(),
            train.n_classes(),
            last.test_accuracy.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct SeasonalityOut {
    source: String,
    n_series: usize,
    sm: f64,
    threshold: f64,
    is_seasonal: bool,
    per_series: Vec<f64>,
}

#[derive(Serialize)]
struct PairOut {
    a: String,
    b: String,
    rank_difference: f64,
    significant: bool,
}

#[derive(Serialize)]
struct NemenyiOut {
    alpha: f64,
    methods: usize,
    datasets: usize,
    critical_difference: f64,
    pairs: Vec<PairOut>,
}

fn report(
    table: &Path,
    alpha: f64,
    out: &Path,
    histories: Option<(&PathBuf, &PathBuf)>,
) -> Result<()> {
    let table = EvalTable::read_csv(table)?;
    std::fs::create_dir_all(out)?;
    let ranks = mean_average_rank(&table)?;
    let wl = win_loss(&table)?;
    let mut csv = String::from("method,mean_rank,wins,losses\n");
    for ((m, r), w) in table.methods.iter().zip(&ranks).zip(&wl) {
        csv.push_str(&format!("{m},{r:.6},{},{}\n", w.wins, w.losses));
    }
    std::fs::write(out.join("ranks.csv"), csv)?;

    let cd = nemenyi_cd(table.methods.len(), table.datasets.len(), alpha)?;
    let mut pairs = Vec::new();
    for i in 0..ranks.len() {
        for j in i + 1..ranks.len() {
            pairs.push(PairOut {
                a: table.methods[i].clone(),
                b: table.methods[j].clone(),
                rank_difference: (ranks[i] - ranks[j]).abs(),
                significant: significantly_different(ranks[i], ranks[j], cd),
            });
        }
    }
    write_json(
        &out.join("nemenyi.json"),
        &NemenyiOut {
            alpha,
            methods: table.methods.len(),
            datasets: table.datasets.len(),
            critical_difference: cd,
            pairs,
        },
    )?;
    println!("critical difference {cd:.4}");

    if let Some((scratch, pretrained)) = histories {
        let scratch = TrainHistory::read_csv(scratch)?.accuracies();
        let pretrained = TrainHistory::read_csv(pretrained)?.accuracies();
        let savings = transfer_savings(&scratch, &pretrained)?;
        write_json(&out.join("transfer.json"), &savings)?;
        let cell = |h: &[Option<f64>], e: usize| h.get(e).copied().flatten().map(|a| a.to_string()).unwrap_or_default();
        let mut csv = String::from("epoch,scratch,pretrained\n");
        for e in 0..scratch.len().max(pretrained.len()) {
            csv.push_str(&format!("{},{},{}\n", e + 1, cell(&scratch, e), cell(&pretrained, e)));
        }
        std::fs::write(out.join("accuracy_vs_epoch.csv"), csv)?;
        if let Some(f) = savings.savings_fraction {
            println!("transfer saves {:.1}% of the scratch epochs", 100.0 * f);
        }
    }
    Ok(())
}

fn export(data: &Path, out: &Path) -> Result<()> {
    let file = std::fs::File::create(out)?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    let csv_err = |e: csv::Error| Error::Input(format!("csv: {e}"));
    w.write_record(["index", "class", "length", "values", "labels"]).map_err(csv_err)?;
    let join = |v: &[f32]| v.iter().map(f32::to_string).collect::<Vec<_>>().join(" ");
    for (i, r) in read_dataset(data)?.records.iter().enumerate() {
        let class = r.class.map(|c| c.to_string()).unwrap_or_default();
        w.write_record([i.to_string(), class, r.values.len().to_string(), join(&r.values), join(&r.labels)])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Generate { count, seed, lengths, out, workers } => {
            let config = GenConfig {
                count,
                global_seed: seed,
                length_buckets: lengths,
                ..GenConfig::default()
            };
            let n = write_corpus(&config, workers, &out)?;
            println!("wrote {n} series to {}", out.display());
        }
        Command::Pretrain { data, epochs, batch, seed, out, history, patience, min_delta, lr, quiet } => {
            let records = read_dataset(&data)?.records;
            let config = TrainConfig {
                epochs,
                batch_size: batch,
                early_stop: Some(EarlyStop { patience, min_delta }),
                learning_rate: lr,
                ..TrainConfig::pretrain(seed)
            };
            let model = build_model(&ArchConfig::pretext(), init_seed(seed))?;
            let outcome = pretrain_with_progress(model, &records, &config, |r| {
                if !quiet {
                    eprintln!(
                        "epoch {:>3}  train {:.6}  val {:.6}",
                        r.epoch,
                        r.train_loss,
                        r.val_loss.unwrap_or(f64::NAN)
                    );
                }
            })?;
            save_checkpoint(&out, &outcome.model, Some(&outcome.adam))?;
            outcome.history.write_csv(&history)?;
            println!("best validation loss at epoch {}", outcome.best_epoch);
        }
        Command::Finetune { ckpt, target, freeze_core } => run_target(&target, freeze_core, Some(&ckpt))?,
        Command::Scratch { target } => run_target(&target, false, None)?,
        Command::Seasonality { data, out } => {
            let series: Vec<Vec<f64>> = if is_dataset_file(&data)? {
                read_dataset(&data)?.records.iter().map(|r| r.values_f64()).collect()
            } else {
                load_ucr_tsv(&data)?.series
            };
            let report = seasonality_dataset(&series)?;
            println!("SM {:.4} ({})", report.sm, if report.is_seasonal { "seasonal" } else { "non-seasonal" });
            write_json(
                &out,
                &SeasonalityOut {
                    source: data.display().to_string(),
                    n_series: series.len(),
                    sm: report.sm,
                    threshold: SEASONAL_THRESHOLD,
                    is_seasonal: report.is_seasonal,
                    per_series: report.per_series,
                },
            )?;
        }
        Command::Report { table, alpha, out, scratch_history, pretrained_history } => {
            report(&table, alpha, &out, scratch_history.as_ref().zip(pretrained_history.as_ref()))?
        }
        Command::Export { data, out } => export(&data, &out)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
