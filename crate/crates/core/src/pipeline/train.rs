use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::io::{LabeledDataset, Record};
use crate::rng::{derive_seed, rng_for};
use crate::tensornet::{
    adam_step, backward, build_model, cross_entropy_from_logits, forward, AdamState, ArchConfig, Batch, Head,
    Matrix, Model, Target,
};

use super::history::{EpochRecord, TrainHistory};
use super::{split_train_val, INIT_STREAM, SHUFFLE_STREAM};

pub const PRETRAIN_EPOCHS: usize = 100;
pub const FINETUNE_EPOCHS: usize = 2000;
pub const DESK_FINETUNE_EPOCHS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EarlyStop {
    pub patience: usize,
    pub min_delta: f64,
}

impl Default for EarlyStop {
    fn default() -> Self {
        Self { patience: 10, min_delta: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    /// Only used by [`pretrain`]; classification runs always go the full length.
    pub early_stop: Option<EarlyStop>,
    pub split_fraction: f64,
    pub seed: u64,
    /// Leave the convolutional core untouched and train only the head.
    pub freeze_core: bool,
    pub learning_rate: f64,
}

impl TrainConfig {
    pub fn pretrain(seed: u64) -> Self {
        Self {
            epochs: PRETRAIN_EPOCHS,
            batch_size: 128,
            early_stop: Some(EarlyStop::default()),
            split_fraction: 0.8,
            seed,
            freeze_core: false,
            learning_rate: 1e-3,
        }
    }

    pub fn finetune(seed: u64) -> Self {
        Self {
            epochs: FINETUNE_EPOCHS,
            early_stop: None,
            ..Self::pretrain(seed)
        }
    }

    pub fn with_epochs(mut self, epochs: usize) -> Self {
        self.epochs = epochs;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config("epochs and batch size must be at least 1".into()));
        }
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return Err(Error::Config(format!("split fraction {} is not in (0, 1)", self.split_fraction)));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config(format!("learning rate {}", self.learning_rate)));
        }
        if let Some(es) = self.early_stop {
            if es.patience == 0 || !(es.min_delta >= 0.0) {
                return Err(Error::Config(format!("early stopping {es:?}")));
            }
        }
        Ok(())
    }
}

/// Seed used to initialize a model trained with `seed`. A checkpoint built from this seed
/// makes [`finetune`] reproduce [`train_scratch`] exactly.
pub fn init_seed(seed: u64) -> u64 {
    derive_seed(seed, INIT_STREAM)
}

/// Groups indices by series length, shuffles within each group, cuts batches and
/// shuffles the batch order. Without an rng the order is deterministic.
fn length_batches(
    indices: &[usize],
    len_of: impl Fn(usize) -> usize,
    batch_size: usize,
    mut rng: Option<&mut impl Rng>,
) -> Vec<Vec<usize>> {
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &i in indices {
        groups.entry(len_of(i)).or_default().push(i);
    }
    let mut batches = Vec::new();
    for (_, mut group) in groups {
        if let Some(rng) = rng.as_deref_mut() {
            group.shuffle(rng);
        }
        batches.extend(group.chunks(batch_size).map(<[usize]>::to_vec));
    }
    if let Some(rng) = rng {
        batches.shuffle(rng);
    }
    batches
}

fn regression_batch(records: &[Record], idx: &[usize]) -> Result<(Batch, Matrix)> {
    let series: Vec<Vec<f64>> = idx.iter().map(|&i| records[i].values_f64()).collect();
    let targets: Vec<Vec<f64>> = idx
        .iter()
        .map(|&i| records[i].labels.iter().map(|&v| f64::from(v)).collect())
        .collect();
    Ok((Batch::from_series(&series)?, Matrix::from_rows(&targets)?))
}

fn check_loss(loss: f64, epoch: usize, batch: usize) -> Result<()> {
    if loss.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(format!("loss became {loss} at epoch {epoch}, batch {batch}")))
    }
}

/// Mean squared error of `model` over `indices`.
pub fn evaluate_mse(model: &Model, records: &[Record], indices: &[usize], batch_size: usize) -> Result<f64> {
    let mut total = 0.0;
    let mut count = 0usize;
    for idx in length_batches(indices, |i| records[i].values.len(), batch_size, None::<&mut rand_chacha::ChaCha8Rng>) {
        let (batch, target) = regression_batch(records, &idx)?;
        let out = forward(model, &batch)?;
        total += crate::tensornet::loss_mse(&out.outputs, &target)? * idx.len() as f64;
        count += idx.len();
    }
    Ok(total / count.max(1) as f64)
}

#[derive(Debug, Clone)]
pub struct PretrainOutcome {
    /// Weights from the epoch with the lowest validation loss.
    pub model: Model,
    pub adam: AdamState,
    pub history: TrainHistory,
    /// 1-based epoch the returned weights come from.
    pub best_epoch: usize,
    pub stopped_early: bool,
}

pub fn pretrain(model: Model, records: &[Record], config: &TrainConfig) -> Result<PretrainOutcome> {
    pretrain_with_progress(model, records, config, |_| {})
}

/// [`pretrain`] that reports every finished epoch to `progress`.
pub fn pretrain_with_progress(
    mut model: Model,
    records: &[Record],
    config: &TrainConfig,
    mut progress: impl FnMut(&EpochRecord),
) -> Result<PretrainOutcome> {
    config.validate()?;
    model.validate()?;
    if records.is_empty() {
        return Err(Error::Input("pretraining dataset is empty".into()));
    }
    let Head::Regression { outputs } = model.arch.head else {
        return Err(Error::Config("pretraining needs a regression head".into()));
    };
    if let Some(i) = records.iter().position(|r| r.labels.len() != outputs) {
        return Err(Error::Input(format!(
            "record {i} has {} labels, the head has {outputs} outputs",
            records[i].labels.len()
        )));
    }
    let (train, val) = split_train_val(records.len(), config.split_fraction, config.seed)?;
    let mut adam = AdamState::new(&model, config.learning_rate);
    let mut history = TrainHistory::default();
    let mut best = (f64::INFINITY, model.clone(), adam.clone(), 0usize);
    let mut stale = 0;
    let mut stopped_early = false;
    let len_of = |i: usize| records[i].values.len();

    for epoch in 1..=config.epochs {
        let mut rng = rng_for(config.seed, SHUFFLE_STREAM + epoch as u64);
        let batches = length_batches(&train, len_of, config.batch_size, Some(&mut rng));
        let mut total = 0.0;
        for (b, idx) in batches.iter().enumerate() {
            let (batch, target) = regression_batch(records, idx)?;
            let out = forward(&model, &batch)?;
            let (grads, loss) = backward(&model, &out.cache, Target::Regression(&target))?;
            check_loss(loss, epoch, b)?;
            adam_step(&mut model, &mut adam, &grads)?;
            total += loss * idx.len() as f64;
        }
        let val_loss = evaluate_mse(&model, records, &val, config.batch_size)?;
        check_loss(val_loss, epoch, batches.len())?;
        let rec = EpochRecord {
            epoch,
            train_loss: total / train.len() as f64,
            val_loss: Some(val_loss),
            test_accuracy: None,
        };
        history.records.push(rec);
        progress(&rec);

        let min_delta = config.early_stop.map_or(0.0, |es| es.min_delta);
        if val_loss < best.0 - min_delta || best.3 == 0 {
            best = (val_loss, model.clone(), adam.clone(), epoch);
            stale = 0;
        } else {
            stale += 1;
        }
        if let Some(es) = config.early_stop {
            if stale >= es.patience {
                stopped_early = epoch < config.epochs;
                break;
            }
        }
    }
    let (_, model, adam, best_epoch) = best;
    Ok(PretrainOutcome {
        model,
        adam,
        history,
        best_epoch,
        stopped_early,
    })
}

/// Index of the first largest entry of each row.
pub fn argmax_rows(m: &Matrix) -> Vec<usize> {
    (0..m.rows)
        .map(|r| {
            let row = m.row(r);
            (0..row.len()).fold(0, |b, j| if row[j] > row[b] { j } else { b })
        })
        .collect()
}

/// Cross-entropy and accuracy of a classifier over a whole dataset.
pub fn evaluate_classifier(model: &Model, data: &LabeledDataset, batch_size: usize) -> Result<(f64, f64)> {
    let all: Vec<usize> = (0..data.len()).collect();
    let mut loss = 0.0;
    let mut correct = 0usize;
    for idx in length_batches(&all, |i| data.series[i].len(), batch_size, None::<&mut rand_chacha::ChaCha8Rng>) {
        let series: Vec<&[f64]> = idx.iter().map(|&i| data.series[i].as_slice()).collect();
        let labels: Vec<usize> = idx.iter().map(|&i| data.classes[i]).collect();
        let out = forward(model, &Batch::from_series(&series)?)?;
        loss += cross_entropy_from_logits(&out.cache.logits, &labels)? * idx.len() as f64;
        correct += argmax_rows(&out.outputs)
            .iter()
            .zip(&labels)
            .filter(|(p, y)| p == y)
            .count();
    }
    let n = data.len().max(1) as f64;
    Ok((loss / n, correct as f64 / n))
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Weights after the last epoch.
    pub model: Model,
    /// `val_loss` holds the test-set loss.
    pub history: TrainHistory,
}

fn check_target_sets(train: &LabeledDataset, test: &LabeledDataset) -> Result<usize> {
    let classes = train.n_classes();
    if classes < 2 {
        return Err(Error::Input(format!("need at least 2 classes, found {classes}")));
    }
    if train.is_empty() || test.is_empty() {
        return Err(Error::Input("training and test sets must be non-empty".into()));
    }
    if test.class_map != train.class_map {
        return Err(Error::Input("test set uses a different class mapping than the training set".into()));
    }
    for (name, d) in [("train", train), ("test", test)] {
        if d.series.len() != d.classes.len() {
            return Err(Error::Shape(format!("{name}: series and class counts differ")));
        }
        if let Some(i) = d.classes.iter().position(|&c| c >= classes) {
            return Err(Error::Input(format!("{name} series {i} has unseen class {}", d.classes[i])));
        }
    }
    Ok(classes)
}

fn fit_classifier(mut model: Model, train: &LabeledDataset, test: &LabeledDataset, config: &TrainConfig) -> Result<TrainOutcome> {
    let mut adam = AdamState::new(&model, config.learning_rate);
    let core = model.core_len();
    let all: Vec<usize> = (0..train.len()).collect();
    let mut history = TrainHistory::default();
    for epoch in 1..=config.epochs {
        let mut rng = rng_for(config.seed, SHUFFLE_STREAM + epoch as u64);
        let batches = length_batches(&all, |i| train.series[i].len(), config.batch_size, Some(&mut rng));
        let mut total = 0.0;
        for (b, idx) in batches.iter().enumerate() {
            let series: Vec<&[f64]> = idx.iter().map(|&i| train.series[i].as_slice()).collect();
            let labels: Vec<usize> = idx.iter().map(|&i| train.classes[i]).collect();
            let out = forward(&model, &Batch::from_series(&series)?)?;
            let (mut grads, loss) = backward(&model, &out.cache, Target::Classes(&labels))?;
            check_loss(loss, epoch, b)?;
            if config.freeze_core {
                grads.0[..core].iter_mut().for_each(|g| g.fill(0.0));
            }
            adam_step(&mut model, &mut adam, &grads)?;
            total += loss * idx.len() as f64;
        }
        let (test_loss, acc) = evaluate_classifier(&model, test, config.batch_size)?;
        check_loss(test_loss, epoch, batches.len())?;
        history.records.push(EpochRecord {
            epoch,
            train_loss: total / train.len() as f64,
            val_loss: Some(test_loss),
            test_accuracy: Some(acc),
        });
    }
    Ok(TrainOutcome { model, history })
}

/// Fine-tunes a pretrained core with a fresh classification head.
pub fn finetune(checkpoint: &Model, train: &LabeledDataset, test: &LabeledDataset, config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    checkpoint.validate()?;
    let classes = check_target_sets(train, test)?;
    let arch = checkpoint.arch.with_head(Head::Classification { classes });
    let mut model = build_model(&arch, init_seed(config.seed))?;
    model.load_core_from(checkpoint)?;
    fit_classifier(model, train, test, config)
}

/// Trains the same architecture from a random initialization.
pub fn train_scratch(arch: &ArchConfig, train: &LabeledDataset, test: &LabeledDataset, config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    let classes = check_target_sets(train, test)?;
    let model = build_model(&arch.with_head(Head::Classification { classes }), init_seed(config.seed))?;
    fit_classifier(model, train, test, config)
}
