use std::path::Path;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::io::{ClassMap, DatasetWriter, LabeledDataset, Record, FLAG_SYNTHETIC};
use crate::labeler::{label_vector, LABEL_WIDTH};
use crate::rng::rng_for;
use crate::synthgen::{generate_record, GenConfig, GeneratedRecord, PatternFamily};

use super::{SPLIT_STREAM, REDUCE_STREAM};

/// Shuffles `0..n` and splits it into `round(n·fraction)` training and the remaining
/// validation indices. Both halves come back sorted.
pub fn split_train_val(n: usize, fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if n < 2 {
        return Err(Error::Input(format!("need at least 2 records to split, found {n}")));
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Config(format!("split fraction {fraction} is not in (0, 1)")));
    }
    let n_train = ((n as f64 * fraction).round() as usize).clamp(1, n - 1);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng_for(seed, SPLIT_STREAM));
    let mut val = idx.split_off(n_train);
    idx.sort_unstable();
    val.sort_unstable();
    Ok((idx, val))
}

/// Samples kept for a class of `count` samples: `round(fraction·count)` rounded half-up,
/// at least one.
pub fn reduced_class_count(count: usize, fraction: f64) -> usize {
    ((fraction * count as f64 + 0.5).floor() as usize).clamp(1, count.max(1))
}

/// Keeps a random `fraction` of every class. Selected samples stay in their original order.
pub fn reduce_training_set(data: &LabeledDataset, fraction: f64, seed: u64) -> Result<LabeledDataset> {
    if data.is_empty() {
        return Err(Error::Input("cannot reduce an empty dataset".into()));
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Config(format!("reduction fraction {fraction} is not in (0, 1]")));
    }
    let mut by_class = vec![Vec::new(); data.n_classes()];
    for (i, &c) in data.classes.iter().enumerate() {
        by_class
            .get_mut(c)
            .ok_or_else(|| Error::Input(format!("series {i} has class {c} outside the class map")))?
            .push(i);
    }
    if let Some(c) = by_class.iter().position(Vec::is_empty) {
        return Err(Error::Input(format!(
            "class {:?} has no training samples",
            data.class_map.labels[c]
        )));
    }
    let mut keep = Vec::new();
    for (c, mut members) in by_class.into_iter().enumerate() {
        let n = reduced_class_count(members.len(), fraction);
        members.shuffle(&mut rng_for(seed, REDUCE_STREAM + c as u64));
        keep.extend_from_slice(&members[..n]);
    }
    keep.sort_unstable();
    Ok(data.subset(&keep))
}

/// Attaches the 55 pretext targets to a generated series.
pub fn label_record(record: &GeneratedRecord) -> Result<Record> {
    let labels = label_vector(&record.series.values)?;
    Ok(Record {
        values: record.series.values.iter().map(|&v| v as f32).collect(),
        labels: labels.as_slice().iter().map(|&v| v as f32).collect(),
        class: None,
    })
}

/// Generates and labels `config.count` records in index order.
pub fn generate_corpus(config: &GenConfig, workers: usize, mut sink: impl FnMut(Record) -> Result<()>) -> Result<()> {
    config.validate()?;
    crate::synthgen::par_map_ordered(
        config.count,
        workers,
        |i| generate_record(config, i).and_then(|r| label_record(&r)),
        &mut sink,
    )
}

/// Generates a labeled corpus straight to a dataset file and returns the record count.
pub fn write_corpus(config: &GenConfig, workers: usize, path: &Path) -> Result<u64> {
    let mut writer = DatasetWriter::create(path, LABEL_WIDTH as u16, FLAG_SYNTHETIC)?;
    generate_corpus(config, workers, |r| writer.push(&r))?;
    writer.finish()
}

/// In-memory variant of [`write_corpus`].
pub fn corpus_records(config: &GenConfig, workers: usize) -> Result<Vec<Record>> {
    let mut out = Vec::with_capacity(config.count as usize);
    generate_corpus(config, workers, |r| {
        out.push(r);
        Ok(())
    })?;
    Ok(out)
}

/// A balanced classification task: series from `config` labeled by their dominant
/// pattern family, `per_class` of each, taken in generation order.
pub fn family_task(config: &GenConfig, per_class: usize) -> Result<LabeledDataset> {
    if per_class == 0 {
        return Err(Error::Config("per_class must be at least 1".into()));
    }
    config.validate()?;
    let families = [PatternFamily::Periodic, PatternFamily::Monotone, PatternFamily::Irregular];
    let mut counts = [0usize; 3];
    let mut series = Vec::with_capacity(3 * per_class);
    let mut classes = Vec::with_capacity(3 * per_class);
    let mut done = false;
    for index in 0..config.count {
        let r = generate_record(config, index)?;
        let class = families.iter().position(|&f| f == r.spec.dominant_family()).expect("known family");
        if counts[class] < per_class {
            counts[class] += 1;
            series.push(r.series.values);
            classes.push(class);
            done = counts.iter().all(|&c| c == per_class);
            if done {
                break;
            }
        }
    }
    if !done {
        return Err(Error::Config(format!(
            "{} records gave only {counts:?} per family, wanted {per_class}",
            config.count
        )));
    }
    Ok(LabeledDataset {
        series,
        classes,
        class_map: ClassMap {
            labels: families.iter().map(|f| format!("{f:?}").to_lowercase()).collect(),
        },
    })
}
