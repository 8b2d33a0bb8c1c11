//! Parametric synthetic series generation.
//!
//! A series is a concatenation of one to five segments. Each segment is a scaled pattern
//! primitive plus a linear trend ("angle") plus Gaussian noise, shifted so that it starts
//! where the previous segment ended. Records are generated independently from a seed
//! derived from `(global_seed, record_index)`, which makes corpus generation
//! embarrassingly parallel and bit-reproducible for any worker count.

mod pattern;

use std::f64::consts::PI;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use pattern::{PatternFamily, PatternId};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_for};
use crate::series::{z_normalize, TimeSeries};

pub const MIN_SEGMENT_LEN: usize = 3;
pub const MIN_SERIES_LEN: usize = 30;
pub const MAX_SEGMENTS: usize = 5;
/// Regeneration attempts for a record whose raw series has zero variance.
pub const MAX_RETRIES: u64 = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentSpec {
    pub pattern: PatternId,
    pub length: usize,
    /// Trend slope in value units per sample.
    pub angle: f64,
    pub amplitude: f64,
    /// Cycles per segment.
    pub frequency: f64,
    /// Radians in `[0, 2π)`.
    pub phase: f64,
    pub noise_sigma: f64,
}

impl SegmentSpec {
    /// A noiseless, untrended segment with zero phase.
    pub fn new(pattern: PatternId, length: usize) -> Self {
        Self {
            pattern,
            length,
            angle: 0.0,
            amplitude: 1.0,
            frequency: 1.0,
            phase: 0.0,
            noise_sigma: 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.length < MIN_SEGMENT_LEN {
            return Err(Error::Input(format!(
                "segment length {} is below {MIN_SEGMENT_LEN}",
                self.length
            )));
        }
        let params = [
            self.angle,
            self.amplitude,
            self.frequency,
            self.phase,
            self.noise_sigma,
        ];
        if params.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input(format!("non-finite segment parameter in {self:?}")));
        }
        if self.amplitude < 0.0 || self.noise_sigma < 0.0 || self.frequency < 0.0 {
            return Err(Error::Input(format!(
                "amplitude, frequency and noise must be non-negative: {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSpec {
    pub segments: Vec<SegmentSpec>,
    pub seed: u64,
}

impl SeriesSpec {
    pub fn total_length(&self) -> usize {
        self.segments.iter().map(|s| s.length).sum()
    }

    /// Family covering the largest number of samples (ties go to the earlier family).
    pub fn dominant_family(&self) -> PatternFamily {
        let mut cover = [0usize; 3];
        for s in &self.segments {
            cover[s.pattern.family() as usize] += s.length;
        }
        let best = (0..3).fold(0, |b, i| if cover[i] > cover[b] { i } else { b });
        [
            PatternFamily::Periodic,
            PatternFamily::Monotone,
            PatternFamily::Irregular,
        ][best]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        if self.max > self.min {
            rng.random_range(self.min..self.max)
        } else {
            self.min
        }
    }

    fn is_valid(&self) -> bool {
        self.min.is_finite() && self.max.is_finite() && self.min <= self.max
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub count: u64,
    pub global_seed: u64,
    pub length_buckets: Vec<usize>,
    /// Sampling weights indexed by [`PatternId::index`].
    pub pattern_weights: [f64; 12],
    pub max_segments: usize,
    pub noise: Range,
    pub amplitude: Range,
    pub angle: Range,
    pub frequency: Range,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            count: 100_000,
            global_seed: 0,
            length_buckets: vec![60, 120, 240, 500],
            pattern_weights: [1.0 / 12.0; 12],
            max_segments: MAX_SEGMENTS,
            noise: Range::new(0.0, 0.2),
            amplitude: Range::new(0.5, 2.0),
            angle: Range::new(-0.02, 0.02),
            frequency: Range::new(0.5, 6.0),
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.count < 1 {
            return fail("count must be at least 1".into());
        }
        if self.length_buckets.is_empty() {
            return fail("no length buckets".into());
        }
        if let Some(l) = self.length_buckets.iter().find(|&&l| l < MIN_SERIES_LEN) {
            return fail(format!("length bucket {l} is below {MIN_SERIES_LEN}"));
        }
        if !(1..=MAX_SEGMENTS).contains(&self.max_segments) {
            return fail(format!("max_segments must be in 1..={MAX_SEGMENTS}"));
        }
        if self.pattern_weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return fail("pattern weights must be finite and non-negative".into());
        }
        let total: f64 = self.pattern_weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return fail(format!("pattern weights sum to {total}, expected 1"));
        }
        for (name, r) in [
            ("noise", self.noise),
            ("amplitude", self.amplitude),
            ("angle", self.angle),
            ("frequency", self.frequency),
        ] {
            if !r.is_valid() {
                return fail(format!("{name} range {r:?} is invalid"));
            }
        }
        if self.amplitude.min <= 0.0 || self.noise.min < 0.0 || self.frequency.min < 0.0 {
            return fail("amplitude must be positive; noise and frequency non-negative".into());
        }
        Ok(())
    }

    /// Weights restricted to the patterns of one family, uniform within it.
    pub fn family_weights(family: PatternFamily) -> [f64; 12] {
        let members = PatternId::ALL.iter().filter(|p| p.family() == family).count();
        let mut w = [0.0; 12];
        for p in PatternId::ALL {
            if p.family() == family {
                w[p.index()] = 1.0 / members as f64;
            }
        }
        w
    }
}

/// Generates the samples of one segment, starting from the raw pattern value (no
/// continuity offset).
pub fn gen_segment(segment: &SegmentSpec, rng: &mut impl Rng) -> Result<Vec<f64>> {
    segment.validate()?;
    let n = segment.length;
    let mut out: Vec<f64> = if segment.pattern.is_deterministic() {
        (0..n)
            .map(|i| {
                let t = i as f64 / n as f64;
                segment.amplitude * segment.pattern.eval(t, segment.frequency, segment.phase)
            })
            .collect()
    } else {
        let step = Normal::new(0.0, 1.0 / (n as f64).sqrt()).expect("valid sigma");
        let mut level = 0.0;
        (0..n)
            .map(|i| {
                if i > 0 {
                    level += step.sample(rng);
                }
                segment.amplitude * level
            })
            .collect()
    };
    for (i, v) in out.iter_mut().enumerate() {
        *v += segment.angle * i as f64;
    }
    if segment.noise_sigma > 0.0 {
        let noise = Normal::new(0.0, segment.noise_sigma)
            .map_err(|e| Error::Input(format!("noise sigma: {e}")))?;
        for v in out.iter_mut() {
            *v += noise.sample(rng);
        }
    }
    Ok(out)
}

/// Draws the recipe for record `record_index`.
pub fn sample_spec(config: &GenConfig, record_index: u64) -> Result<SeriesSpec> {
    config.validate()?;
    if record_index >= config.count {
        return Err(Error::Input(format!(
            "record index {record_index} out of range for count {}",
            config.count
        )));
    }
    Ok(spec_from_seed(config, derive_seed(config.global_seed, record_index)))
}

fn spec_from_seed(config: &GenConfig, seed: u64) -> SeriesSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = config.length_buckets[rng.random_range(0..config.length_buckets.len())];
    let max_segments = config.max_segments.min(total / MIN_SEGMENT_LEN);
    let n_segments = rng.random_range(1..=max_segments);

    // Each segment gets the minimum length plus a random share of the remainder.
    let spare = total - n_segments * MIN_SEGMENT_LEN;
    let shares: Vec<f64> = (0..n_segments).map(|_| rng.random_range(0.5..1.5)).collect();
    let share_sum: f64 = shares.iter().sum();
    let mut lengths: Vec<usize> = shares
        .iter()
        .map(|s| MIN_SEGMENT_LEN + (spare as f64 * s / share_sum).floor() as usize)
        .collect();
    let assigned: usize = lengths.iter().sum();
    *lengths.last_mut().expect("at least one segment") += total - assigned;

    let patterns = WeightedIndex::new(config.pattern_weights).expect("validated weights");
    let segments = lengths
        .into_iter()
        .map(|length| SegmentSpec {
            pattern: PatternId::ALL[patterns.sample(&mut rng)],
            length,
            angle: config.angle.sample(&mut rng),
            amplitude: config.amplitude.sample(&mut rng),
            frequency: config.frequency.sample(&mut rng),
            phase: rng.random_range(0.0..2.0 * PI),
            noise_sigma: config.noise.sample(&mut rng),
        })
        .collect();
    SeriesSpec { segments, seed }
}

/// Renders a spec into raw (unnormalized) values.
pub fn gen_series(spec: &SeriesSpec) -> Result<TimeSeries> {
    if spec.segments.is_empty() || spec.segments.len() > MAX_SEGMENTS {
        return Err(Error::Input(format!(
            "a series needs 1..={MAX_SEGMENTS} segments, got {}",
            spec.segments.len()
        )));
    }
    let mut values = Vec::with_capacity(spec.total_length());
    for (s, segment) in spec.segments.iter().enumerate() {
        let mut rng = rng_for(spec.seed, s as u64 + 1);
        let part = gen_segment(segment, &mut rng)?;
        let offset = values.last().copied().unwrap_or(0.0) - part[0];
        values.extend(part.into_iter().map(|v| v + offset));
    }
    Ok(TimeSeries::new(values))
}

/// One emitted corpus record: the z-normalized series and the recipe that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedRecord {
    pub index: u64,
    pub series: TimeSeries,
    pub spec: SeriesSpec,
}

/// Generates record `index` of the corpus, z-normalized and rounded to single precision.
pub fn generate_record(config: &GenConfig, index: u64) -> Result<GeneratedRecord> {
    let base = sample_spec(config, index)?.seed;
    let mut seed = base;
    for attempt in 0..=MAX_RETRIES {
        if attempt > 0 {
            seed = derive_seed(base, attempt);
        }
        let spec = spec_from_seed(config, seed);
        let mut series = gen_series(&spec)?;
        if !series.is_finite() {
            return Err(Error::NonFinite(format!("record {index} produced non-finite values")));
        }
        if z_normalize(&mut series.values) {
            series.values.iter_mut().for_each(|v| *v = *v as f32 as f64);
            return Ok(GeneratedRecord { index, series, spec });
        }
    }
    Err(Error::NonFinite(format!(
        "record {index} had zero variance after {MAX_RETRIES} retries"
    )))
}

const CHUNK: u64 = 2048;

/// Maps `f` over `0..count` on `workers` threads and feeds results to `sink` in index
/// order. The output sequence does not depend on `workers`.
pub fn par_map_ordered<T, F, S>(count: u64, workers: usize, f: F, mut sink: S) -> Result<()>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
    S: FnMut(T) -> Result<()>,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let mut start = 0;
    while start < count {
        let end = (start + CHUNK).min(count);
        let chunk: Vec<Result<T>> = pool.install(|| (start..end).into_par_iter().map(&f).collect());
        for item in chunk {
            sink(item?)?;
        }
        start = end;
    }
    Ok(())
}

/// Emits `config.count` normalized records in index order.
pub fn gen_dataset<S>(config: &GenConfig, workers: usize, sink: S) -> Result<()>
where
    S: FnMut(GeneratedRecord) -> Result<()>,
{
    config.validate()?;
    par_map_ordered(config.count, workers, |i| generate_record(config, i), sink)
}
