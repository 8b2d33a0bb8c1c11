//! The 55 regression targets used as the pretraining objective.
//!
//! Five statistics (max, min, population std, peak count, median-crossing count) are
//! computed on the whole series and then on each of ten near-equal segments. Layout is
//! segment-major: entries `0..5` are the whole series, entry `5 + 5·s + t` is task `t` on
//! segment `s`. Counts are divided by the length of the window they were measured on.

use crate::error::{Error, Result};

pub const TASKS: usize = 5;
pub const SEGMENTS: usize = 10;
pub const LABEL_WIDTH: usize = TASKS * (SEGMENTS + 1);
pub const MIN_LABEL_LEN: usize = 30;

/// Task offsets within each group of five.
pub mod task {
    pub const MAX: usize = 0;
    pub const MIN: usize = 1;
    pub const STD: usize = 2;
    pub const PEAKS: usize = 3;
    pub const CROSSINGS: usize = 4;
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelVector(pub [f64; LABEL_WIDTH]);

impl LabelVector {
    pub fn whole(&self, task: usize) -> f64 {
        self.0[task]
    }

    pub fn segment(&self, segment: usize, task: usize) -> f64 {
        self.0[TASKS + TASKS * segment + task]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

fn non_empty(x: &[f64]) -> Result<()> {
    if x.is_empty() {
        Err(Error::Input("empty series".into()))
    } else {
        Ok(())
    }
}

pub fn series_max(x: &[f64]) -> Result<f64> {
    non_empty(x)?;
    Ok(x.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

pub fn series_min(x: &[f64]) -> Result<f64> {
    non_empty(x)?;
    Ok(x.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Population standard deviation.
pub fn series_std(x: &[f64]) -> Result<f64> {
    non_empty(x)?;
    Ok(crate::series::population_std(x))
}

/// Strict local maxima plus strict local minima over 3-point windows.
pub fn count_peaks(x: &[f64]) -> usize {
    x.windows(3)
        .filter(|w| (w[0] < w[1] && w[1] > w[2]) || (w[0] > w[1] && w[1] < w[2]))
        .count()
}

pub fn median(x: &[f64]) -> Result<f64> {
    non_empty(x)?;
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    Ok(if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    })
}

/// Sign changes of `x − median(x)`, ignoring samples that sit exactly on the median.
pub fn count_median_crossings(x: &[f64]) -> usize {
    let Ok(m) = median(x) else { return 0 };
    let mut prev: Option<bool> = None;
    let mut crossings = 0;
    for &v in x {
        if v == m {
            continue;
        }
        let above = v > m;
        if prev.is_some_and(|p| p != above) {
            crossings += 1;
        }
        prev = Some(above);
    }
    crossings
}

/// Splits `x` into `k` contiguous windows; window `j` covers `⌊jL/k⌋..⌊(j+1)L/k⌋`.
pub fn split_segments(x: &[f64], k: usize) -> Result<Vec<&[f64]>> {
    let n = x.len();
    if k == 0 || n < k {
        return Err(Error::Input(format!("cannot split length {n} into {k} segments")));
    }
    Ok((0..k).map(|j| &x[j * n / k..(j + 1) * n / k]).collect())
}

fn window_stats(x: &[f64], out: &mut [f64]) {
    let len = x.len() as f64;
    out[task::MAX] = series_max(x).expect("non-empty window");
    out[task::MIN] = series_min(x).expect("non-empty window");
    out[task::STD] = crate::series::population_std(x);
    out[task::PEAKS] = count_peaks(x) as f64 / len;
    out[task::CROSSINGS] = count_median_crossings(x) as f64 / len;
}

pub fn label_vector(x: &[f64]) -> Result<LabelVector> {
    if x.len() < MIN_LABEL_LEN {
        return Err(Error::Input(format!(
            "labeling needs at least {MIN_LABEL_LEN} samples, got {}",
            x.len()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("series to label".into()));
    }
    let mut out = [0.0; LABEL_WIDTH];
    window_stats(x, &mut out[..TASKS]);
    for (s, seg) in split_segments(x, SEGMENTS)?.into_iter().enumerate() {
        let start = TASKS + TASKS * s;
        window_stats(seg, &mut out[start..start + TASKS]);
    }
    Ok(LabelVector(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn extremes() {
        assert_eq!(series_max(&[3.0, 1.0, 2.0]).unwrap(), 3.0);
        assert_eq!(series_max(&[5.0, 5.0, 5.0]).unwrap(), 5.0);
        assert_eq!(series_min(&[3.0, 1.0, 2.0]).unwrap(), 1.0);
        assert_eq!(series_min(&[7.0]).unwrap(), 7.0);
        let x = [0.3, -1.2, 4.0];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_eq!(series_min(&neg).unwrap(), -4.0);
        assert!(series_max(&[]).is_err());
        assert!(series_std(&[]).is_err());
    }

    #[test]
    fn normalized_sine_max() {
        let mut x: Vec<f64> = (0..100)
            .map(|i| (2.0 * std::f64::consts::PI * 3.0 * i as f64 / 100.0).sin())
            .collect();
        crate::series::z_normalize(&mut x);
        let m = series_max(&x).unwrap();
        assert!((m / 2f64.sqrt() - 1.0).abs() < 0.05, "{m}");
    }

    #[test]
    fn std_values() {
        assert_eq!(series_std(&[1.0, 1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(series_std(&[0.0, 2.0]).unwrap(), 1.0);
        assert!((series_std(&[1.0, 2.0, 3.0, 4.0]).unwrap() - 1.118034).abs() < 1e-6);
    }

    #[test]
    fn peaks() {
        assert_eq!(count_peaks(&[0.0, 1.0, 0.0]), 1);
        assert_eq!(count_peaks(&[0.0, 1.0, 0.0, 1.0, 0.0]), 3);
        assert_eq!(count_peaks(&[0.0, 1.0, 1.0, 0.0]), 0);
        assert_eq!(count_peaks(&[1.0, 2.0]), 0);
    }

    #[test]
    fn crossings() {
        assert_eq!(count_median_crossings(&[1.0, 2.0, 3.0, 4.0]), 1);
        assert_eq!(count_median_crossings(&[0.0, 1.0, 0.0, 1.0]), 3);
        assert_eq!(count_median_crossings(&[5.0, 5.0, 5.0]), 0);
        // touching the median without crossing
        assert_eq!(count_median_crossings(&[1.0, 2.0, 1.0]), 0);
    }

    #[test]
    fn segment_boundaries() {
        let x: Vec<f64> = (0..20).map(f64::from).collect();
        assert!(split_segments(&x, 10).unwrap().iter().all(|s| s.len() == 2));
        let x: Vec<f64> = (0..25).map(f64::from).collect();
        let lens: Vec<usize> = split_segments(&x, 10).unwrap().iter().map(|s| s.len()).collect();
        assert_eq!(lens, vec![2, 3, 2, 3, 2, 3, 2, 3, 2, 3]);
        assert!(split_segments(&x[..9], 10).is_err());
    }

    #[test]
    fn constant_series_labels() {
        let lv = label_vector(&[2.0; 40]).unwrap();
        for s in 0..=SEGMENTS {
            let base = TASKS * s;
            assert_eq!(lv.0[base + task::STD], 0.0);
            assert_eq!(lv.0[base + task::PEAKS], 0.0);
            assert_eq!(lv.0[base + task::CROSSINGS], 0.0);
        }
        assert!(label_vector(&[1.0; 29]).is_err());
    }

    proptest! {
        #[test]
        fn peak_symmetries(x in prop::collection::vec(-100i32..100, 0..60)) {
            let x: Vec<f64> = x.into_iter().map(f64::from).collect();
            let rev: Vec<f64> = x.iter().rev().copied().collect();
            let neg: Vec<f64> = x.iter().map(|v| -v).collect();
            prop_assert_eq!(count_peaks(&x), count_peaks(&rev));
            prop_assert_eq!(count_peaks(&x), count_peaks(&neg));
        }

        #[test]
        fn crossings_affine_invariant(
            x in prop::collection::vec(-50i32..50, 1..60),
            a in 1i32..8,
            b in -20i32..20,
        ) {
            // integer-valued affine maps keep the median comparison exact
            let x: Vec<f64> = x.into_iter().map(f64::from).collect();
            let y: Vec<f64> = x.iter().map(|v| f64::from(a) * v + f64::from(b)).collect();
            prop_assert_eq!(count_median_crossings(&x), count_median_crossings(&y));
        }

        #[test]
        fn extremes_and_std_identities(
            x in prop::collection::vec(-1e3f64..1e3, 1..80),
            c in -1e3f64..1e3,
        ) {
            let neg: Vec<f64> = x.iter().map(|v| -v).collect();
            prop_assert_eq!(series_max(&neg).unwrap(), -series_min(&x).unwrap());
            let shifted: Vec<f64> = x.iter().map(|v| v + c).collect();
            let d = (series_std(&shifted).unwrap() - series_std(&x).unwrap()).abs();
            prop_assert!(d < 1e-9 * (1.0 + c.abs()));
        }

        #[test]
        fn segments_partition(n in 10usize..300) {
            let x: Vec<f64> = (0..n).map(|i| i as f64).collect();
            let joined: Vec<f64> = split_segments(&x, 10).unwrap().concat();
            prop_assert_eq!(joined, x);
        }

        #[test]
        fn label_order_properties(x in prop::collection::vec(-5f64..5.0, 30..200)) {
            let lv = label_vector(&x).unwrap();
            prop_assert!(lv.whole(task::MAX) >= lv.whole(task::MIN));
            for s in 0..SEGMENTS {
                prop_assert!(lv.segment(s, task::MAX) <= lv.whole(task::MAX));
                prop_assert!(lv.segment(s, task::MIN) >= lv.whole(task::MIN));
                prop_assert!(lv.segment(s, task::PEAKS) >= 0.0);
                prop_assert!(lv.segment(s, task::CROSSINGS) >= 0.0);
            }
            prop_assert!(lv.0.iter().all(|v| v.is_finite()));
        }
    }
}
