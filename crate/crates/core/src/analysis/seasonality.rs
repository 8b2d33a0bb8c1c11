use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SEASONAL_THRESHOLD: f64 = 0.5;
pub const MIN_SEASONALITY_LEN: usize = 20;

/// Biased sample autocorrelation at `lag`: lagged cross-products over the total sum of
/// squares, both about the series mean.
pub fn autocorrelation(x: &[f64], lag: usize) -> Result<f64> {
    let n = x.len();
    if lag == 0 || lag >= n {
        return Err(Error::Input(format!("lag {lag} out of range for length {n}")));
    }
    let m = crate::series::mean(x);
    let denom: f64 = x.iter().map(|v| (v - m) * (v - m)).sum();
    if !(denom > 0.0) {
        return Err(Error::Input("autocorrelation of a zero-variance series".into()));
    }
    let num: f64 = x[..n - lag]
        .iter()
        .zip(&x[lag..])
        .map(|(a, b)| (a - m) * (b - m))
        .sum();
    Ok((num / denom).clamp(-1.0, 1.0))
}

/// Lags scanned by [`seasonality_series`]: `ceil(L/10) ..= floor(L/2)`.
pub fn seasonality_lags(len: usize) -> std::ops::RangeInclusive<usize> {
    len.div_ceil(10)..=len / 2
}

/// Largest absolute autocorrelation over the seasonal lag window; 0 for a flat series.
pub fn seasonality_series(x: &[f64]) -> Result<f64> {
    if x.len() < MIN_SEASONALITY_LEN {
        return Err(Error::Input(format!(
            "seasonality needs at least {MIN_SEASONALITY_LEN} samples, got {}",
            x.len()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("series".into()));
    }
    let m = crate::series::mean(x);
    if x.iter().all(|v| (v - m).abs() <= f64::EPSILON * m.abs().max(1.0)) {
        return Ok(0.0);
    }
    let mut best = 0.0f64;
    for lag in seasonality_lags(x.len()) {
        best = best.max(autocorrelation(x, lag)?.abs());
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeasonalityReport {
    pub per_series: Vec<f64>,
    /// Dataset-level seasonality metric: mean of the per-series scores.
    pub sm: f64,
    pub is_seasonal: bool,
}

pub fn seasonality_dataset<S: AsRef<[f64]>>(series: &[S]) -> Result<SeasonalityReport> {
    if series.is_empty() {
        return Err(Error::Input("seasonality of an empty dataset".into()));
    }
    let per_series = series
        .iter()
        .map(|s| seasonality_series(s.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    let sm = per_series.iter().sum::<f64>() / per_series.len() as f64;
    Ok(SeasonalityReport {
        per_series,
        sm,
        is_seasonal: sm >= SEASONAL_THRESHOLD,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};
    use std::f64::consts::PI;

    #[test]
    fn alternating_series() {
        let x = [1.0, -1.0, 1.0, -1.0];
        assert!((autocorrelation(&x, 1).unwrap() + 0.75).abs() < 1e-12);
        assert!((autocorrelation(&x, 2).unwrap() - 0.5).abs() < 1e-12);
        assert!(autocorrelation(&x, 4).is_err());
        assert!(autocorrelation(&x, 0).is_err());
        assert!(autocorrelation(&[2.0; 5], 1).is_err());
    }

    #[test]
    fn sine_is_seasonal() {
        let x: Vec<f64> = (0..200).map(|i| (2.0 * PI * 5.0 * i as f64 / 200.0).sin()).collect();
        // period 40: |r(40)| = 160/200, and the half-period lag 20 gives |r(20)| = 180/200
        let sm = seasonality_series(&x).unwrap();
        assert!((autocorrelation(&x, 40).unwrap() - 0.8).abs() < 1e-9);
        assert!((sm - 0.9).abs() < 1e-9, "{sm}");
    }

    #[test]
    fn constant_and_short_series() {
        assert_eq!(seasonality_series(&[3.0; 40]).unwrap(), 0.0);
        assert!(seasonality_series(&[1.0; 19]).is_err());
        assert!(seasonality_dataset::<Vec<f64>>(&[]).is_err());
    }

    #[test]
    fn noise_is_not_seasonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut over = 0;
        for _ in 0..1000 {
            let x: Vec<f64> = (0..500).map(|_| StandardNormal.sample(&mut rng)).collect();
            if seasonality_series(&x).unwrap() > 0.3 {
                over += 1;
            }
        }
        assert!(over <= 10, "{over} of 1000 noise series scored above 0.3");
    }

    #[test]
    fn dataset_report() {
        let sine: Vec<f64> = (0..120).map(|i| (2.0 * PI * i as f64 / 24.0).sin()).collect();
        let rep = seasonality_dataset(&[sine.clone(), sine.clone()]).unwrap();
        assert_eq!(rep.sm, seasonality_series(&sine).unwrap());
        assert!(rep.is_seasonal);
    }

    proptest! {
        #[test]
        fn autocorrelation_invariances(
            x in prop::collection::vec(-10f64..10.0, 20..80),
            c in -100f64..100.0,
            a in prop::sample::select(vec![-3.0, -0.5, 0.25, 2.0, 7.0]),
            lag in 1usize..19,
        ) {
            let var: f64 = {
                let m = crate::series::mean(&x);
                x.iter().map(|v| (v - m) * (v - m)).sum()
            };
            prop_assume!(var > 1e-6);
            let r = autocorrelation(&x, lag).unwrap();
            prop_assert!((-1.0..=1.0).contains(&r));
            let shifted: Vec<f64> = x.iter().map(|v| v + c).collect();
            prop_assert!((autocorrelation(&shifted, lag).unwrap() - r).abs() < 1e-9);
            let scaled: Vec<f64> = x.iter().map(|v| v * a).collect();
            prop_assert!((autocorrelation(&scaled, lag).unwrap() - r).abs() < 1e-9);
        }
    }
}
