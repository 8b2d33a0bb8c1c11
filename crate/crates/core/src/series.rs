/// A univariate series with an optional class index.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub values: Vec<f64>,
    pub label: Option<usize>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values, label: None }
    }

    pub fn labeled(values: Vec<f64>, label: usize) -> Self {
        Self {
            values,
            label: Some(label),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

impl AsRef<[f64]> for TimeSeries {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Population standard deviation.
pub fn population_std(x: &[f64]) -> f64 {
    let m = mean(x);
    (x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64).sqrt()
}

/// Rescales `x` in place to zero mean and unit population variance.
///
/// Returns `false` and leaves the series centred when its spread is below `1e-12`.
pub fn z_normalize(x: &mut [f64]) -> bool {
    if x.is_empty() {
        return false;
    }
    let m = mean(x);
    x.iter_mut().for_each(|v| *v -= m);
    let sd = (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt();
    if !(sd > 1e-12) {
        return false;
    }
    x.iter_mut().for_each(|v| *v /= sd);
    true
}
