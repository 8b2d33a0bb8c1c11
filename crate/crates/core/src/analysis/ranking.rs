//! Multi-method comparison over a table of per-dataset accuracies.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, FormatError, Result};

/// Accuracies with one row per dataset and one column per method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalTable {
    pub methods: Vec<String>,
    pub datasets: Vec<String>,
    pub accuracy: Vec<Vec<f64>>,
}

impl EvalTable {
    pub fn new(methods: Vec<String>, datasets: Vec<String>, accuracy: Vec<Vec<f64>>) -> Result<Self> {
        let t = Self {
            methods,
            datasets,
            accuracy,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() || self.methods.len() < 2 {
            return Err(Error::Input("a comparison needs at least one dataset and two methods".into()));
        }
        if self.accuracy.len() != self.datasets.len() {
            return Err(Error::Shape(format!(
                "{} accuracy rows for {} datasets",
                self.accuracy.len(),
                self.datasets.len()
            )));
        }
        for (name, row) in self.datasets.iter().zip(&self.accuracy) {
            if row.len() != self.methods.len() {
                return Err(Error::Shape(format!("dataset {name}: {} cells", row.len())));
            }
            if let Some(a) = row.iter().find(|a| !(0.0..=1.0).contains(*a)) {
                return Err(Error::Input(format!("dataset {name}: accuracy {a} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// Reads a CSV whose header is `dataset,<method>,...` and whose rows start with the
    /// dataset name.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| csv_error(path, e))?;
        let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
        let methods: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
        let mut datasets = Vec::new();
        let mut accuracy = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| csv_error(path, e))?;
            let line = i + 2;
            datasets.push(record.get(0).unwrap_or_default().to_string());
            let row = record
                .iter()
                .skip(1)
                .map(|cell| {
                    cell.parse::<f64>().map_err(|_| {
                        Error::at(
                            path,
                            FormatError::Parse {
                                line,
                                message: format!("not a number: {cell:?}"),
                            },
                        )
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            accuracy.push(row);
        }
        Self::new(methods, datasets, accuracy)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
        let header = std::iter::once("dataset").chain(self.methods.iter().map(String::as_str));
        w.write_record(header).map_err(|e| csv_error(path, e))?;
        for (name, row) in self.datasets.iter().zip(&self.accuracy) {
            let cells = std::iter::once(name.clone()).chain(row.iter().map(|a| a.to_string()));
            w.write_record(cells).map_err(|e| csv_error(path, e))?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    if e.is_io_error() {
        if let csv::ErrorKind::Io(io) = e.into_kind() {
            return Error::Io(io);
        }
        unreachable!();
    }
    Error::at(
        path,
        FormatError::Parse {
            line,
            message: e.to_string(),
        },
    )
}

/// Ranks of `row` by descending value, 1 = best, ties share the mean of their positions.
pub fn rank_row(row: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_by(|&a, &b| row[b].total_cmp(&row[a]));
    let mut ranks = vec![0.0; row.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && row[order[j + 1]] == row[order[i]] {
            j += 1;
        }
        // positions i..=j (0-based) share rank mean(i+1..=j+1)
        let shared = (i + j) as f64 / 2.0 + 1.0;
        for &m in &order[i..=j] {
            ranks[m] = shared;
        }
        i = j + 1;
    }
    ranks
}

/// Mean over datasets of each method's tie-averaged rank.
pub fn mean_average_rank(table: &EvalTable) -> Result<Vec<f64>> {
    table.validate()?;
    let mut sums = vec![0.0; table.methods.len()];
    for row in &table.accuracy {
        sums.iter_mut().zip(rank_row(row)).for_each(|(s, r)| *s += r);
    }
    let n = table.datasets.len() as f64;
    Ok(sums.into_iter().map(|s| s / n).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WinLoss {
    pub wins: usize,
    pub losses: usize,
}

/// A method wins a dataset when it attains the row maximum and loses when it attains
/// the row minimum; tied methods all get the win (or loss).
pub fn win_loss(table: &EvalTable) -> Result<Vec<WinLoss>> {
    table.validate()?;
    let mut out = vec![WinLoss { wins: 0, losses: 0 }; table.methods.len()];
    for row in &table.accuracy {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = row.iter().copied().fold(f64::INFINITY, f64::min);
        for (wl, &a) in out.iter_mut().zip(row) {
            wl.wins += usize::from(a == max);
            wl.losses += usize::from(a == min);
        }
    }
    Ok(out)
}

/// Two-tailed Nemenyi critical values `q_α` for k = 2..=10 methods (studentized range
/// statistic divided by √2).
const Q_005: [f64; 9] = [1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164];
const Q_010: [f64; 9] = [1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920];

pub fn nemenyi_q(k: usize, alpha: f64) -> Result<f64> {
    let table = if (alpha - 0.05).abs() < 1e-12 {
        &Q_005
    } else if (alpha - 0.10).abs() < 1e-12 {
        &Q_010
    } else {
        return Err(Error::Input(format!("unsupported alpha {alpha}; use 0.05 or 0.10")));
    };
    if !(2..=10).contains(&k) {
        return Err(Error::Input(format!("Nemenyi table covers 2..=10 methods, got {k}")));
    }
    Ok(table[k - 2])
}

/// Critical difference `q_α · sqrt(k(k+1) / 6N)` between mean ranks.
pub fn nemenyi_cd(k: usize, n: usize, alpha: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Input("critical difference needs at least one dataset".into()));
    }
    let q = nemenyi_q(k, alpha)?;
    Ok(q * ((k * (k + 1)) as f64 / (6.0 * n as f64)).sqrt())
}

pub fn significantly_different(rank_a: f64, rank_b: f64, cd: f64) -> bool {
    (rank_a - rank_b).abs() > cd
}
