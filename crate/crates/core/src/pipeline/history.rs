use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, FormatError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub train_loss: f64,
    /// Validation loss during pretraining; test-set loss during classification runs.
    pub val_loss: Option<f64>,
    pub test_accuracy: Option<f64>,
}

/// One record per completed epoch.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub records: Vec<EpochRecord>,
}

const HEADER: &str = "epoch,train_loss,val_loss,test_accuracy";

fn cell(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.9}")).unwrap_or_default()
}

impl TrainHistory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn accuracies(&self) -> Vec<Option<f64>> {
        self.records.iter().map(|r| r.test_accuracy).collect()
    }

    pub fn last(&self) -> Option<&EpochRecord> {
        self.records.last()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&format!(
                "{},{:.9},{},{}\n",
                r.epoch,
                r.train_loss,
                cell(r.val_loss),
                cell(r.test_accuracy)
            ));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn parse_csv(text: &str) -> std::result::Result<Self, FormatError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == HEADER => {}
            _ => return Err(FormatError::Parse {
                line: 1,
                message: format!("expected header `{HEADER}`"),
            }),
        }
        let mut records = Vec::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let err = |message: String| FormatError::Parse { line: i + 1, message };
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            if cells.len() != 4 {
                return Err(err(format!("expected 4 cells, found {}", cells.len())));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| err(format!("not a number: {s:?}")));
            let opt = |s: &str| if s.is_empty() { Ok(None) } else { num(s).map(Some) };
            records.push(EpochRecord {
                epoch: cells[0].parse().map_err(|_| err(format!("bad epoch {:?}", cells[0])))?,
                train_loss: num(cells[1])?,
                val_loss: opt(cells[2])?,
                test_accuracy: opt(cells[3])?,
            });
        }
        Ok(Self { records })
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_csv(&text).map_err(|e| Error::at(path, e))
    }
}
