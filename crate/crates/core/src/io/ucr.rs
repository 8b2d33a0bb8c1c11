//! UCR-archive style text files: one series per line, class label first, values
//! separated by tabs or commas.

use std::path::Path;

use crate::error::{Error, FormatError, Result};
use crate::series::z_normalize;

/// Series with their original label strings, z-normalized per series.
#[derive(Debug, Clone, PartialEq)]
pub struct UcrFile {
    pub series: Vec<Vec<f64>>,
    pub raw_labels: Vec<String>,
}

/// Raw label → contiguous 0-based class index.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ClassMap {
    pub labels: Vec<String>,
}

impl ClassMap {
    /// Orders labels numerically when they all parse as numbers, lexically otherwise.
    pub fn from_labels<'a>(labels: impl IntoIterator<Item = &'a str>) -> Self {
        let mut uniq: Vec<String> = labels
            .into_iter()
            .map(str::to_string)
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        let numeric: Option<Vec<f64>> = uniq.iter().map(|l| l.parse::<f64>().ok()).collect();
        if let Some(keys) = numeric {
            let mut paired: Vec<(f64, String)> = keys.into_iter().zip(uniq).collect();
            paired.sort_by(|a, b| a.0.total_cmp(&b.0));
            uniq = paired.into_iter().map(|(_, l)| l).collect();
        }
        Self { labels: uniq }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// A labeled dataset with contiguous class indices.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub series: Vec<Vec<f64>>,
    pub classes: Vec<usize>,
    pub class_map: ClassMap,
}

impl LabeledDataset {
    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.class_map.len()
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            series: indices.iter().map(|&i| self.series[i].clone()).collect(),
            classes: indices.iter().map(|&i| self.classes[i]).collect(),
            class_map: self.class_map.clone(),
        }
    }
}

impl UcrFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| match e {
            Error::FormatData(f) => Error::at(path, f),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut series = Vec::new();
        let mut raw_labels = Vec::new();
        let mut width = None;
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| FormatError::Parse {
                line: line_no,
                message,
            };
            let mut tokens = line
                .split(['\t', ','])
                .map(str::trim)
                .filter(|t| !t.is_empty());
            let label = tokens.next().expect("non-empty line has a token");
            let values = tokens
                .map(|t| {
                    let v: f64 = t.parse().map_err(|_| parse_err(format!("not a number: {t:?}")))?;
                    if v.is_finite() {
                        Ok(v)
                    } else {
                        Err(parse_err(format!("non-finite value {t:?}")))
                    }
                })
                .collect::<std::result::Result<Vec<f64>, _>>()?;
            if values.is_empty() {
                return Err(parse_err("no values after the class label".into()).into());
            }
            match width {
                None => width = Some(values.len()),
                Some(w) if w != values.len() => {
                    return Err(parse_err(format!(
                        "ragged row: {} values, earlier rows have {w}",
                        values.len()
                    ))
                    .into())
                }
                _ => {}
            }
            let mut values = values;
            z_normalize(&mut values);
            series.push(values);
            raw_labels.push(label.to_string());
        }
        if series.is_empty() {
            return Err(FormatError::Invalid("no series in file".into()).into());
        }
        Ok(Self { series, raw_labels })
    }

    pub fn class_map(&self) -> ClassMap {
        ClassMap::from_labels(self.raw_labels.iter().map(String::as_str))
    }

    /// Applies `map`; labels missing from it are an error.
    pub fn with_classes(self, map: &ClassMap) -> Result<LabeledDataset> {
        let classes = self
            .raw_labels
            .iter()
            .enumerate()
            .map(|(i, l)| {
                map.index_of(l).ok_or_else(|| {
                    Error::Input(format!("series {i} has class {l:?}, which is not in the training classes"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LabeledDataset {
            series: self.series,
            classes,
            class_map: map.clone(),
        })
    }
}

/// Loads a file and remaps its own labels to `0..C`.
pub fn load_ucr_tsv(path: &Path) -> Result<LabeledDataset> {
    let file = UcrFile::read(path)?;
    let map = file.class_map();
    file.with_classes(&map)
}

/// Loads a train/test pair with the class mapping taken from the training file.
pub fn load_ucr_pair(train: &Path, test: &Path) -> Result<(LabeledDataset, LabeledDataset)> {
    let train = UcrFile::read(train)?;
    let map = train.class_map();
    let test = UcrFile::read(test)?.with_classes(&map)?;
    Ok((train.with_classes(&map)?, test))
}

/// Class histogram, in class order.
pub fn class_counts(classes: &[usize], n_classes: usize) -> Vec<usize> {
    let mut counts = vec![0; n_classes];
    for &c in classes {
        counts[c] += 1;
    }
    counts
}

/// Writes a labeled dataset back out in the tab-separated layout.
pub fn write_ucr_tsv(path: &Path, data: &LabeledDataset) -> Result<()> {
    let mut out = String::new();
    for (s, &c) in data.series.iter().zip(&data.classes) {
        out.push_str(&data.class_map.labels[c]);
        for v in s {
            out.push('\t');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}
