use std::path::Path;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::seed::rng_for;

/// Labeled feature table. Labels are `0..classes`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub classes: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Reads a CSV with a header row whose last column is `label`.
    pub fn load_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| csv_error(path, e))?;
        let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
        let cols: Vec<String> = headers.iter().map(str::to_owned).collect();
        if cols.last().map(String::as_str) != Some("label") || cols.len() < 2 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                message: "header must list feature columns followed by `label`".into(),
            });
        }
        let n_feat = cols.len() - 1;
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| csv_error(path, e))?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            let bad = |message: String| Error::Parse {
                path: path.to_path_buf(),
                line,
                message,
            };
            if rec.len() != cols.len() {
                return Err(bad(format!(
                    "expected {} fields, found {}",
                    cols.len(),
                    rec.len()
                )));
            }
            let row = rec
                .iter()
                .take(n_feat)
                .enumerate()
                .map(|(k, s)| {
                    s.parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| bad(format!("column `{}`: not a number: {s:?}", cols[k])))
                })
                .collect::<Result<Vec<f64>>>()?;
            let label = rec[n_feat]
                .parse::<usize>()
                .map_err(|_| bad(format!("label is not a non-negative integer: {:?}", &rec[n_feat])))?;
            features.push(row);
            labels.push(label);
        }
        if labels.is_empty() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 2,
                message: "no data rows".into(),
            });
        }
        let classes = labels.iter().max().map_or(0, |m| m + 1);
        Ok(Self {
            feature_names: cols[..n_feat].to_vec(),
            features,
            labels,
            classes,
        })
    }

    fn subset(&self, idx: &[usize]) -> Self {
        Self {
            feature_names: self.feature_names.clone(),
            features: idx.iter().map(|&k| self.features[k].clone()).collect(),
            labels: idx.iter().map(|&k| self.labels[k]).collect(),
            classes: self.classes,
        }
    }

    /// Per-class shuffled split; each class contributes
    /// `round(train_frac * count)` samples to the training part. Both parts
    /// keep the original sample order.
    pub fn stratified_split(&self, train_frac: f64, seed: u64) -> Result<(Self, Self)> {
        if !(train_frac > 0.0 && train_frac < 1.0) {
            return Err(Error::invalid(format!(
                "train fraction must lie in (0, 1), got {train_frac}"
            )));
        }
        let mut rng = rng_for(seed, "split");
        let mut train_idx = Vec::new();
        let mut test_idx = Vec::new();
        for class in 0..self.classes {
            let mut idx: Vec<usize> = (0..self.len()).filter(|&k| self.labels[k] == class).collect();
            idx.shuffle(&mut rng);
            let cut = (train_frac * idx.len() as f64).round() as usize;
            train_idx.extend_from_slice(&idx[..cut]);
            test_idx.extend_from_slice(&idx[cut..]);
        }
        train_idx.sort_unstable();
        test_idx.sort_unstable();
        Ok((self.subset(&train_idx), self.subset(&test_idx)))
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        kind => Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("{kind:?}"),
        },
    }
}
