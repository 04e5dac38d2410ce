use std::collections::BTreeMap;
use std::io::Read;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureMode, SPATIAL_NAMES};

/// Identifies a row in time: rows sharing a sequence are one track's
/// predictions, ordered by frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RowKey {
    pub sequence: u64,
    pub frame: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabeledDataset {
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub keys: Vec<RowKey>,
}

impl LabeledDataset {
    pub fn new(names: Vec<String>) -> Self {
        Self { names, ..Self::default() }
    }

    pub fn push(&mut self, row: Vec<f64>, label: usize, key: RowKey) {
        self.rows.push(row);
        self.labels.push(label);
        self.keys.push(key);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    /// Sorted distinct labels.
    pub fn classes(&self) -> Vec<usize> {
        let mut c = self.labels.clone();
        c.sort_unstable();
        c.dedup();
        c
    }

    pub fn class_counts(&self) -> BTreeMap<usize, usize> {
        let mut m = BTreeMap::new();
        for &l in &self.labels {
            *m.entry(l).or_insert(0) += 1;
        }
        m
    }

    /// Rejects ragged rows, non-finite values and single-class data.
    pub fn validate(&self) -> Result<()> {
        if self.rows.len() != self.labels.len() || self.rows.len() != self.keys.len() {
            return Err(Error::Dataset("rows, labels and keys differ in length".into()));
        }
        for (i, r) in self.rows.iter().enumerate() {
            if r.len() != self.dim() {
                return Err(Error::Dataset(format!("row {i} has {} values, expected {}", r.len(), self.dim())));
            }
            if let Some(j) = r.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("row {i}, column {}", self.names[j])));
            }
        }
        if self.classes().len() < 2 {
            return Err(Error::Dataset(format!("need at least 2 classes, found {:?}", self.classes())));
        }
        Ok(())
    }

    pub fn subset(&self, idx: &[usize]) -> Self {
        Self {
            names: self.names.clone(),
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            keys: idx.iter().map(|&i| self.keys[i]).collect(),
        }
    }

    pub fn select_columns(&self, cols: &[usize]) -> Self {
        Self {
            names: cols.iter().map(|&c| self.names[c].clone()).collect(),
            rows: self.rows.iter().map(|r| cols.iter().map(|&c| r[c]).collect()).collect(),
            labels: self.labels.clone(),
            keys: self.keys.clone(),
        }
    }

    /// Appends another dataset with the same columns; its sequences are
    /// shifted past ours so tracks from different runs stay apart.
    pub fn append(&mut self, other: &LabeledDataset) -> Result<()> {
        if !self.is_empty() && self.names != other.names {
            return Err(Error::Dataset("cannot append datasets with different columns".into()));
        }
        if self.is_empty() {
            self.names = other.names.clone();
        }
        let offset = self.keys.iter().map(|k| k.sequence + 1).max().unwrap_or(0);
        self.rows.extend(other.rows.iter().cloned());
        self.labels.extend_from_slice(&other.labels);
        self.keys.extend(other.keys.iter().map(|k| RowKey {
            sequence: k.sequence + offset,
            frame: k.frame,
        }));
        Ok(())
    }

    /// Stratified split: each class contributes round(frac * n_c) rows to
    /// the first part. Both parts keep the original row order.
    pub fn split(&self, train_frac: f64, seed: u64) -> Result<(Self, Self)> {
        if !(0.0..=1.0).contains(&train_frac) {
            return Err(Error::Config(format!("train fraction {train_frac} outside [0, 1]")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut train = Vec::new();
        for class in self.classes() {
            let mut idx: Vec<usize> = (0..self.len()).filter(|&i| self.labels[i] == class).collect();
            idx.shuffle(&mut rng);
            let n = (train_frac * idx.len() as f64).round() as usize;
            train.extend_from_slice(&idx[..n]);
        }
        train.sort_unstable();
        let mut in_train = vec![false; self.len()];
        for &i in &train {
            in_train[i] = true;
        }
        let test: Vec<usize> = (0..self.len()).filter(|&i| !in_train[i]).collect();
        Ok((self.subset(&train), self.subset(&test)))
    }

    /// Reads a feature CSV. Full mode keeps rows that carry frequency
    /// features; spatial-only mode keeps the ten spatial columns of every
    /// row. Unlabelled rows are skipped.
    pub fn from_feature_csv<R: Read>(input: R, mode: FeatureMode) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let n_spatial = SPATIAL_NAMES.len();
        if header.len() < 4 + n_spatial || header[..4] != ["track_id", "frame", "mode", "label"] {
            return Err(Error::Dataset("not a feature CSV header".into()));
        }
        let width = match mode {
            FeatureMode::SpatialOnly => n_spatial,
            FeatureMode::Full => header.len() - 4,
        };
        let mut ds = Self::new(header[4..4 + width].to_vec());
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let bad = |what: &str| Error::Dataset(format!("data row {}: bad {what}", line + 1));
            if rec.get(3).unwrap_or("").is_empty() {
                continue;
            }
            if mode == FeatureMode::Full && rec.get(2) != Some("full") {
                continue;
            }
            let track: u64 = rec[0].parse().map_err(|_| bad("track_id"))?;
            let frame: u64 = rec[1].parse().map_err(|_| bad("frame"))?;
            let label: usize = rec[3].parse().map_err(|_| bad("label"))?;
            let row = (4..4 + width)
                .map(|c| rec.get(c).and_then(|s| s.parse::<f64>().ok()).ok_or_else(|| bad(&header[c])))
                .collect::<Result<Vec<f64>>>()?;
            ds.push(row, label, RowKey { sequence: track, frame });
        }
        if ds.is_empty() {
            return Err(Error::Dataset("no labelled rows".into()));
        }
        Ok(ds)
    }
}

/// Column subset of a full feature vector, covering the ablation axes:
/// spatial and/or frequency features, optionally restricted to some
/// frequency bands of eight statistics each.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FeatureSelect {
    pub spatial: bool,
    pub frequency: bool,
    /// Band indices in frequency order (level 1 first, approximation last);
    /// `None` keeps every band.
    pub bands: Option<Vec<usize>>,
}

impl FeatureSelect {
    pub fn all() -> Self {
        Self {
            spatial: true,
            frequency: true,
            bands: None,
        }
    }

    pub fn spatial_only() -> Self {
        Self {
            spatial: true,
            frequency: false,
            bands: None,
        }
    }

    pub fn frequency_only() -> Self {
        Self {
            spatial: false,
            frequency: true,
            bands: None,
        }
    }

    /// Column indices into `spatial ++ frequency` with `n_freq` frequency values.
    pub fn columns(&self, n_freq: usize) -> Result<Vec<usize>> {
        let n_spatial = SPATIAL_NAMES.len();
        let mut cols: Vec<usize> = if self.spatial { (0..n_spatial).collect() } else { Vec::new() };
        if self.frequency {
            match &self.bands {
                None => cols.extend(n_spatial..n_spatial + n_freq),
                Some(bands) => {
                    for &b in bands {
                        if 8 * (b + 1) > n_freq {
                            return Err(Error::Config(format!("band {b} beyond {n_freq} frequency features")));
                        }
                        cols.extend(n_spatial + 8 * b..n_spatial + 8 * (b + 1));
                    }
                }
            }
        }
        if cols.is_empty() {
            return Err(Error::Config("feature selection is empty".into()));
        }
        Ok(cols)
    }

    pub fn needs_frequency(&self) -> bool {
        self.frequency
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n_per: usize) -> LabeledDataset {
        let mut ds = LabeledDataset::new(vec!["a".into(), "b".into()]);
        for c in 1..=3 {
            for i in 0..n_per * c {
                ds.push(
                    vec![c as f64, i as f64],
                    c,
                    RowKey {
                        sequence: c as u64,
                        frame: i as u64,
                    },
                );
            }
        }
        ds
    }

    #[test]
    fn split_is_stratified_and_disjoint() {
        let ds = toy(10);
        let (tr, te) = ds.split(0.7, 1).unwrap();
        assert_eq!(tr.len() + te.len(), ds.len());
        assert_eq!(tr.class_counts()[&1], 7);
        assert_eq!(tr.class_counts()[&2], 14);
        assert_eq!(tr.class_counts()[&3], 21);
        for k in &tr.keys {
            assert!(!te.keys.contains(k));
        }
        assert_eq!(ds.split(0.7, 1).unwrap(), (tr, te));
    }

    #[test]
    fn validation_reports_row() {
        let mut ds = toy(2);
        ds.rows[3][1] = f64::NAN;
        let msg = ds.validate().unwrap_err().to_string();
        assert!(msg.contains("row 3"), "{msg}");
        let single = ds.subset(&[0, 1]);
        assert!(matches!(single.validate(), Err(Error::Dataset(_))));
    }

    #[test]
    fn band_columns() {
        let sel = FeatureSelect {
            spatial: false,
            frequency: true,
            bands: Some(vec![4]),
        };
        assert_eq!(sel.columns(40).unwrap(), (42..50).collect::<Vec<_>>());
        assert!(sel.columns(32).is_err());
        assert_eq!(FeatureSelect::all().columns(40).unwrap().len(), 50);
    }

    #[test]
    fn reads_feature_csv() {
        let text = "track_id,frame,mode,label,s0,s1,s2,s3,s4,s5,s6,s7,s8,s9,f0,f1\n\
                    1,5,spatial_only,2,0,1,2,3,4,5,6,7,8,9,,\n\
                    1,6,full,2,0,1,2,3,4,5,6,7,8,9,1.5,2.5\n\
                    1,7,full,,0,1,2,3,4,5,6,7,8,9,1.5,2.5\n";
        let full = LabeledDataset::from_feature_csv(text.as_bytes(), FeatureMode::Full).unwrap();
        assert_eq!(full.len(), 1);
        assert_eq!(full.rows[0][11], 2.5);
        let sp = LabeledDataset::from_feature_csv(text.as_bytes(), FeatureMode::SpatialOnly).unwrap();
        assert_eq!(sp.len(), 2);
        assert_eq!(sp.dim(), 10);
    }
}
