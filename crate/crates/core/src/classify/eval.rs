use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::dataset::{LabeledDataset, RowKey};
use super::model::Classifier;
use super::smooth::median_smooth;
use crate::error::{Error, Result};

pub const MEDIAN_WINDOW: usize = 25;

/// Frame-level accuracy before and after median smoothing, with the
/// confusion matrix of the raw predictions (rows true, columns predicted).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub labels: Vec<usize>,
    pub n: usize,
    pub accuracy_bm: f64,
    pub accuracy_am: f64,
    pub confusion: Vec<Vec<usize>>,
}

/// Smooths the predictions of each sequence in frame order and scores both
/// variants against the truth.
pub fn evaluate_predictions(truth: &[usize], pred: &[usize], keys: &[RowKey], window: usize) -> Result<Evaluation> {
    if truth.len() != pred.len() || truth.len() != keys.len() {
        return Err(Error::Shape("truth, predictions and keys differ in length".into()));
    }
    if truth.is_empty() {
        return Err(Error::Dataset("nothing to evaluate".into()));
    }
    let mut seqs: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (i, k) in keys.iter().enumerate() {
        seqs.entry(k.sequence).or_default().push(i);
    }
    let mut smoothed = vec![0; pred.len()];
    for idx in seqs.values_mut() {
        idx.sort_by_key(|&i| keys[i].frame);
        let p: Vec<usize> = idx.iter().map(|&i| pred[i]).collect();
        for (&i, s) in idx.iter().zip(median_smooth(&p, window)) {
            smoothed[i] = s;
        }
    }
    let mut labels: Vec<usize> = truth.iter().chain(pred).copied().collect();
    labels.sort_unstable();
    labels.dedup();
    let pos = |l: usize| labels.binary_search(&l).unwrap();
    let mut confusion = vec![vec![0; labels.len()]; labels.len()];
    for (t, p) in truth.iter().zip(pred) {
        confusion[pos(*t)][pos(*p)] += 1;
    }
    let n = truth.len();
    let hits = |p: &[usize]| truth.iter().zip(p).filter(|(a, b)| a == b).count() as f64 / n as f64;
    Ok(Evaluation {
        accuracy_bm: hits(pred),
        accuracy_am: hits(&smoothed),
        labels,
        n,
        confusion,
    })
}

pub fn evaluate(model: &Classifier, ds: &LabeledDataset, window: usize) -> Result<Evaluation> {
    let pred = ds.rows.iter().map(|r| model.predict_row(r).map(|p| p.label)).collect::<Result<Vec<_>>>()?;
    evaluate_predictions(&ds.labels, &pred, &ds.keys, window)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn keys(n: usize) -> Vec<RowKey> {
        (0..n).map(|f| RowKey { sequence: 0, frame: f as u64 }).collect()
    }

    #[test]
    fn perfect_predictions() {
        let t = vec![2; 50];
        let e = evaluate_predictions(&t, &t, &keys(50), 25).unwrap();
        assert_eq!((e.accuracy_bm, e.accuracy_am), (1.0, 1.0));
    }

    #[test]
    fn isolated_errors_fixed_by_median() {
        let t = vec![3; 500];
        let mut p = t.clone();
        for i in (37..500).step_by(100) {
            p[i] = 1;
        }
        let e = evaluate_predictions(&t, &p, &keys(500), 25).unwrap();
        assert!(e.accuracy_bm < 1.0);
        assert_eq!(e.accuracy_am, 1.0);
        assert_eq!(e.confusion, vec![vec![0, 0], vec![5, 495]]);
    }

    #[test]
    fn sequences_smoothed_separately_in_frame_order() {
        // Two interleaved tracks; each is constant on its own.
        let n = 60;
        let k: Vec<RowKey> = (0..n)
            .map(|i| RowKey {
                sequence: (i % 2) as u64,
                frame: (n - i) as u64,
            })
            .collect();
        let t: Vec<usize> = (0..n).map(|i| 1 + i % 2).collect();
        let e = evaluate_predictions(&t, &t, &k, 25).unwrap();
        assert_eq!(e.accuracy_am, 1.0);
    }
}
