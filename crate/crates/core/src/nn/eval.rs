use serde::{Deserialize, Serialize};

use super::network::NetworkModel;
use crate::data::LabeledDataset;
use crate::error::{invalid, Result};
use crate::scalar::Real;

/// `confusion[true][predicted]` over the model's label order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub labels: Vec<String>,
    pub accuracy: f64,
    pub confusion: Vec<Vec<u64>>,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
}

impl EvalReport {
    /// Builds the report from a confusion matrix; empty rows or columns
    /// give a precision or recall of 0.
    pub fn from_confusion(labels: Vec<String>, confusion: Vec<Vec<u64>>) -> Self {
        let k = labels.len();
        let total: u64 = confusion.iter().flatten().sum();
        let trace: u64 = (0..k).map(|i| confusion[i][i]).sum();
        let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = (0..k)
            .map(|j| ratio(confusion[j][j], (0..k).map(|i| confusion[i][j]).sum()))
            .collect();
        let recall = (0..k)
            .map(|i| ratio(confusion[i][i], confusion[i].iter().sum()))
            .collect();
        Self {
            labels,
            accuracy: ratio(trace, total),
            confusion,
            precision,
            recall,
        }
    }

    pub fn total(&self) -> u64 {
        self.confusion.iter().flatten().sum()
    }
}

impl<T: Real> NetworkModel<T> {
    /// Predicts every raw row of `ds`; dataset labels are matched by name.
    pub fn evaluate(&self, ds: &LabeledDataset<T>) -> Result<EvalReport> {
        ds.validate()?;
        let mapping = ds
            .label_names
            .iter()
            .map(|name| {
                self.labels
                    .iter()
                    .position(|l| l == name)
                    .ok_or_else(|| invalid(format!("dataset label '{name}' is unknown to the model")))
            })
            .collect::<Result<Vec<_>>>()?;
        let k = self.label_count();
        let mut confusion = vec![vec![0u64; k]; k];
        for (row, &l) in ds.rows.iter().zip(&ds.labels) {
            let (pred, _) = self.predict(row)?;
            confusion[mapping[l]][pred] += 1;
        }
        Ok(EvalReport::from_confusion(self.labels.clone(), confusion))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_predictor_on_balanced_set() {
        let r = EvalReport::from_confusion(vec!["a".into(), "b".into()], vec![vec![5, 0], vec![5, 0]]);
        assert_eq!(r.accuracy, 0.5);
        assert_eq!(r.precision, vec![0.5, 0.0]);
        assert_eq!(r.recall, vec![1.0, 0.0]);
        assert_eq!(r.total(), 10);
    }
}
